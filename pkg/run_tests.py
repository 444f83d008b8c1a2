#!/usr/bin/env python
"""
Script to run tests for cascade-lab.

This script:
1. Deselects the slow numerical experiments unless asked for them
2. Runs the tests with pytest
"""

import argparse
import os
import subprocess
import sys


def main():
    """Main function."""
    parser = argparse.ArgumentParser(description="Run tests for cascade-lab")
    parser.add_argument(
        "--include-slow",
        action="store_true",
        help="Also run full cascades, lattice builds and scaling fits",
    )
    parser.add_argument(
        "--pytest-args", nargs="*", default=[], help="Additional arguments for pytest"
    )
    args = parser.parse_args()

    # Change to the project root directory
    script_dir = os.path.dirname(os.path.abspath(__file__))
    os.chdir(script_dir)

    test_command = ["pytest", "-v"]
    if not args.include_slow:
        test_command += ["-m", "not slow"]
    test_command += args.pytest_args

    print("\nRunning tests...\n")
    print(f"Command: {' '.join(test_command)}")

    test_process = subprocess.run(test_command)
    return test_process.returncode


if __name__ == "__main__":
    sys.exit(main())
