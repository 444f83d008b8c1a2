#!/usr/bin/env python
"""
Debug script to print all loaded settings and their sources.
Run this script to see the settings a cascade-lab command will start from.
"""

import argparse
import os
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Sequence, Tuple

from dotenv import dotenv_values

from cascade_lab.settings import SCHEMA_VERSION, Settings, load_settings

ENV_ALIASES = {"threads": "CASCADE_LAB_THREADS"}


def _file_values(path: Path) -> Dict[str, str]:
    if not path.exists():
        return {}
    return {
        k.upper(): v for k, v in dotenv_values(path).items() if v is not None
    }


def get_setting_source(
    env_var_name: str, config: Optional[Path] = None
) -> Tuple[str, Optional[str]]:
    """Determine the source of a setting (env var, config file, .env or default)."""
    for name in (env_var_name, env_var_name.lower()):
        if name in os.environ:
            return "environment", os.environ[name]
    if config is not None:
        value = _file_values(config).get(env_var_name)
        if value is not None:
            return f"config {config}", value
    value = _file_values(Path(".env")).get(env_var_name)
    if value is not None:
        return ".env file", value
    return "default", None


def iter_settings(settings: Settings) -> Iterator[Tuple[str, str, Any]]:
    """(section, env var name, value) for every leaf setting."""
    for name, value in settings.model_dump().items():
        if isinstance(value, dict):
            for key, inner in value.items():
                yield name, f"{name}__{key}".upper(), inner
        else:
            yield "general", ENV_ALIASES.get(name, name.upper()), value


def format_setting(name: str, value: Any, source: str) -> str:
    """Format a setting for display."""
    return f"{name:<32} = {str(value):<28} (from {source})"


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Display all settings and their sources."""
    parser = argparse.ArgumentParser(description="Show resolved cascade-lab settings")
    parser.add_argument("--config", type=Path, help="Experiment config file")
    args = parser.parse_args(argv)
    settings = load_settings(args.config)

    print("\n==== cascade-lab Settings ====\n")
    section = None
    for group, env_name, value in iter_settings(settings):
        if group != section:
            print(f"\n## {group}")
            section = group
        source, _ = get_setting_source(env_name, args.config)
        print(format_setting(env_name, value, source))

    print("\n## Constants")
    print(f"SCHEMA_VERSION                   = {SCHEMA_VERSION}")

    print("\n==== End of Settings ====\n")


if __name__ == "__main__":
    main()
