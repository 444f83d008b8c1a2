"""
Tests for artifact emission.
"""

import json

import numpy as np
import pytest

from cascade_lab.reports import (
    SCHEMA_LINE,
    PlotSpec,
    RunSummary,
    gnuplot_script,
    read_csv,
    write_csv,
    write_json,
    write_table,
)
from cascade_lab.settings import SCHEMA_VERSION


def test_csv_layout(tmp_path):
    """Schema line, header, then full-precision rows."""
    path = write_csv(tmp_path / "t.csv", np.array([[0.1, 2.0]]), ["t", "|b_1|"])
    lines = path.read_text().splitlines()
    assert lines[0] == SCHEMA_LINE
    assert lines[1] == "t,|b_1|"
    assert lines[2] == "0.10000000000000001,2"
    raw = path.read_bytes()
    assert raw.count(b"\r\n") == 3
    assert raw.count(b"\n") == 3


def test_csv_round_trip(tmp_path):
    """read_csv skips the schema line and header."""
    rows = np.arange(12, dtype=float).reshape(4, 3) / 7.0
    path = write_csv(tmp_path / "sub" / "t.csv", rows, ["a", "b", "c"])
    assert np.array_equal(read_csv(path), rows)


def test_csv_header_must_match(tmp_path):
    """One name per column."""
    with pytest.raises(ValueError):
        write_csv(tmp_path / "t.csv", np.zeros((2, 3)), ["a", "b"])


def test_csv_quotes_awkward_names(tmp_path):
    """Commas and quotes in column names are escaped."""
    path = write_csv(tmp_path / "t.csv", np.zeros((1, 2)), ["a,b", 'say "x"'])
    assert path.read_text().splitlines()[1] == '"a,b","say ""x"""'


def test_gnuplot_script():
    """The script reads the CSV by column header."""
    script = gnuplot_script(
        "t.csv", ["t", "x", "y"], PlotSpec("t", "value", logscale="y")
    )
    assert script.startswith(SCHEMA_LINE)
    assert "set logscale y" in script
    assert '"t.csv" using 1:2' in script and '"t.csv" using 1:3' in script


def test_write_table_with_plot(tmp_path):
    """A plot spec adds a .gp file next to the CSV."""
    written = write_table(
        tmp_path, "run", np.ones((2, 2)), ["t", "x"], PlotSpec("t", "x")
    )
    assert [p.name for p in written] == ["run.csv", "run.gp"]


def test_run_summary(tmp_path):
    """passed is the conjunction of all flags."""
    summary = RunSummary(command="toy hetero", values={"error": 1e-9})
    assert summary.passed
    summary.flags["matches_closed_form"] = False
    assert not summary.passed
    doc = json.loads(write_json(tmp_path / "s.json", summary).read_text())
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["flags"] == {"matches_closed_form": False}
