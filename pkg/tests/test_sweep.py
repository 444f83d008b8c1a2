"""
Tests for (delta, N) sweeps. The cascade search itself is replaced by a stub.
"""

import math

import pytest

from cascade_lab.cascade import CascadeReport, SaddleVerdict
from cascade_lab.errors import SearchFailed
from cascade_lab.settings import Settings
from cascade_lab.sweep import SweepCell, fit_time_law, run_sweep, sweep_tasks


def fake_search(params, cfg):
    toy = params.toy
    if toy.delta < 1e-3:
        raise SearchFailed(4)
    total = 2.0 * toy.N * math.log(1.0 / toy.delta)
    report = CascadeReport(
        n=toy.N,
        delta=toy.delta,
        sigma=toy.sigma,
        nu=toy.nu,
        total_time=total,
        success=[SaddleVerdict(saddle=3, success=True, off_corridor_max=0.0)],
        initial_lead=1.0,
        initial_rest=0.0,
        final_lead=1.0,
        final_rest=0.0,
    )
    return None, report


@pytest.fixture
def stub_search(monkeypatch):
    monkeypatch.setattr("cascade_lab.sweep.search_cascade_orbit", fake_search)


def test_tasks_follow_grid_order():
    """N varies slowest, delta fastest."""
    tasks = sweep_tasks(Settings(), deltas=[1e-2, 1e-3], ns=[5, 6])
    assert [(t[0], t[1]) for t in tasks] == [
        (5, 1e-2),
        (5, 1e-3),
        (6, 1e-2),
        (6, 1e-3),
    ]
    assert all(t[3] == Settings().sweep.nu for t in tasks)


def test_failed_cells_are_recorded(stub_search):
    """A failing cell keeps its error and saddle; the rest still run."""
    result = run_sweep(
        Settings(), deltas=[1e-2, 1e-3, 1e-4], ns=[6], threads=1, with_time_law=True
    )
    assert [c.ok for c in result.cells] == [True, True, False]
    assert result.cells[2].failed_saddle == 4
    assert result.cells[2].error.startswith("SearchFailed")
    assert result.time_law_slope == pytest.approx(2.0)


def test_invalid_cells_are_recorded(stub_search):
    """Parameters the validators reject become failed cells."""
    result = run_sweep(Settings(), deltas=[0.5], ns=[6], threads=1)
    assert not result.cells[0].ok
    assert result.cells[0].error.startswith("ValidationError")


def test_time_law_needs_two_successes():
    """One finished cell is not enough for a fit."""
    cells = [
        SweepCell(n=6, delta=1e-2, ok=True, total_time=50.0),
        SweepCell(n=6, delta=1e-3, error="SearchFailed: x"),
    ]
    assert fit_time_law(cells) is None
