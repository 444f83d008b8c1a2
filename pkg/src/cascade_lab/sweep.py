"""Cartesian (delta, N) grids of cascade searches.

Cells are independent and deterministic; with more than one thread they are
fanned out to a process pool and collected in grid order.
"""

import itertools
import logging
from multiprocessing import Pool
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field, ValidationError

from cascade_lab.cascade import (
    CascadeReport,
    TimeLaw,
    search_cascade_orbit,
    time_law,
)
from cascade_lab.errors import CascadeLabError
from cascade_lab.params import CascadeParams, IntegratorConfig, ToyParams
from cascade_lab.settings import SCHEMA_VERSION, Settings

logger = logging.getLogger(__name__)


class SweepCell(BaseModel):
    n: int
    delta: float
    ok: bool = False
    total_time: Optional[float] = None
    transition_times: List[float] = Field(default_factory=list)
    h_drift: Optional[float] = None
    m_drift: Optional[float] = None
    error: Optional[str] = None
    failed_saddle: Optional[int] = None


class SweepResult(BaseModel):
    schema_version: str = SCHEMA_VERSION
    nu: float
    sigma: float
    cells: List[SweepCell]
    time_law_slope: Optional[float] = None
    time_law_spread: Optional[float] = None


Task = Tuple[int, float, float, float, dict, dict]


def _run_cell(task: Task) -> SweepCell:
    n, delta, sigma, nu, cascade_fields, integrator_fields = task
    logger.info(f"Sweep cell N={n} delta={delta:g}")
    try:
        params = CascadeParams(
            toy=ToyParams(N=n, delta=delta, sigma=sigma, nu=nu), **cascade_fields
        )
        cfg = IntegratorConfig(**integrator_fields)
        _, report = search_cascade_orbit(params, cfg)
    except (CascadeLabError, ValidationError) as e:
        logger.error(f"Sweep cell N={n} delta={delta:g} failed: {e}")
        return SweepCell(
            n=n,
            delta=delta,
            error=f"{type(e).__name__}: {e}",
            failed_saddle=getattr(e, "saddle", None),
        )
    return _cell_from_report(report)


def _cell_from_report(report: CascadeReport) -> SweepCell:
    return SweepCell(
        n=report.n,
        delta=report.delta,
        ok=report.ok,
        total_time=report.total_time,
        transition_times=report.transition_times,
        h_drift=report.h_drift,
        m_drift=report.m_drift,
    )


def sweep_tasks(
    settings: Settings,
    deltas: Optional[Sequence[float]] = None,
    ns: Optional[Sequence[int]] = None,
) -> List[Task]:
    grid = itertools.product(
        ns if ns is not None else settings.sweep.ns,
        deltas if deltas is not None else settings.sweep.deltas,
    )
    cascade_fields = settings.cascade.model_dump()
    integrator_fields = settings.integrator.model_dump()
    return [
        (
            int(n),
            float(delta),
            settings.toy.sigma,
            settings.sweep.nu,
            cascade_fields,
            integrator_fields,
        )
        for n, delta in grid
    ]


def run_sweep(
    settings: Settings,
    deltas: Optional[Sequence[float]] = None,
    ns: Optional[Sequence[int]] = None,
    threads: Optional[int] = None,
    with_time_law: bool = False,
) -> SweepResult:
    """Run every grid cell; failed cells are recorded, not raised."""
    tasks = sweep_tasks(settings, deltas, ns)
    workers = threads or settings.threads
    if workers > 1 and len(tasks) > 1:
        with Pool(min(workers, len(tasks))) as pool:
            cells = pool.map(_run_cell, tasks)
    else:
        cells = [_run_cell(task) for task in tasks]

    result = SweepResult(nu=settings.sweep.nu, sigma=settings.toy.sigma, cells=cells)
    if with_time_law:
        law = fit_time_law(cells)
        if law is not None:
            result.time_law_slope = law.slope
            result.time_law_spread = law.spread
    done = sum(cell.ok for cell in cells)
    logger.info(f"Sweep finished: {done}/{len(cells)} cells succeeded")
    return result


def fit_time_law(cells: Sequence[SweepCell]) -> Optional[TimeLaw]:
    finished = [
        (c.n, c.delta, float(c.total_time))
        for c in cells
        if c.ok and c.total_time is not None
    ]
    if len(finished) < 2:
        logger.warning("Fewer than two successful cells, no time law fitted")
        return None
    return time_law(finished)
