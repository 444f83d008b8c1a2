"""Adaptive DOP853 integration with dense output and section events.

Complex states are integrated through a float64 view of the same buffer, so
the toy model and the Galerkin systems share one code path.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from cascade_lab.errors import (
    BudgetExceeded,
    InaccurateCrossing,
    NoCrossing,
    ParameterError,
    StepUnderflow,
    TangentialCrossing,
)
from cascade_lab.params import IntegratorConfig

logger = logging.getLogger(__name__)

VectorField = Callable[[float, np.ndarray], np.ndarray]

# Time step of the central difference that measures crossing speed
SPEED_STEP = 1e-6


class Direction(str, Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    EITHER = "either"

    @property
    def sign(self) -> int:
        return {"increasing": 1, "decreasing": -1, "either": 0}[self.value]


@dataclass(frozen=True)
class SectionEvent:
    """Level set ``coordinate(y) == level`` crossed in ``direction``.

    ``min_time`` keeps the event disarmed for that long after the start, so a
    section the orbit starts on or near is not reported again at once.
    """

    coordinate: Callable[[np.ndarray], float]
    level: float
    direction: Direction = Direction.EITHER
    min_time: float = 0.0
    name: str = "section"

    def __post_init__(self) -> None:
        if not np.isfinite(self.level):
            raise ParameterError(f"Section level must be finite, got {self.level}")

    def __call__(self, y: np.ndarray) -> float:
        return float(self.coordinate(y)) - self.level


class _Layout(NamedTuple):
    is_complex: bool
    size: int


def _flatten(y0: Any) -> Tuple[np.ndarray, _Layout]:
    y = np.asarray(y0)
    if np.iscomplexobj(y):
        z = np.ascontiguousarray(y, dtype=np.complex128).reshape(-1)
        return z.view(np.float64).copy(), _Layout(True, z.size)
    flat = np.ascontiguousarray(y, dtype=np.float64).reshape(-1)
    return flat.copy(), _Layout(False, flat.size)


def _restore(y: np.ndarray, layout: _Layout) -> np.ndarray:
    """Map solver output of shape (2n,) or (2n, m) back to states."""
    if y.ndim == 2:
        y = y.T
    y = np.ascontiguousarray(y, dtype=np.float64)
    if layout.is_complex:
        return y.view(np.complex128).copy()
    return y.copy()


def _real_field(rhs: VectorField, layout: _Layout) -> VectorField:
    if not layout.is_complex:
        return lambda t, y: np.asarray(rhs(t, y), dtype=np.float64)

    def field(t: float, y: np.ndarray) -> np.ndarray:
        z = np.ascontiguousarray(y).view(np.complex128)
        rate = np.ascontiguousarray(rhs(t, z), dtype=np.complex128)
        return rate.view(np.float64)

    return field


@dataclass
class Trajectory:
    """Dense solution between ``t0`` and ``t1``."""

    t0: float
    t1: float
    times: np.ndarray
    states: np.ndarray
    solution: Any
    layout: _Layout

    def __call__(self, t: Any) -> np.ndarray:
        return _restore(np.asarray(self.solution(t)), self.layout)

    def sample(self, count: int) -> Tuple[np.ndarray, np.ndarray]:
        """States on ``count`` uniformly spaced times covering the span."""
        grid = np.linspace(self.t0, self.t1, count)
        return grid, self(grid)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


class _Spliced:
    """Dense output of a warm-up run followed by the monitored run."""

    def __init__(self, warm: Any, main: Any, t_split: float, sign: float):
        self.warm = warm
        self.main = main
        self.t_split = t_split
        self.sign = sign

    def __call__(self, t: Any) -> np.ndarray:
        times = np.asarray(t, dtype=np.float64)
        early = self.sign * (times - self.t_split) < 0
        if times.ndim == 0:
            return np.asarray((self.warm if early else self.main)(times))
        out = np.asarray(self.main(times))
        if early.any():
            out[:, early] = self.warm(times[early])
        return out


class SectionHit(NamedTuple):
    state: np.ndarray
    time: float
    stop: Optional[str] = None
    trajectory: Optional[Trajectory] = None


def _check_status(sol: Any) -> None:
    if sol.status == -1:
        raise StepUnderflow(f"Integration failed at t={sol.t[-1]:.6g}: {sol.message}")


def _solve(
    field: VectorField,
    span: Tuple[float, float],
    y: np.ndarray,
    cfg: IntegratorConfig,
    events: Optional[List[Callable[..., float]]] = None,
) -> Any:
    return solve_ivp(
        field,
        span,
        y,
        method="DOP853",
        dense_output=True,
        events=events,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.max_step,
    )


def integrate(
    rhs: VectorField, y0: Any, t0: float, t1: float, cfg: IntegratorConfig
) -> Trajectory:
    if t1 == t0:
        raise ParameterError("Integration span is empty")
    if abs(t1 - t0) > cfg.max_time:
        raise BudgetExceeded(
            f"Span {abs(t1 - t0):.6g} exceeds max_time {cfg.max_time:.6g}"
        )
    y, layout = _flatten(y0)
    sol = _solve(_real_field(rhs, layout), (t0, t1), y, cfg)
    _check_status(sol)
    return Trajectory(
        t0=t0,
        t1=t1,
        times=sol.t,
        states=_restore(sol.y, layout),
        solution=sol.sol,
        layout=layout,
    )


def crossing_speed(
    rhs: VectorField, event: SectionEvent, state: np.ndarray, t: float
) -> float:
    """d/dt of the monitored scalar, by a central difference along the flow."""
    rate = np.asarray(rhs(t, state))
    ahead = event(state + SPEED_STEP * rate)
    behind = event(state - SPEED_STEP * rate)
    return (ahead - behind) / (2.0 * SPEED_STEP)


def _scipy_event(event: SectionEvent, layout: _Layout) -> Callable[..., float]:
    def g(t: float, y: np.ndarray) -> float:
        return event(_restore(y, layout))

    g.terminal = True  # type: ignore[attr-defined]
    g.direction = event.direction.sign  # type: ignore[attr-defined]
    return g


def _kept(
    sol: Any,
    warm: Any,
    t0: float,
    t_hit: float,
    sign: float,
    layout: _Layout,
) -> Trajectory:
    """Trajectory from ``t0`` to the hit, warm-up segment included."""
    if warm is None:
        times, states, solution = sol.t, sol.y, sol.sol
    else:
        times = np.concatenate([warm.t, sol.t[1:]])
        states = np.hstack([warm.y, sol.y[:, 1:]])
        solution = _Spliced(warm.sol, sol.sol, float(warm.t[-1]), sign)
    return Trajectory(
        t0=t0,
        t1=t_hit,
        times=times,
        states=_restore(states, layout),
        solution=solution,
        layout=layout,
    )


def integrate_to_section(
    rhs: VectorField,
    y0: Any,
    event: SectionEvent,
    cfg: IntegratorConfig,
    *,
    t0: float = 0.0,
    horizon: Optional[float] = None,
    stops: Sequence[SectionEvent] = (),
    keep_trajectory: bool = False,
) -> SectionHit:
    """Flow ``y0`` until ``event`` (or one of ``stops``) is crossed.

    Integrates backwards in time when ``horizon`` is negative. The hit names
    the stop event that ended the flow, or ``None`` for the main section.
    """
    span = cfg.max_time if horizon is None else horizon
    if abs(span) > cfg.max_time:
        raise BudgetExceeded(
            f"Horizon {abs(span):.6g} exceeds max_time {cfg.max_time:.6g}"
        )
    state0 = np.asarray(y0)
    if event.direction is Direction.EITHER and abs(event(state0)) <= cfg.event_tol:
        return SectionHit(state=state0, time=t0)

    y, layout = _flatten(state0)
    field = _real_field(rhs, layout)
    t_start = t0
    sign = 1.0 if span > 0 else -1.0
    warm: Any = None
    if event.min_time > 0:
        if event.min_time >= abs(span):
            raise NoCrossing(f"{event.name}: min_time exceeds the horizon")
        warm = _solve(field, (t0, t0 + sign * event.min_time), y, cfg)
        _check_status(warm)
        y, t_start = warm.y[:, -1], float(warm.t[-1])

    monitored = [event, *stops]
    sol = _solve(
        field,
        (t_start, t0 + span),
        y,
        cfg,
        events=[_scipy_event(e, layout) for e in monitored],
    )
    _check_status(sol)
    if sol.status == 0:
        raise NoCrossing(f"{event.name} not reached within {abs(span):.6g} time units")

    fired = [
        (float(sol.t_events[i][0]), i)
        for i in range(len(monitored))
        if len(sol.t_events[i])
    ]
    t_hit, index = min(fired, key=lambda item: sign * item[0])
    state = _restore(sol.y_events[index][0], layout)
    trajectory = None
    if keep_trajectory:
        trajectory = _kept(sol, warm, t0, t_hit, sign, layout)

    if index > 0:
        logger.debug(f"Stop {monitored[index].name} fired at t={t_hit:.6g}")
        return SectionHit(state, t_hit, monitored[index].name, trajectory)

    residual = abs(event(state))
    if residual > cfg.event_tol:
        raise InaccurateCrossing(
            f"{event.name}: residual {residual:.3g} exceeds {cfg.event_tol:.3g} "
            f"at t={t_hit:.6g}"
        )
    speed = crossing_speed(rhs, event, state, t_hit)
    if abs(speed) < cfg.tangency_tol:
        raise TangentialCrossing(
            f"{event.name} crossed with speed {speed:.3g} at t={t_hit:.6g}"
        )
    return SectionHit(state, t_hit, None, trajectory)
