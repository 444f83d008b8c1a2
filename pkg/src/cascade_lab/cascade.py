"""Saddle-to-saddle cascades of the toy model.

The search starts next to T_3, on the incoming heteroclinic from T_2, and
shoots one parameter per saddle so that the orbit leaves every saddle ``j``
through Sigma_j^out while the mode behind it stays small. At saddle 3 the
parameter is the initial ``p1``; at later saddles it is the amplitude of the
seed placed at time zero in mode ``j+1``, whose image on Sigma_j^in points
along the unstable direction.

Every evaluation integrates the whole chain from time zero, leg by leg, with
the same calls the final report uses, so the reported orbit is exactly the
one accepted by the search.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import (
    Callable,
    Dict,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator
from scipy.optimize import brentq, minimize_scalar

from cascade_lab.errors import (
    FrameError,
    IntegrationError,
    NoCrossing,
    NoSolution,
    ParameterError,
    SearchFailed,
)
from cascade_lab.frames import (
    NU02,
    SaddleFrame,
    cancellation_target,
    coordinate_event,
    entry_section,
    exit_section,
    from_saddle_frame,
    hyperbolic_coordinates,
    transit_time,
)
from cascade_lab.integrator import (
    Direction,
    Trajectory,
    integrate,
    integrate_to_section,
)
from cascade_lab.params import CascadeParams, IntegratorConfig
from cascade_lab.settings import SCHEMA_VERSION
from cascade_lab.toy import (
    ToyState,
    saddle_index,
    toy_field,
    toy_hamiltonian,
    toy_mass,
)

logger = logging.getLogger(__name__)

FIRST_SADDLE = 3
# Bracket growth steps tried before a saddle is given up
EXPANSIONS = 3
# |b_j| below which a crossing of Sigma_j^in is not counted as a transition
DOMINANCE = 0.5


class ShootingRecord(BaseModel):
    saddle: int
    parameter: float = Field(..., description="p1(0) at saddle 3, seed size later")
    entry_p1: float
    exit_p1: float
    iterations: int


class ModeRow(BaseModel):
    saddle: int
    start: float
    end: float
    max_modes: List[float]


class SaddleVerdict(BaseModel):
    saddle: int
    success: bool
    off_corridor_max: float


class CascadeReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    n: int
    delta: float
    sigma: float
    nu: float
    transition_times: List[float] = Field(default_factory=list)
    mode_table: List[ModeRow] = Field(default_factory=list)
    h_drift: float = 0.0
    m_drift: float = 0.0
    total_time: float = 0.0
    success: List[SaddleVerdict] = Field(default_factory=list)
    monotone: bool = True
    first_saddle: int = FIRST_SADDLE
    last_saddle: int = Field(0, description="Target saddle, N-1 when left at 0")
    initial_lead: float = Field(0.0, description="|b_first| at the start")
    initial_rest: float = Field(1.0, description="Largest other |b_k| at the start")
    final_lead: float = Field(0.0, description="|b_last| at T0")
    final_rest: float = Field(1.0, description="Largest other |b_k| at T0")
    shooting: List[ShootingRecord] = Field(default_factory=list)

    @model_validator(mode="after")
    def default_last_saddle(self) -> "CascadeReport":
        if self.last_saddle == 0:
            self.last_saddle = self.n - 1
        if not 2 <= self.first_saddle <= self.last_saddle <= self.n - 1:
            raise ValueError(
                f"Saddles {self.first_saddle}..{self.last_saddle} "
                f"do not fit N={self.n}"
            )
        return self

    @field_validator("transition_times")
    @classmethod
    def validate_increasing(cls, v: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("transition_times must be strictly increasing")
        return v

    @model_validator(mode="after")
    def validate_drifts(self) -> "CascadeReport":
        if not (math.isfinite(self.h_drift) and math.isfinite(self.m_drift)):
            raise ValueError("Conservation drifts must be finite")
        return self

    @property
    def threshold(self) -> float:
        return self.delta**self.nu

    @property
    def start_ok(self) -> bool:
        """``|b_first(0)| > 1 - delta^nu`` and every other mode below delta^nu."""
        return (
            self.initial_lead > 1.0 - self.threshold
            and self.initial_rest < self.threshold
        )

    @property
    def end_ok(self) -> bool:
        """``|b_last(T0)| > 1 - delta^nu`` and every other mode below delta^nu."""
        return (
            self.final_lead > 1.0 - self.threshold
            and self.final_rest < self.threshold
        )

    @property
    def failed_saddle(self) -> Optional[int]:
        """First saddle whose criterion fails, None when the orbit passes."""
        if not self.start_ok:
            return self.first_saddle
        for verdict in self.success:
            if not verdict.success:
                return verdict.saddle
        if not (self.monotone and self.end_ok):
            return self.last_saddle
        return None

    @property
    def ok(self) -> bool:
        return self.failed_saddle is None


@dataclass
class Path:
    """Dense orbit stitched from consecutive integration legs."""

    legs: List[Trajectory] = field(default_factory=list)

    @property
    def t0(self) -> float:
        return self.legs[0].t0

    @property
    def t1(self) -> float:
        return self.legs[-1].t1

    def __call__(self, t: Union[float, np.ndarray]) -> np.ndarray:
        times = np.atleast_1d(np.asarray(t, dtype=np.float64))
        ends = np.array([leg.t1 for leg in self.legs])
        which = np.minimum(np.searchsorted(ends, times), len(self.legs) - 1)
        out = np.empty((times.size, self.legs[0].states.shape[-1]), np.complex128)
        for k in np.unique(which):
            mask = which == k
            out[mask] = self.legs[int(k)](times[mask]).reshape(mask.sum(), -1)
        return out[0] if np.ndim(t) == 0 else out

    def sample(self, count: int) -> Tuple[np.ndarray, np.ndarray]:
        grid = np.linspace(self.t0, self.t1, count)
        return grid, self(grid)


DenseOrbit = Union[Trajectory, Path]


class _Outcome(NamedTuple):
    success: bool
    p1: float
    time: float
    state: np.ndarray
    leg: Optional[Trajectory]


class _Chain(NamedTuple):
    state: np.ndarray
    time: float
    entries: List[float]
    legs: List[Trajectory]
    exits: List[_Outcome]


class CascadeSearch:
    """Saddle-by-saddle shooting for one parameter set.

    Each saddle is shot on one scalar of the t = 0 state (``p1`` at saddle 3,
    the size of a mode seed after it) rather than on the entry pair
    ``(p1, p2)`` at Sigma_j^in. The seed direction is aimed so the entry
    ``p2`` lands on :func:`cancellation_target`. DESIGN.md lists this under
    its deviations.
    """

    def __init__(self, params: CascadeParams, cfg: IntegratorConfig):
        self.params = params
        self.cfg = cfg
        self.n = params.toy.N
        self.sigma = params.toy.sigma
        self.horizon = min(params.per_saddle_budget, cfg.max_time)
        self.records: List[ShootingRecord] = []

    def initial_state(
        self, offset: float, p1: float, seeds: Dict[int, complex]
    ) -> np.ndarray:
        """Point near T_3 on the incoming heteroclinic, with mode seeds.

        ``seeds`` maps 0-based mode indices (elliptic at saddle 3) to
        amplitudes.
        """
        c = np.zeros(self.n, dtype=np.complex128)
        for k, z in seeds.items():
            c[k] = z
        frame = SaddleFrame(
            FIRST_SADDLE,
            self.n,
            p1=p1,
            q1=offset,
            p2=self.params.first_p2,
            q2=0.0,
            c=c,
        )
        return from_saddle_frame(frame)

    def _passage(
        self, state: np.ndarray, t: float, j: int, keep: bool = False
    ) -> _Outcome:
        """Flow inside saddle ``j`` until Sigma_j^out or ``|p1| = sigma``."""
        stops = (
            coordinate_event(j, "p1", self.sigma, Direction.INCREASING, "back+"),
            coordinate_event(j, "p1", -self.sigma, Direction.DECREASING, "back-"),
        )
        hit = integrate_to_section(
            toy_field,
            state,
            exit_section(j, self.sigma),
            self.cfg,
            t0=t,
            horizon=self.horizon,
            stops=stops,
            keep_trajectory=keep,
        )
        p1 = float(hyperbolic_coordinates(hit.state, j)[0])
        return _Outcome(hit.stop is None, p1, hit.time, hit.state, hit.trajectory)

    def _transfer(
        self, exit: _Outcome, j: int, keep: bool = False
    ) -> Tuple[np.ndarray, float, Optional[Trajectory]]:
        hit = integrate_to_section(
            toy_field,
            exit.state,
            entry_section(j + 1, self.sigma),
            self.cfg,
            t0=exit.time,
            horizon=self.horizon,
            keep_trajectory=keep,
        )
        return hit.state, hit.time, hit.trajectory

    def chain(self, b0: np.ndarray, upto: int, keep: bool = False) -> _Chain:
        """Follow ``b0`` through saddles ``3..upto-1`` onto Sigma_upto^in."""
        state, t = b0, 0.0
        entries: List[float] = []
        legs: List[Trajectory] = []
        exits: List[_Outcome] = []
        for j in range(FIRST_SADDLE, upto):
            try:
                out = self._passage(state, t, j, keep)
                if not out.success:
                    raise SearchFailed(j, f"orbit turned back at saddle {j}")
                state, t, leg = self._transfer(out, j, keep)
            except (IntegrationError, FrameError) as e:
                raise SearchFailed(j, f"saddle {j}: {e}") from e
            exits.append(out)
            entries.append(t)
            if keep:
                legs += [x for x in (out.leg, leg) if x is not None]
        return _Chain(state, t, entries, legs, exits)

    def _bisect(
        self,
        saddle: int,
        evaluate: Callable[[float], _Outcome],
        lo: float,
        hi: float,
        grow: Callable[[float, float, int], Tuple[float, float]],
    ) -> Tuple[float, _Outcome, int]:
        """Find the parameter whose exit ``p1`` vanishes.

        ``evaluate`` must be increasing in its argument through the exit
        ``p1``; ``grow`` widens the bracket when it does not straddle zero.
        """
        f_lo, f_hi = evaluate(lo), evaluate(hi)
        for step in range(EXPANSIONS):
            if f_lo.p1 < 0 < f_hi.p1:
                break
            new_lo, new_hi = grow(lo, hi, step)
            if f_lo.p1 >= 0:
                lo, f_lo = new_lo, evaluate(new_lo)
            if f_hi.p1 <= 0:
                hi, f_hi = new_hi, evaluate(new_hi)
        if not f_lo.p1 < 0 < f_hi.p1:
            raise SearchFailed(
                saddle,
                f"exit p1 does not change sign on [{lo:.4g}, {hi:.4g}] "
                f"at saddle {saddle}",
            )
        best: Optional[Tuple[float, _Outcome]] = None
        for x, f in ((lo, f_lo), (hi, f_hi)):
            if f.success and (best is None or abs(f.p1) < abs(best[1].p1)):
                best = (x, f)
        steps = 0
        for steps in range(1, self.params.search_depth + 1):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            f_mid = evaluate(mid)
            if f_mid.success and (best is None or abs(f_mid.p1) < abs(best[1].p1)):
                best = (mid, f_mid)
            if f_mid.p1 < 0:
                lo = mid
            else:
                hi = mid
        tolerance = self.params.shoot_tolerance
        if best is None or abs(best[1].p1) > tolerance:
            missed = "no exit" if best is None else f"|p1| = {abs(best[1].p1):.3g}"
            raise SearchFailed(
                saddle,
                f"saddle {saddle}: best exit {missed} after {steps} steps, "
                f"tolerance {tolerance:.3g}",
            )
        return best[0], best[1], steps

    def _guarded(self, saddle: int, run: Callable[[], _Outcome]) -> _Outcome:
        try:
            return run()
        except SearchFailed:
            raise
        except (IntegrationError, FrameError) as e:
            raise SearchFailed(saddle, f"saddle {saddle}: {e}") from e

    def shoot_first(self, offset: float) -> float:
        """Initial ``p1`` that cancels the resonant push through saddle 3."""
        x = self.params.first_p2
        pred = -2.0 * NU02 * offset * x * x * transit_time(x, self.sigma)

        def evaluate(p1: float) -> _Outcome:
            b0 = self.initial_state(offset, p1, {})
            return self._guarded(FIRST_SADDLE, lambda: self._passage(b0, 0.0, 3))

        def grow(lo: float, hi: float, step: int) -> Tuple[float, float]:
            return 4.0 * lo, 0.0 if step else hi / 4.0

        p1, out, its = self._bisect(
            FIRST_SADDLE, evaluate, 4.0 * pred, pred / 4.0, grow
        )
        self.records.append(
            ShootingRecord(
                saddle=FIRST_SADDLE,
                parameter=p1,
                entry_p1=p1,
                exit_p1=out.p1,
                iterations=its,
            )
        )
        logger.info(f"Saddle 3: p1(0)={p1:.6e}, exit p1={out.p1:.3e} ({its} steps)")
        return p1

    def _entry(self, b0: np.ndarray, j: int) -> Tuple[np.ndarray, float]:
        link = self.chain(b0, j)
        return link.state, link.time

    def shoot_seed(
        self, j: int, offset: float, p1: float, seeds: Dict[int, complex]
    ) -> complex:
        """Seed of mode ``j+1`` whose image on Sigma_j^in is ``(x, 0)``."""
        base = self.initial_state(offset, p1, seeds)
        entry, _ = self._entry(base, j)
        entry_p1 = float(hyperbolic_coordinates(entry, j)[0])
        try:
            x_star = cancellation_target(-entry_p1, self.sigma)
        except NoSolution as e:
            raise SearchFailed(j, f"saddle {j}: entry p1 {entry_p1:.3g}: {e}") from e

        jac = np.empty((2, 2))
        for col, unit in enumerate((1.0, 1j)):
            nudged = self.initial_state(offset, p1, {**seeds, j: x_star * unit})
            moved, _ = self._entry(nudged, j)
            jac[:, col] = hyperbolic_coordinates(moved, j)[2:4] / x_star
        try:
            w = np.linalg.solve(jac, np.array([1.0, 0.0]))
        except np.linalg.LinAlgError as e:
            raise SearchFailed(j, f"saddle {j}: singular seed map") from e
        direction = complex(w[0], w[1])

        def evaluate(s: float) -> _Outcome:
            b0 = self.initial_state(offset, p1, {**seeds, j: s * direction})

            def run() -> _Outcome:
                state, t = self._entry(b0, j)
                return self._passage(state, t, j)

            return self._guarded(j, run)

        def grow(lo: float, hi: float, step: int) -> Tuple[float, float]:
            return lo / 4.0, min(4.0 * hi, 0.5 * self.sigma)

        s, out, its = self._bisect(j, evaluate, x_star / 4.0, 4.0 * x_star, grow)
        self.records.append(
            ShootingRecord(
                saddle=j,
                parameter=s,
                entry_p1=entry_p1,
                exit_p1=out.p1,
                iterations=its,
            )
        )
        logger.info(
            f"Saddle {j}: seed {s:.6e} (x*={x_star:.3e}), exit p1={out.p1:.3e} "
            f"({its} steps)"
        )
        return s * direction

    def final_window(self, entry: np.ndarray, t: float) -> Trajectory:
        """Flow inside the last saddle until the orbit turns away."""
        j = self.n - 1
        leave = (
            coordinate_event(j, "p1", self.sigma, Direction.INCREASING, "leave+"),
            coordinate_event(j, "p1", -self.sigma, Direction.DECREASING, "leave-"),
        )
        try:
            hit = integrate_to_section(
                toy_field,
                entry,
                leave[0],
                self.cfg,
                t0=t,
                horizon=self.horizon,
                stops=leave[1:],
                keep_trajectory=True,
            )
        except NoCrossing:
            return integrate(toy_field, entry, t, t + self.horizon, self.cfg)
        assert hit.trajectory is not None
        return hit.trajectory

    def run(self, offset: float) -> Tuple[np.ndarray, Path, List[float]]:
        self.records = []
        p1 = self.shoot_first(offset)
        seeds: Dict[int, complex] = {}
        for j in range(FIRST_SADDLE + 1, self.n - 1):
            seeds[j] = self.shoot_seed(j, offset, p1, seeds)
        b0 = self.initial_state(offset, p1, seeds)
        link = self.chain(b0, self.n - 1, keep=True)
        window = self.final_window(link.state, link.time)
        return b0, Path(link.legs + [window]), link.entries


def _peak_time(orbit: DenseOrbit, mode: int, t_lo: float, t_hi: float) -> float:
    """Time of the largest ``|b_mode|`` on ``[t_lo, t_hi]`` (1-based mode)."""
    grid = np.linspace(t_lo, t_hi, 2049)
    values = np.abs(np.asarray(orbit(grid)).reshape(grid.size, -1)[:, mode - 1])
    k = int(np.argmax(values))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    if b <= a:
        return float(grid[k])
    res = minimize_scalar(
        lambda s: -abs(np.asarray(orbit(s)).reshape(-1)[mode - 1]),
        bounds=(a, b),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x) if -res.fun >= values[k] else float(grid[k])


class CascadeRun(NamedTuple):
    initial: ToyState
    report: CascadeReport
    orbit: Path


def run_cascade(
    params: CascadeParams, cfg: Optional[IntegratorConfig] = None
) -> CascadeRun:
    """Find an orbit that travels from T_3 to T_{N-1}.

    On failure the start offset is halved once before giving up. The orbit
    ends at the time T0 where |b_{N-1}| peaks; an orbit that misses any end
    point or corridor criterion raises :class:`SearchFailed` carrying its
    report.
    """
    cfg = cfg or IntegratorConfig()
    search = CascadeSearch(params, cfg)
    offsets = [params.offset]
    if params.retry:
        offsets.append(params.offset / 2.0)
    failure: Optional[SearchFailed] = None
    for offset in offsets:
        try:
            return _attempt(search, params, offset)
        except SearchFailed as e:
            logger.warning(f"Cascade search with offset {offset:.4g} failed: {e}")
            failure = e
    assert failure is not None
    raise failure


def _attempt(
    search: CascadeSearch, params: CascadeParams, offset: float
) -> CascadeRun:
    b0, path, entries = search.run(offset)
    last = params.toy.N - 1
    window = path.legs[-1]
    t_peak = _peak_time(path, last, window.t0, window.t1)
    final = Path(path.legs[:-1] + [_truncate(window, t_peak)])
    report = cascade_diagnostics(
        final, params, transition_times=entries, shooting=list(search.records)
    )
    logger.info(
        f"Cascade N={params.toy.N} delta={params.toy.delta:g}: T0={t_peak:.4f}, "
        f"ok={report.ok}"
    )
    saddle = report.failed_saddle
    if saddle is not None:
        raise SearchFailed(
            saddle,
            f"orbit misses the corridor at saddle {saddle}: "
            f"|b_{report.first_saddle}(0)|={report.initial_lead:.4g}, "
            f"others {report.initial_rest:.3g}; "
            f"|b_{report.last_saddle}(T0)|={report.final_lead:.4g}, "
            f"others {report.final_rest:.3g}",
            report=report,
        )
    return CascadeRun(ToyState(modes=b0, time=0.0), report, final)


def search_cascade_orbit(
    params: CascadeParams, cfg: Optional[IntegratorConfig] = None
) -> Tuple[ToyState, CascadeReport]:
    run = run_cascade(params, cfg)
    return run.initial, run.report


def _truncate(leg: Trajectory, t1: float) -> Trajectory:
    keep = leg.times <= t1
    return Trajectory(
        t0=leg.t0,
        t1=t1,
        times=np.append(leg.times[keep], t1),
        states=np.vstack([leg.states[keep], leg(t1).reshape(1, -1)]),
        solution=leg.solution,
        layout=leg.layout,
    )


def _detect_transitions(
    orbit: DenseOrbit, times: np.ndarray, states: np.ndarray, sigma: float
) -> List[float]:
    """Crossings of Sigma_j^in, for consecutive j after the starting saddle."""
    n = states.shape[-1]
    found: List[float] = []
    start = 0
    j = int(saddle_index(states[0])) + 1
    while j <= n - 1:
        q1 = hyperbolic_coordinates(states, j)[:, 1]
        lead = np.abs(states[:, j - 1])
        cross = np.nonzero(
            (q1[:-1] > sigma) & (q1[1:] <= sigma) & (lead[1:] >= DOMINANCE)
        )[0]
        cross = cross[cross >= start]
        if not cross.size:
            break
        k = int(cross[0])

        def level(t: float, j: int = j) -> float:
            b = np.asarray(orbit(t)).reshape(-1)
            return float(hyperbolic_coordinates(b, j)[1]) - sigma

        a, b = float(times[k]), float(times[k + 1])
        t_cross = brentq(level, a, b, xtol=1e-13) if level(a) * level(b) < 0 else b
        found.append(float(t_cross))
        start = k + 1
        j += 1
    return found


def cascade_diagnostics(
    trajectory: DenseOrbit,
    params: CascadeParams,
    transition_times: Optional[Sequence[float]] = None,
    samples: int = 4096,
    shooting: Sequence[ShootingRecord] = (),
    first_saddle: int = FIRST_SADDLE,
    last_saddle: Optional[int] = None,
) -> CascadeReport:
    """Summarise a dense orbit: transitions, per-interval mode maxima and
    conservation.

    Without ``transition_times`` the crossings of Sigma_j^in are detected on
    the sampled orbit. The end points are judged against ``first_saddle``
    and ``last_saddle`` (N-1 by default).
    """
    toy = params.toy
    times, states = trajectory.sample(samples)
    states = np.asarray(states).reshape(times.size, -1)
    n = states.shape[-1]
    if n != toy.N:
        raise ParameterError(f"Trajectory has {n} modes, parameters say {toy.N}")
    last = n - 1 if last_saddle is None else last_saddle
    if not 2 <= first_saddle <= last <= n - 1:
        raise ParameterError(f"Saddles {first_saddle}..{last} do not fit N={n}")
    if transition_times is None:
        transition_times = _detect_transitions(trajectory, times, states, toy.sigma)
    transitions = [float(t) for t in transition_times]

    mass = np.asarray(toy_mass(states))
    energy = np.asarray(toy_hamiltonian(states))
    m_drift = float(np.max(np.abs(mass - mass[0])) / max(abs(mass[0]), 1e-300))
    h_scale = abs(energy[0]) if abs(energy[0]) > 0 else 1.0
    h_drift = float(np.max(np.abs(energy - energy[0])) / h_scale)

    amplitude = np.abs(states)
    dominant = np.asarray(saddle_index(states))
    steps = np.diff(dominant)
    monotone = bool(np.all((steps == 0) | (steps == 1)))

    first = int(dominant[0])
    bounds = [float(times[0])] + transitions + [float(times[-1])]
    rows: List[ModeRow] = []
    verdicts: List[SaddleVerdict] = []
    for i, (start, end) in enumerate(zip(bounds, bounds[1:])):
        j = first + i
        mask = (times >= start) & (times <= end)
        if not mask.any():
            mask[np.argmin(np.abs(times - start))] = True
        peaks = amplitude[mask].max(axis=0)
        rows.append(
            ModeRow(saddle=j, start=start, end=end, max_modes=peaks.tolist())
        )
        off = [k for k in range(n) if abs(k - (j - 1)) > 1]
        off_max = float(peaks[off].max()) if off else 0.0
        verdicts.append(
            SaddleVerdict(
                saddle=j, success=off_max < toy.threshold, off_corridor_max=off_max
            )
        )

    return CascadeReport(
        n=toy.N,
        delta=toy.delta,
        sigma=toy.sigma,
        nu=toy.nu,
        transition_times=transitions,
        mode_table=rows,
        h_drift=h_drift,
        m_drift=m_drift,
        total_time=float(times[-1] - times[0]),
        success=verdicts,
        monotone=monotone,
        first_saddle=first_saddle,
        last_saddle=last,
        initial_lead=float(amplitude[0, first_saddle - 1]),
        initial_rest=_largest_other(amplitude[0], first_saddle),
        final_lead=float(amplitude[-1, last - 1]),
        final_rest=_largest_other(amplitude[-1], last),
        shooting=list(shooting),
    )


def _largest_other(amplitude: np.ndarray, saddle: int) -> float:
    return float(np.delete(amplitude, saddle - 1).max())


def trajectory_table(trajectory: DenseOrbit, samples: int = 2048) -> np.ndarray:
    """Columns ``t, |b_1|, ..., |b_N|, h, M`` on a uniform grid."""
    times, states = trajectory.sample(samples)
    states = np.asarray(states).reshape(times.size, -1)
    return np.column_stack(
        [
            times,
            np.abs(states),
            np.asarray(toy_hamiltonian(states)),
            np.asarray(toy_mass(states)),
        ]
    )


class TimeLaw(NamedTuple):
    slope: float
    intercept: float
    ratios: List[float]
    spread: float


def time_law(runs: Sequence[Tuple[int, float, float]]) -> TimeLaw:
    """Fit ``T0`` against ``N ln(1/delta)`` over ``(N, delta, T0)`` runs."""
    if len(runs) < 2:
        raise ParameterError("Need at least two cascades to fit a time law")
    scale = np.array([n * math.log(1.0 / delta) for n, delta, _ in runs])
    total = np.array([t for _, _, t in runs])
    slope, intercept = np.polyfit(scale, total, 1)
    ratios = (total / scale).tolist()
    return TimeLaw(
        float(slope), float(intercept), ratios, float(max(ratios) / min(ratios))
    )

