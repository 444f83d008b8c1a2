"""Fourier-side cubic systems on finite supports.

The full flow is ``a_n' = i(|n|^2 a_n + sum_{n1-n2+n3=n} a_{n1} conj(a_{n2}) a_{n3})``.
Keeping only the resonant triples gives the truncated flow, and on a set
Lambda with its family links the gauged version reduces to the family form
used by :func:`resonant_rhs`.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import (
    Dict,
    Iterable,
    List,
    Literal,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np
from pydantic import BaseModel

from cascade_lab.errors import OutOfWindow, ParameterError, UnlinkedPoint
from cascade_lab.integrator import Trajectory, VectorField, integrate
from cascade_lab.lattice import LambdaSet, Point, convolution_closure
from cascade_lab.params import IntegratorConfig, LiftConfig
from cascade_lab.settings import SCHEMA_VERSION
from cascade_lab.toy import toy_field

logger = logging.getLogger(__name__)


class ModeRecord(BaseModel):
    n: Tuple[int, int]
    re: float
    im: float


class StateDocument(BaseModel):
    schema_version: str = SCHEMA_VERSION
    time: float
    modes: List[ModeRecord]


@dataclass(frozen=True)
class GalerkinState:
    """Amplitudes on a finite support of Z^2."""

    support: Tuple[Point, ...]
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        support = tuple((int(x), int(y)) for x, y in self.support)
        if len(set(support)) != len(support):
            raise ParameterError("Support points must be distinct")
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != len(support):
            raise ParameterError(
                f"{amps.size} amplitudes for a support of {len(support)} points"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_mapping(
        cls, values: Dict[Point, complex], time: float = 0.0
    ) -> "GalerkinState":
        support = tuple(sorted(values))
        return cls(support, np.array([values[p] for p in support]), time)

    @classmethod
    def zeros(cls, support: Iterable[Point], time: float = 0.0) -> "GalerkinState":
        pts = tuple(support)
        return cls(pts, np.zeros(len(pts), dtype=np.complex128), time)

    def as_dict(self) -> Dict[Point, complex]:
        return {p: complex(a) for p, a in zip(self.support, self.amplitudes)}

    def on(self, support: Sequence[Point]) -> np.ndarray:
        """Amplitudes on another support, zero where this state has none."""
        values = self.as_dict()
        return np.array([values.get(p, 0j) for p in support], dtype=np.complex128)

    def to_json(self) -> str:
        doc = StateDocument(
            time=self.time,
            modes=[
                ModeRecord(n=p, re=float(a.real), im=float(a.imag))
                for p, a in zip(self.support, self.amplitudes)
            ],
        )
        return doc.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, text: str) -> "GalerkinState":
        doc = StateDocument.model_validate_json(text)
        return cls(
            tuple(m.n for m in doc.modes),
            np.array([complex(m.re, m.im) for m in doc.modes]),
            doc.time,
        )


def _norm2(p: Point) -> int:
    return p[0] * p[0] + p[1] * p[1]


def _frequencies(support: Sequence[Point]) -> np.ndarray:
    return np.array([_norm2(p) for p in support], dtype=np.float64)


class Partner(NamedTuple):
    n1: Point
    n2: Point
    n3: Point
    nontrivial: bool


def resonance_partners(n: Point, support: Iterable[Point]) -> List[Partner]:
    """Triples of ``support`` feeding ``n`` resonantly.

    ``nontrivial`` marks membership of the restricted set with
    ``n1 != n`` and ``n3 != n``.
    """
    pts = sorted(set(support))
    members = set(pts)
    found = []
    for n1 in pts:
        for n3 in pts:
            n2 = (n1[0] + n3[0] - n[0], n1[1] + n3[1] - n[1])
            if n2 not in members:
                continue
            if _norm2(n1) - _norm2(n2) + _norm2(n3) != _norm2(n):
                continue
            found.append(Partner(n1, n2, n3, n1 != n and n3 != n))
    return found


class ConvolutionTable(NamedTuple):
    i1: np.ndarray
    i2: np.ndarray
    i3: np.ndarray
    out: np.ndarray


@lru_cache(maxsize=64)
def _convolution_table(
    inputs: Tuple[Point, ...], outputs: Tuple[Point, ...], resonant_only: bool
) -> ConvolutionTable:
    src = np.array(inputs, dtype=np.int64).reshape(-1, 2)
    dst = np.array(outputs, dtype=np.int64).reshape(-1, 2)
    chunks = [np.empty((0, 4), dtype=np.intp)]
    if len(src) and len(dst):
        # points are keyed on a box wide enough for every n1 - n2 + n3
        reach = int(3 * np.abs(src).max() + np.abs(dst).max()) + 1
        width = 2 * reach + 1

        def key(p: np.ndarray) -> np.ndarray:
            return (p[..., 0] + reach) * width + (p[..., 1] + reach)

        order = np.argsort(key(dst))
        keys = key(dst)[order]
        src_norm = np.sum(src * src, axis=1)
        dst_norm = np.sum(dst * dst, axis=1)
        i1, i3 = (g.ravel() for g in np.indices((len(src), len(src))))
        pair = src[i1] + src[i3]
        pair_norm = src_norm[i1] + src_norm[i3]
        for b in range(len(src)):
            wanted = key(pair - src[b])
            pos = np.minimum(np.searchsorted(keys, wanted), len(keys) - 1)
            hit = keys[pos] == wanted
            k = order[pos]
            if resonant_only:
                hit &= pair_norm - src_norm[b] == dst_norm[k]
            rows = np.column_stack(
                [i1[hit], np.full(int(hit.sum()), b), i3[hit], k[hit]]
            )
            chunks.append(rows.astype(np.intp))
    table = np.concatenate(chunks)
    return ConvolutionTable(table[:, 0], table[:, 1], table[:, 2], table[:, 3])


class CubicField:
    """``i(|n|^2 a + sum a1 conj(a2) a3)`` from ``inputs`` onto ``outputs``.

    As a vector field (inputs == outputs) it truncates every output that
    falls outside the support.
    """

    def __init__(
        self,
        inputs: Sequence[Point],
        outputs: Optional[Sequence[Point]] = None,
        resonant_only: bool = False,
    ):
        self.inputs = tuple(inputs)
        self.outputs = self.inputs if outputs is None else tuple(outputs)
        self.table = _convolution_table(self.inputs, self.outputs, resonant_only)
        out_index = {p: k for k, p in enumerate(self.outputs)}
        self._linear_in = np.array(
            [k for k, p in enumerate(self.inputs) if p in out_index], dtype=np.intp
        )
        self._linear_out = np.array(
            [out_index[p] for p in self.inputs if p in out_index], dtype=np.intp
        )
        self._freq = _frequencies(self.outputs)

    def convolution(self, a: np.ndarray) -> np.ndarray:
        """``sum a1 conj(a2) a3`` on every output mode."""
        sums = np.zeros(len(self.outputs), dtype=np.complex128)
        tab = self.table
        np.add.at(sums, tab.out, a[tab.i1] * np.conj(a[tab.i2]) * a[tab.i3])
        return sums

    def __call__(self, t: float, a: np.ndarray) -> np.ndarray:
        rates = self.convolution(a)
        rates[self._linear_out] += self._freq[self._linear_out] * a[self._linear_in]
        return 1j * rates


def full_rhs(
    a: GalerkinState, support_closure: Optional[Sequence[Point]] = None
) -> GalerkinState:
    """Rates of the full cubic flow, on the one-step closure of the support."""
    closure = (
        tuple(sorted(convolution_closure(a.support)))
        if support_closure is None
        else tuple(support_closure)
    )
    field = CubicField(a.support, closure)
    return GalerkinState(closure, field(a.time, np.asarray(a.amplitudes)), a.time)


def full_flow(closure: Sequence[Point]) -> VectorField:
    """The full cubic flow kept on ``closure``, stepped through :func:`full_rhs`."""
    support = tuple(closure)

    def field(t: float, a: np.ndarray) -> np.ndarray:
        rates = full_rhs(GalerkinState(support, a, t), support_closure=support)
        return np.array(rates.amplitudes)

    return field


def resonant_truncation_rhs(a: GalerkinState) -> GalerkinState:
    """Rates of the resonant truncation (before the gauge change)."""
    field = CubicField(a.support, resonant_only=True)
    return GalerkinState(a.support, field(a.time, np.asarray(a.amplitudes)), a.time)


class ResonantSystem:
    """Family-form flow on Lambda.

    ``beta_n' = i(-|beta_n|^2 beta_n + 2 beta_c1 beta_c2 conj(beta_spouse)
    + 2 beta_p1 beta_p2 conj(beta_sibling))``, missing relatives counted as 0.
    """

    def __init__(self, lam: LambdaSet, support: Optional[Sequence[Point]] = None):
        self.lam = lam
        self.support = tuple(lam.points if support is None else support)
        index = {p: k for k, p in enumerate(self.support)}
        pad = len(self.support)

        def slot(p: Optional[Point]) -> int:
            return index.get(p, pad) if p is not None else pad

        spouse, kid1, kid2, sibling, par1, par2 = ([] for _ in range(6))
        for p in self.support:
            j = lam.generation_of.get(p)
            link = lam.links(p)
            if j is None:
                raise UnlinkedPoint(p)
            if (j < lam.n and link.children is None) or (
                j > 1 and link.parents is None
            ):
                raise UnlinkedPoint(p)
            spouse.append(slot(link.spouse))
            sibling.append(slot(link.sibling))
            kids = link.children or (None, None)
            kid1.append(slot(kids[0]))
            kid2.append(slot(kids[1]))
            parents = link.parents or (None, None)
            par1.append(slot(parents[0]))
            par2.append(slot(parents[1]))
        as_arr = lambda xs: np.array(xs, dtype=np.intp)  # noqa: E731
        self._spouse, self._sibling = as_arr(spouse), as_arr(sibling)
        self._kid1, self._kid2 = as_arr(kid1), as_arr(kid2)
        self._par1, self._par2 = as_arr(par1), as_arr(par2)

    def __call__(self, t: float, beta: np.ndarray) -> np.ndarray:
        b = np.append(beta, 0j)
        own = -(beta.real**2 + beta.imag**2) * beta
        down = 2.0 * b[self._kid1] * b[self._kid2] * np.conj(b[self._spouse])
        up = 2.0 * b[self._par1] * b[self._par2] * np.conj(b[self._sibling])
        return 1j * (own + down + up)


def resonant_rhs(beta: GalerkinState, lam: LambdaSet) -> GalerkinState:
    system = ResonantSystem(lam, beta.support)
    return GalerkinState(
        beta.support, system(beta.time, np.asarray(beta.amplitudes)), beta.time
    )


def gauge_transform(
    state: GalerkinState, G: float, t: float, direction: int = 1
) -> GalerkinState:
    """``alpha = beta e^{i(G+|n|^2)t}`` for ``direction=1``, inverse for ``-1``."""
    if direction not in (1, -1):
        raise ParameterError(f"direction must be +1 or -1, got {direction}")
    phase = np.exp(direction * 1j * (G + _frequencies(state.support)) * t)
    return GalerkinState(state.support, state.amplitudes * phase, state.time)


def galerkin_mass(state: GalerkinState) -> float:
    return float(np.sum(np.abs(state.amplitudes) ** 2))


def auto_gauge(state: GalerkinState) -> float:
    """Gauge constant that removes the self-interaction: ``2 ||beta||^2``."""
    return 2.0 * galerkin_mass(state)


def sobolev_norm(a: GalerkinState, s: float) -> float:
    if s < 0:
        raise ParameterError(f"s must be non-negative, got {s}")
    weight = (1.0 + _frequencies(a.support)) ** s
    return float(np.sqrt(np.sum(weight * np.abs(a.amplitudes) ** 2)))


def generation_sobolev(a: GalerkinState, lam: LambdaSet, s: float) -> List[float]:
    """``sum_{n in Lambda_j} |n|^{2s} |a_n|^2`` for every generation."""
    values = a.as_dict()
    return [
        float(sum(_norm2(p) ** s * abs(values.get(p, 0j)) ** 2 for p in gen))
        for gen in lam.generations
    ]


@dataclass
class GalerkinTrajectory:
    """Samples of a Fourier-side state on a common support and time grid."""

    times: np.ndarray
    support: Tuple[Point, ...]
    values: np.ndarray

    def state(self, k: int) -> GalerkinState:
        return GalerkinState(self.support, self.values[k], float(self.times[k]))

    def on(self, support: Sequence[Point]) -> np.ndarray:
        index = {p: k for k, p in enumerate(self.support)}
        out = np.zeros((len(self.times), len(support)), dtype=np.complex128)
        for col, p in enumerate(support):
            if p in index:
                out[:, col] = self.values[:, index[p]]
        return out

    @property
    def mass(self) -> np.ndarray:
        return np.sum(np.abs(self.values) ** 2, axis=1)


def evolve(
    field: VectorField,
    initial: GalerkinState,
    t1: float,
    cfg: IntegratorConfig,
    samples: int = 512,
    support: Optional[Sequence[Point]] = None,
) -> GalerkinTrajectory:
    """Integrate ``field`` from ``initial`` and sample ``samples`` points."""
    pts = tuple(initial.support if support is None else support)
    run = integrate(field, initial.on(pts), initial.time, t1, cfg)
    times, values = run.sample(samples)
    return GalerkinTrajectory(times, pts, values)


def lift_toy_orbit(
    b_traj: Trajectory,
    lam: LambdaSet,
    cfg: LiftConfig,
    times: Optional[np.ndarray] = None,
    samples: int = 512,
) -> GalerkinTrajectory:
    """``beta_n(t) = b_j(t / lambda^2) / lambda`` on every ``n`` of Lambda_j."""
    width = b_traj.states.shape[1]
    if width != lam.n:
        raise ParameterError(f"Toy orbit has {width} modes, Lambda has {lam.n}")
    scale = cfg.lam**2
    lo, hi = sorted((b_traj.t0, b_traj.t1))
    if times is None:
        times = np.linspace(scale * b_traj.t0, scale * b_traj.t1, samples)
    toy_times = np.asarray(times, dtype=np.float64) / scale
    slack = 1e-12 * max(1.0, abs(hi))
    if toy_times.min() < lo - slack or toy_times.max() > hi + slack:
        raise OutOfWindow(
            f"Lift times map to [{toy_times.min():.6g}, {toy_times.max():.6g}] "
            f"outside the toy window [{lo:.6g}, {hi:.6g}]"
        )
    modes = b_traj(np.clip(toy_times, lo, hi)).reshape(len(toy_times), lam.n)
    support = tuple(lam.points)
    column = [lam.generation_of[p] - 1 for p in support]
    return GalerkinTrajectory(toy_times * scale, support, modes[:, column] / cfg.lam)


def l1_deviation(
    first: GalerkinTrajectory, second: GalerkinTrajectory
) -> np.ndarray:
    """``sum_n |first_n(t) - second_n(t)|`` on the union of both supports."""
    if first.times.shape != second.times.shape or not np.allclose(
        first.times, second.times, rtol=0, atol=1e-9
    ):
        raise ParameterError("Trajectories must share a time grid")
    union = tuple(sorted(set(first.support) | set(second.support)))
    return np.sum(np.abs(first.on(union) - second.on(union)), axis=1)


def approximation_error(
    alpha_traj: GalerkinTrajectory, beta_lift_traj: GalerkinTrajectory, G: float
) -> np.ndarray:
    """``sum_n |alpha_n(t) - e^{i(G+|n|^2)t} beta_n(t)|`` over the grid."""
    phase = np.exp(
        1j
        * (G + _frequencies(beta_lift_traj.support))[None, :]
        * beta_lift_traj.times[:, None]
    )
    gauged = GalerkinTrajectory(
        beta_lift_traj.times, beta_lift_traj.support, beta_lift_traj.values * phase
    )
    return l1_deviation(alpha_traj, gauged)


def mass_off_lambda(run: GalerkinTrajectory, lam: LambdaSet) -> float:
    """Largest mass on modes of ``run`` that lie outside Lambda."""
    inside = lam.point_set
    off = [k for k, p in enumerate(run.support) if p not in inside]
    if not off:
        return 0.0
    return float(np.max(np.sum(np.abs(run.values[:, off]) ** 2, axis=1)))


class ApproximationResult(NamedTuple):
    lam: float
    horizon: float
    max_error: float
    series: np.ndarray
    # largest mass carried by modes outside Lambda
    leaked_mass: float = 0.0


def approximation_experiment(
    lam_values: Sequence[float],
    lam_set: LambdaSet,
    b0: np.ndarray,
    window: float,
    cfg: IntegratorConfig,
    samples: int = 512,
    flow: Literal["resonant", "truncation", "full"] = "resonant",
) -> List[ApproximationResult]:
    """Compare a Fourier-side flow with the lifted toy orbit for each lambda.

    ``resonant`` evolves the family-form equation from the lifted data;
    ``truncation`` evolves the ungauged resonant truncation and compares
    through the gauge with ``G = 2 ||beta||^2``. ``full`` keeps every cubic
    interaction on the convolution closure of Lambda, starts from zero off
    Lambda and compares the same way; the mass it leaks off Lambda is
    reported with the error.
    """
    toy = integrate(toy_field, b0, 0.0, window, cfg)
    results = []
    for lam in lam_values:
        span = lam**2 * window
        long_cfg = cfg.model_copy(update={"max_time": max(cfg.max_time, span)})
        times = np.linspace(0.0, span, samples)
        lifted = lift_toy_orbit(toy, lam_set, LiftConfig(lam=lam), times)
        start = lifted.state(0)
        if flow == "resonant":
            field: VectorField = ResonantSystem(lam_set, lifted.support)
            run = evolve(field, start, span, long_cfg, samples)
            series = l1_deviation(run, lifted)
        elif flow == "truncation":
            field = CubicField(lifted.support, resonant_only=True)
            run = evolve(field, start, span, long_cfg, samples)
            series = approximation_error(run, lifted, auto_gauge(start))
        elif flow == "full":
            closure = tuple(sorted(convolution_closure(lifted.support)))
            field = full_flow(closure)
            run = evolve(field, start, span, long_cfg, samples, support=closure)
            series = approximation_error(run, lifted, auto_gauge(start))
        else:
            raise ParameterError(f"Unknown flow {flow!r}")
        peak = float(np.max(series))
        leaked = mass_off_lambda(run, lam_set)
        logger.info(
            f"lambda={lam:g}: T={span:.4g}, max l1 deviation {peak:.3e}, "
            f"leaked mass {leaked:.3e}"
        )
        results.append(ApproximationResult(lam, span, peak, series, leaked))
    return results


class ReductionCheck(NamedTuple):
    spread: float
    deviation: float
    mass_drift: float


def reduction_error(
    lam_set: LambdaSet,
    b0: np.ndarray,
    t1: float,
    cfg: IntegratorConfig,
    samples: int = 256,
) -> ReductionCheck:
    """Run the family-form flow from generation-constant data next to the toy
    flow; report the largest within-generation spread and toy deviation."""
    support = tuple(lam_set.points)
    column = np.array([lam_set.generation_of[p] - 1 for p in support])
    start = GalerkinState(support, np.asarray(b0, dtype=np.complex128)[column])
    run = evolve(ResonantSystem(lam_set, support), start, t1, cfg, samples)
    toy = integrate(toy_field, b0, 0.0, t1, cfg)
    reference = toy(run.times).reshape(len(run.times), -1)[:, column]
    spread = 0.0
    for gen in range(lam_set.n):
        cols = np.nonzero(column == gen)[0]
        if len(cols) > 1:
            block = run.values[:, cols]
            spread = max(spread, float(np.max(np.abs(block - block[:, :1]))))
    deviation = float(np.max(np.abs(run.values - reference)))
    drift = float(np.max(np.abs(run.mass - run.mass[0])))
    return ReductionCheck(spread, deviation, drift)
