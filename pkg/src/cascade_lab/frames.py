"""Coordinates adapted to the periodic orbit T_j and the maps between them.

A frame at saddle ``j`` removes the phase of ``b_j`` and the mass constraint:
``b_k = c_k e^{i theta}`` for every ``k != j``, ``b_j = r e^{i theta}`` with
``r`` fixed by unit mass, and the neighbours of ``j`` are written in the
hyperbolic coordinates ``c_{j-1} = w^2 p1 + w q1``, ``c_{j+1} = w^2 p2 + w q2``
where ``w = exp(2 pi i / 3)``. In these coordinates ``p`` is unstable and
``q`` stable with rates ``+-sqrt(3)``.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from cascade_lab.errors import (
    DegenerateAngle,
    DegenerateTarget,
    EscapedNeighborhood,
    InfeasibleMass,
    NonPositiveInput,
    NoSolution,
    ParameterError,
)
from cascade_lab.integrator import (
    Direction,
    SectionEvent,
    SectionHit,
    integrate,
    integrate_to_section,
)
from cascade_lab.params import IntegratorConfig
from cascade_lab.settings import DEFAULT_SIGMA
from cascade_lab.toy import (
    OMEGA,
    SQRT3,
    StateLike,
    toy_field,
    toy_rhs,
)

logger = logging.getLogger(__name__)

MIN_LEAD = 1e-10
MASS_TOL = 1e-6
FEASIBILITY_TOL = 1e-12
TARGET_TOL = 1e-12

# Coefficient of q1^2 p2^2 in the diagonal Hamiltonian
NU02 = 1.0 / SQRT3

HYPERBOLIC = ("p1", "q1", "p2", "q2")


def to_diagonal(c: complex) -> Tuple[float, float]:
    """Invert ``c = w^2 p + w q``."""
    return (
        -c.real - c.imag / SQRT3,
        -c.real + c.imag / SQRT3,
    )


def from_diagonal(p: float, q: float) -> complex:
    return OMEGA**2 * p + OMEGA * q


def _quadratic_form(p: float, q: float) -> float:
    """|w^2 p + w q|^2."""
    return p * p + q * q - p * q


@dataclass(frozen=True)
class SaddleFrame:
    """Point of the reduced phase space near T_j (1-based ``j``).

    ``c`` has one slot per mode; the slots ``j-1, j, j+1`` are not elliptic
    and are kept at zero.
    """

    j: int
    n: int
    p1: float = 0.0
    q1: float = 0.0
    p2: float = 0.0
    q2: float = 0.0
    c: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.complex128))
    theta: float = 0.0
    time: float = 0.0

    def __post_init__(self) -> None:
        if not 2 <= self.j <= self.n - 1:
            raise ParameterError(
                f"Saddle index {self.j} must lie in 2..{self.n - 1} for N={self.n}"
            )
        c = np.zeros(self.n, dtype=np.complex128)
        given = np.asarray(self.c, dtype=np.complex128).reshape(-1)
        if given.size:
            if given.size != self.n:
                raise ParameterError(f"Expected {self.n} elliptic slots")
            c[:] = given
        c[self.j - 2 : self.j + 1] = 0.0
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def elliptic_indices(self) -> List[int]:
        """0-based mode indices of the elliptic set P_j."""
        return [k for k in range(self.n) if abs(k - (self.j - 1)) > 1]

    @property
    def elliptic(self) -> Dict[int, complex]:
        """Elliptic amplitudes keyed by 1-based mode index."""
        return {k + 1: complex(self.c[k]) for k in self.elliptic_indices}

    @property
    def hyperbolic(self) -> np.ndarray:
        return np.array([self.p1, self.q1, self.p2, self.q2])

    @property
    def r_squared(self) -> float:
        return (
            1.0
            - float(np.sum(np.abs(self.c) ** 2))
            - _quadratic_form(self.p1, self.q1)
            - _quadratic_form(self.p2, self.q2)
        )

    def vector(self) -> np.ndarray:
        """Real coordinates ``(p1, q1, p2, q2, Re c_k, Im c_k, ...)``."""
        ell = self.c[self.elliptic_indices]
        return np.concatenate(
            [self.hyperbolic, np.column_stack([ell.real, ell.imag]).reshape(-1)]
        )

    @classmethod
    def from_vector(
        cls, j: int, n: int, vec: np.ndarray, theta: float = 0.0, time: float = 0.0
    ) -> "SaddleFrame":
        vec = np.asarray(vec, dtype=np.float64)
        if vec.size != 2 * n - 2:
            raise ParameterError(f"Frame vector needs {2 * n - 2} entries")
        c = np.zeros(n, dtype=np.complex128)
        slots = [k for k in range(n) if abs(k - (j - 1)) > 1]
        c[slots] = vec[4::2] + 1j * vec[5::2]
        p1, q1, p2, q2 = (float(x) for x in vec[:4])
        return cls(j, n, p1, q1, p2, q2, c, theta, time)


def hyperbolic_coordinates(state: StateLike, j: int) -> np.ndarray:
    """``(p1, q1, p2, q2)`` of the frame at ``j`` without any mass check.

    Vectorised over leading axes; used by section events.
    """
    b = np.asarray(state, dtype=np.complex128)
    lead = b[..., j - 1]
    size = np.abs(lead)
    phase = np.where(size > 0, np.conj(lead) / np.where(size > 0, size, 1.0), 1.0)
    lower = b[..., j - 2] * phase
    upper = b[..., j] * phase if j < b.shape[-1] else np.zeros_like(lower)
    root3 = SQRT3
    return np.stack(
        [
            -lower.real - lower.imag / root3,
            -lower.real + lower.imag / root3,
            -upper.real - upper.imag / root3,
            -upper.real + upper.imag / root3,
        ],
        axis=-1,
    )


def to_saddle_frame(
    state: StateLike, j: int, time: float = 0.0, mass_tol: float = MASS_TOL
) -> SaddleFrame:
    b = np.asarray(state, dtype=np.complex128)
    mass = float(np.sum(np.abs(b) ** 2))
    if abs(mass - 1.0) > mass_tol:
        raise ParameterError(f"Saddle frames need unit mass, got {mass:.12g}")
    lead = b[j - 1]
    if abs(lead) < MIN_LEAD:
        raise DegenerateAngle(f"|b_{j}| = {abs(lead):.3g} leaves theta undefined")
    theta = float(np.angle(lead))
    u = b * np.exp(-1j * theta)
    p1, q1 = to_diagonal(complex(u[j - 2]))
    p2, q2 = to_diagonal(complex(u[j]))
    return SaddleFrame(j, b.size, p1, q1, p2, q2, u, theta, time)


def from_saddle_frame(frame: SaddleFrame) -> np.ndarray:
    r2 = frame.r_squared
    if r2 < -FEASIBILITY_TOL:
        raise InfeasibleMass(f"r^2 = {r2:.3g} < 0 at saddle {frame.j}")
    u = np.array(frame.c, dtype=np.complex128)
    u[frame.j - 1] = math.sqrt(max(r2, 0.0))
    u[frame.j - 2] = from_diagonal(frame.p1, frame.q1)
    u[frame.j] = from_diagonal(frame.p2, frame.q2)
    return u * np.exp(1j * frame.theta)


class HamiltonianParts(NamedTuple):
    """Reduced Hamiltonian split by degree and by the variables involved.

    ``quadratic`` is ``-3/2 (p1 q1 + p2 q2) - |c|^2 / 2``; the quartic part
    splits into terms in ``(p, q)`` only, in ``c`` only, and mixed ones.
    """

    quadratic: float
    hyp: float
    ell: float
    mix: float

    @property
    def total(self) -> float:
        return self.quadratic + self.hyp + self.ell + self.mix


def _square_part(p: float, q: float) -> float:
    """Re (w^2 p + w q)^2."""
    return -0.5 * (p * p + q * q) + 2.0 * p * q


def _elliptic_pairs(frame: SaddleFrame) -> List[Tuple[int, int]]:
    """Adjacent 0-based mode pairs with both modes elliptic."""
    slots = set(frame.elliptic_indices)
    return [(k, k + 1) for k in range(frame.n - 1) if k in slots and k + 1 in slots]


def _outer_modes(frame: SaddleFrame) -> Tuple[Optional[int], Optional[int]]:
    """0-based indices of modes j-2 and j+2 when they exist."""
    j, n = frame.j, frame.n
    return (j - 3 if j >= 3 else None, j + 1 if j + 2 <= n else None)


def hamiltonian_parts(frame: SaddleFrame) -> HamiltonianParts:
    """Closed-form reduced Hamiltonian ``h - 1/4`` in frame coordinates."""
    p1, q1, p2, q2 = frame.p1, frame.q1, frame.p2, frame.q2
    c = frame.c
    power = np.abs(c) ** 2
    ell_mass = float(np.sum(power))
    cross = p1 * q1 + p2 * q2
    qf1, qf2 = _quadratic_form(p1, q1), _quadratic_form(p2, q2)
    hyp_mass = qf1 + qf2

    quadratic = -1.5 * cross - 0.5 * ell_mass
    hyp = (
        0.25 * hyp_mass**2
        + 0.25 * (qf1**2 + qf2**2)
        + hyp_mass * (_square_part(p1, q1) + _square_part(p2, q2))
    )
    ell = 0.25 * ell_mass**2 + 0.25 * float(np.sum(power**2))
    for k, m in _elliptic_pairs(frame):
        ell -= float(np.real(np.conj(c[m]) ** 2 * c[k] ** 2))
    mix = 1.5 * ell_mass * cross
    below, above = _outer_modes(frame)
    if below is not None:
        z1 = from_diagonal(p1, q1)
        mix -= float(np.real(np.conj(z1) ** 2 * c[below] ** 2))
    if above is not None:
        z2 = from_diagonal(p2, q2)
        mix -= float(np.real(np.conj(c[above]) ** 2 * z2**2))
    return HamiltonianParts(quadratic, hyp, ell, mix)


def reduced_hamiltonian(frame: SaddleFrame) -> float:
    """Reduced Hamiltonian, zero at T_j."""
    return hamiltonian_parts(frame).total


def diagonal_hamiltonian(frame: SaddleFrame) -> float:
    """Reduced Hamiltonian normalised to ``sqrt(3)(p1 q1 + p2 q2) + O(4)``.

    With this normalisation ``p' = dH/dq`` and ``q' = -dH/dp``.
    """
    return -2.0 / SQRT3 * reduced_hamiltonian(frame)


def _hyperbolic_gradient(frame: SaddleFrame) -> np.ndarray:
    """``dH/d(p1, q1, p2, q2)`` of the reduced Hamiltonian."""
    p1, q1, p2, q2 = frame.p1, frame.q1, frame.p2, frame.q2
    c = frame.c
    ell_mass = float(np.sum(np.abs(c) ** 2))
    qf1, qf2 = _quadratic_form(p1, q1), _quadratic_form(p2, q2)
    hyp_mass = qf1 + qf2
    squares = _square_part(p1, q1) + _square_part(p2, q2)

    grad = np.empty(4)
    for i, (p, q, qf) in enumerate(((p1, q1, qf1), (p2, q2, qf2))):
        weight = 0.5 * hyp_mass + 0.5 * qf + squares
        # d/dp and d/dq of p q, of the quadratic form and of the square part
        grad[2 * i] = (
            (-1.5 + 1.5 * ell_mass) * q
            + weight * (2.0 * p - q)
            + hyp_mass * (2.0 * q - p)
        )
        grad[2 * i + 1] = (
            (-1.5 + 1.5 * ell_mass) * p
            + weight * (2.0 * q - p)
            + hyp_mass * (2.0 * p - q)
        )
    below, above = _outer_modes(frame)
    if below is not None:
        zbar = np.conj(from_diagonal(p1, q1))
        outer = c[below] ** 2
        grad[0] -= float(np.real(2.0 * zbar * OMEGA * outer))
        grad[1] -= float(np.real(2.0 * zbar * OMEGA**2 * outer))
    if above is not None:
        z2 = from_diagonal(p2, q2)
        outer = np.conj(c[above]) ** 2
        grad[2] -= float(np.real(2.0 * z2 * OMEGA**2 * outer))
        grad[3] -= float(np.real(2.0 * z2 * OMEGA * outer))
    return grad


def _elliptic_gradient(frame: SaddleFrame) -> np.ndarray:
    """``dH/d conj(c_k)`` on the elliptic slots."""
    c = frame.c
    ell_mass = float(np.sum(np.abs(c) ** 2))
    cross = frame.p1 * frame.q1 + frame.p2 * frame.q2
    grad = (-0.5 + 0.5 * ell_mass + 1.5 * cross + 0.5 * np.abs(c) ** 2) * c
    for k, m in _elliptic_pairs(frame):
        grad[k] -= np.conj(c[k]) * c[m] ** 2
        grad[m] -= np.conj(c[m]) * c[k] ** 2
    below, above = _outer_modes(frame)
    if below is not None:
        grad[below] -= from_diagonal(frame.p1, frame.q1) ** 2 * np.conj(c[below])
    if above is not None:
        grad[above] -= from_diagonal(frame.p2, frame.q2) ** 2 * np.conj(c[above])
    return grad[frame.elliptic_indices]


def reduced_rhs(frame: SaddleFrame) -> np.ndarray:
    """Hamiltonian vector field of the reduced Hamiltonian.

    Laid out like :meth:`SaddleFrame.vector`. The hyperbolic block follows
    ``p' = -2/sqrt(3) dH/dq``, ``q' = 2/sqrt(3) dH/dp`` and the elliptic
    slots ``c' = -2i dH/d conj(c)``.
    """
    grad = _hyperbolic_gradient(frame)
    scale = 2.0 / SQRT3
    hyperbolic = [
        -scale * grad[1],
        scale * grad[0],
        -scale * grad[3],
        scale * grad[2],
    ]
    ell = -2j * _elliptic_gradient(frame)
    return np.concatenate(
        [hyperbolic, np.column_stack([ell.real, ell.imag]).reshape(-1)]
    )


def pushforward_rhs(frame: SaddleFrame) -> np.ndarray:
    """Toy field pushed through the chart, laid out like :func:`reduced_rhs`."""
    b = from_saddle_frame(frame)
    rates = toy_rhs(b)
    j = frame.j
    lead = b[j - 1]
    if abs(lead) < MIN_LEAD:
        raise DegenerateAngle(f"r vanishes at saddle {j}")
    theta_rate = float(np.imag(rates[j - 1] / lead))
    u_rate = (rates - 1j * theta_rate * b) * np.exp(-1j * frame.theta)
    dp1, dq1 = to_diagonal(complex(u_rate[j - 2]))
    dp2, dq2 = to_diagonal(complex(u_rate[j]))
    ell = u_rate[frame.elliptic_indices]
    return np.concatenate(
        [[dp1, dq1, dp2, dq2], np.column_stack([ell.real, ell.imag]).reshape(-1)]
    )


class ReducedHamCoeffs(NamedTuple):
    """Coefficients of the diagonal Hamiltonian on the hyperbolic block.

    Keys are exponent tuples ``(a, b, c, d)`` of ``p1^a q1^b p2^c q2^d``.
    """

    table: Dict[Tuple[int, int, int, int], float]
    residual: float

    @property
    def quadratic(self) -> Dict[Tuple[int, int, int, int], float]:
        return {k: v for k, v in self.table.items() if sum(k) == 2}

    @property
    def quartic(self) -> Dict[Tuple[int, int, int, int], float]:
        return {k: v for k, v in self.table.items() if sum(k) == 4}

    @property
    def nu02(self) -> float:
        return self.table[(0, 2, 2, 0)]


def _monomials(degree: int) -> List[Tuple[int, int, int, int]]:
    return [
        e
        for e in itertools.product(range(degree + 1), repeat=4)
        if sum(e) <= degree
    ]


def fit_hamiltonian_coefficients(
    radius: float = 0.05,
    samples: int = 400,
    seed: int = 0,
    n: int = 5,
    j: int = 3,
    threshold: float = 1e-9,
) -> ReducedHamCoeffs:
    """Least-squares degree-4 fit of the diagonal Hamiltonian with ``c = 0``.

    The pulled-back Hamiltonian is an exact quartic there, so the fit
    recovers its coefficients up to round-off.
    """
    rng = np.random.default_rng(seed)
    points = rng.uniform(-radius, radius, size=(samples, 4))
    exps = _monomials(4)
    design = np.stack(
        [np.prod(points ** np.array(e), axis=1) for e in exps], axis=1
    )
    values = np.array(
        [diagonal_hamiltonian(SaddleFrame(j, n, *pt)) for pt in points]
    )
    # scale columns so small monomials do not dominate the conditioning
    scale = np.linalg.norm(design, axis=0)
    coef, *_ = np.linalg.lstsq(design / scale, values, rcond=None)
    coef = coef / scale
    residual = float(np.max(np.abs(design @ coef - values)))
    table = {e: float(v) for e, v in zip(exps, coef) if abs(v) > threshold}
    fitted = ReducedHamCoeffs(table, residual)
    if fitted.table.get((0, 2, 2, 0), 0.0) <= 0:
        raise NoSolution("Fitted nu_02 is not positive")
    logger.debug(f"Hamiltonian fit: {len(table)} terms, residual {residual:.3g}")
    return fitted


def transit_time(x2_0: float, sigma: float) -> float:
    """Time for ``p2`` to grow from ``x2_0`` to ``f2(sigma) = sigma``."""
    if x2_0 <= 0:
        raise NonPositiveInput(f"x2_0 must be positive, got {x2_0}")
    if sigma <= 0:
        raise NonPositiveInput(f"sigma must be positive, got {sigma}")
    return math.log(sigma / x2_0) / SQRT3


def cancellation_target(
    C_delta_log: float,
    sigma: float,
    nu02: Optional[float] = None,
    entry_q1: Optional[float] = None,
) -> float:
    """Entry ``p2`` whose resonant push cancels an incoming ``p1`` offset.

    Solves ``x^2 T(x) = C_delta_log / (2 nu02 f1)`` on the increasing branch
    ``(0, sigma e^{-1/2}]`` of ``x^2 T(x)``.
    """
    coefficient = NU02 if nu02 is None else nu02
    f1 = sigma if entry_q1 is None else entry_q1
    if coefficient <= 0 or f1 <= 0:
        raise NoSolution("Need nu02 > 0 and a positive entry offset")
    target = C_delta_log / (2.0 * coefficient * f1)
    peak_x = sigma * math.exp(-0.5)
    peak = peak_x**2 * transit_time(peak_x, sigma)
    if target <= 0:
        raise NoSolution(f"Right-hand side {target:.3g} is not positive")
    if target > peak:
        raise NoSolution(f"Right-hand side {target:.3g} exceeds maximum {peak:.3g}")

    def excess(x: float) -> float:
        return x * x * transit_time(x, sigma) - target

    lower = np.finfo(float).tiny
    if excess(peak_x) == 0.0:
        return peak_x
    return float(brentq(excess, lower, peak_x, xtol=1e-300, rtol=4e-16, maxiter=500))


def straightened_heteroclinic(t: float, t0: float = 0.0) -> float:
    """``p2`` along gamma_j^+ in the frame of saddle j."""
    z = -2.0 * SQRT3 * (t - t0)
    return 1.0 / math.sqrt(1.0 + math.exp(z)) if z < 700 else 0.0


def heteroclinic_crossing_time(level: float, t0: float = 0.0) -> float:
    """Inverse of :func:`straightened_heteroclinic`."""
    if not 0 < level < 1:
        raise ParameterError(f"level must be in (0, 1), got {level}")
    return t0 - math.log(1.0 / level**2 - 1.0) / (2.0 * SQRT3)


def frame_transfer(frame: SaddleFrame) -> SaddleFrame:
    """Re-express a frame at saddle ``j`` in the frame of saddle ``j+1``."""
    j, n = frame.j, frame.n
    if j + 1 > n - 1:
        raise ParameterError(f"No saddle frame beyond j={j} for N={n}")
    r_tilde = math.sqrt(max(_quadratic_form(frame.p2, frame.q2), 0.0))
    if r_tilde <= TARGET_TOL:
        raise DegenerateTarget(f"Mode {j + 1} vanishes, cannot move past saddle {j}")
    r2 = frame.r_squared
    if r2 < -FEASIBILITY_TOL:
        raise InfeasibleMass(f"r^2 = {r2:.3g} < 0 at saddle {j}")
    r = math.sqrt(max(r2, 0.0))
    phi = (OMEGA * frame.p2 + OMEGA**2 * frame.q2) / r_tilde

    c = np.array(frame.c, dtype=np.complex128) * phi
    c[j - 2] = from_diagonal(frame.p1, frame.q1) * phi
    p2, q2 = to_diagonal(complex(frame.c[j + 1] * phi))
    return SaddleFrame(
        j=j + 1,
        n=n,
        p1=r / r_tilde * frame.q2,
        q1=r / r_tilde * frame.p2,
        p2=p2,
        q2=q2,
        c=c,
        theta=frame.theta - float(np.angle(phi)),
        time=frame.time,
    )


def coordinate_event(
    j: int,
    coordinate: str,
    level: float,
    direction: Direction,
    name: Optional[str] = None,
    min_time: float = 0.0,
) -> SectionEvent:
    """Section on one hyperbolic coordinate of the frame at ``j``."""
    index = HYPERBOLIC.index(coordinate)
    return SectionEvent(
        coordinate=lambda b: float(hyperbolic_coordinates(b, j)[index]),
        level=level,
        direction=direction,
        min_time=min_time,
        name=name or f"{coordinate}^({j})={level:g}",
    )


def exit_section(j: int, sigma: float) -> SectionEvent:
    """Sigma_j^out = {p2 = sigma}, crossed with p2 increasing."""
    return coordinate_event(j, "p2", sigma, Direction.INCREASING, f"out_{j}")


def entry_section(j: int, sigma: float) -> SectionEvent:
    """Sigma_j^in = {q1 = sigma}, crossed with q1 decreasing."""
    return coordinate_event(j, "q1", sigma, Direction.DECREASING, f"in_{j}")


def _escape_check(hit: SectionHit, frame: SaddleFrame, bound: float) -> None:
    if hit.trajectory is None:
        return
    _, states = hit.trajectory.sample(64)
    states = np.vstack([states, hit.trajectory.states])
    slots = frame.elliptic_indices
    peaks = np.max(np.abs(states[:, slots]), axis=0)
    worst = int(np.argmax(peaks))
    if peaks[worst] > bound:
        mode = slots[worst] + 1
        raise EscapedNeighborhood(
            f"|b_{mode}| reached {peaks[worst]:.3g} > {bound:.3g} near saddle "
            f"{frame.j}",
            mode=mode,
        )


def local_map(
    entry: SaddleFrame,
    cfg: IntegratorConfig,
    sigma: float = DEFAULT_SIGMA,
    horizon: Optional[float] = None,
    escape_bound: Optional[float] = None,
    stops: Sequence[SectionEvent] = (),
) -> SaddleFrame:
    """Flow from Sigma_j^in to Sigma_j^out of the same saddle."""
    if abs(entry.q1 - sigma) > 1e-8:
        raise ParameterError(f"Entry q1 = {entry.q1:.6g} is not on Sigma_in")
    hit = integrate_to_section(
        toy_field,
        from_saddle_frame(entry),
        exit_section(entry.j, sigma),
        cfg,
        t0=entry.time,
        horizon=horizon,
        stops=stops,
        keep_trajectory=True,
    )
    _escape_check(hit, entry, sigma if escape_bound is None else escape_bound)
    if hit.stop is not None:
        raise NoSolution(f"Local map at saddle {entry.j} ended on {hit.stop}")
    return to_saddle_frame(hit.state, entry.j, time=hit.time)


def global_map(
    exit: SaddleFrame,
    cfg: IntegratorConfig,
    sigma: float = DEFAULT_SIGMA,
    horizon: Optional[float] = None,
) -> SaddleFrame:
    """Flow along gamma_j^+ from Sigma_j^out to Sigma_{j+1}^in."""
    if abs(exit.p2 - sigma) > 1e-8:
        raise ParameterError(f"Exit p2 = {exit.p2:.6g} is not on Sigma_out")
    target = exit.j + 1
    hit = integrate_to_section(
        toy_field,
        from_saddle_frame(exit),
        entry_section(target, sigma),
        cfg,
        t0=exit.time,
        horizon=horizon,
    )
    return to_saddle_frame(hit.state, target, time=hit.time)


class CancellationResult(NamedTuple):
    delta: float
    x_star: float
    transit: float
    exit_p1: float
    baseline_p1: float

    @property
    def ratio(self) -> float:
        return abs(self.exit_p1) / abs(self.baseline_p1)


def cancellation_experiment(
    delta: float,
    sigma: float,
    cfg: IntegratorConfig,
    C: float = 1e-3,
    n: int = 5,
    j: int = 3,
) -> CancellationResult:
    """Exit ``p1`` through one saddle with and without the cancelling ``p2``.

    Both runs enter on Sigma_j^in with ``p1 = -C delta ln(1/delta)``. The
    cancelled run starts at ``p2 = x*`` and stops on Sigma_j^out; the
    baseline starts at ``p2 = 0``, which never leaves, and is flowed for the
    same time.
    """
    offset = C * delta * math.log(1.0 / delta)
    x_star = cancellation_target(offset, sigma)
    entry = SaddleFrame(j, n, p1=-offset, q1=sigma, p2=x_star)
    out = local_map(entry, cfg, sigma)
    elapsed = out.time - entry.time

    flat = replace(entry, p2=0.0)
    run = integrate(toy_field, from_saddle_frame(flat), 0.0, elapsed, cfg)
    baseline = hyperbolic_coordinates(run.final, j)[0]
    logger.info(
        f"delta={delta:g}: x*={x_star:.4g} T={elapsed:.4g} "
        f"p1 exit {out.p1:.3g} vs baseline {baseline:.3g}"
    )
    return CancellationResult(delta, x_star, elapsed, out.p1, float(baseline))
