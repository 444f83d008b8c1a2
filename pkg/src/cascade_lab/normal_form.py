"""Degree-four normal form of the cubic Fourier system.

Energies follow ``a' = 2i dH/d(conj a)`` with
``H = D + G``, ``D = 1/2 sum |n|^2 |a_n|^2`` and
``G = 1/4 sum_{n1-n2+n3-n4=0} a1 conj(a2) a3 conj(a4)``. The generator
``F = 1/4 sum F_{n1n2n3n4} a1 conj(a2) a3 conj(a4)`` with
``F = -i / (|n1|^2 - |n2|^2 + |n3|^2 - |n4|^2)`` on non-resonant quadruples
has the field ``X_F(a)_n = sum a1 conj(a2) a3 / Omega``; its time-one map
removes the non-resonant quartic terms.
"""

import logging
from functools import lru_cache
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from cascade_lab.errors import ParameterError
from cascade_lab.galerkin import CubicField, GalerkinState
from cascade_lab.integrator import integrate
from cascade_lab.lattice import Point, convolution_closure
from cascade_lab.params import IntegratorConfig

logger = logging.getLogger(__name__)

# Relative step of the radial difference that turns the energy remainder
# into the vector-field remainder
RADIAL_STEP = 0.05


def _norm2(p: Point) -> int:
    return p[0] * p[0] + p[1] * p[1]


def divisor(n1: Point, n2: Point, n3: Point, n4: Point) -> int:
    return _norm2(n1) - _norm2(n2) + _norm2(n3) - _norm2(n4)


def _convolves(n1: Point, n2: Point, n3: Point, n4: Point) -> bool:
    return (
        n1[0] - n2[0] + n3[0] == n4[0] and n1[1] - n2[1] + n3[1] == n4[1]
    )


def is_resonant(n1: Point, n2: Point, n3: Point, n4: Point) -> bool:
    return _convolves(n1, n2, n3, n4) and divisor(n1, n2, n3, n4) == 0


def generator_coefficient(n1: Point, n2: Point, n3: Point, n4: Point) -> complex:
    """``-i / Omega`` on non-resonant quadruples, zero otherwise."""
    if not _convolves(n1, n2, n3, n4):
        return 0j
    omega = divisor(n1, n2, n3, n4)
    if omega == 0:
        return 0j
    return complex(0.0, -1.0 / omega)


class GeneratorTerm(NamedTuple):
    quadruple: Tuple[Point, Point, Point, Point]
    coefficient: complex


@lru_cache(maxsize=16)
def _generator_terms(support: Tuple[Point, ...]) -> Tuple[GeneratorTerm, ...]:
    members = set(support)
    terms = []
    for n1 in support:
        for n2 in support:
            for n3 in support:
                n4 = (n1[0] - n2[0] + n3[0], n1[1] - n2[1] + n3[1])
                if n4 not in members:
                    continue
                coefficient = generator_coefficient(n1, n2, n3, n4)
                if coefficient:
                    terms.append(GeneratorTerm((n1, n2, n3, n4), coefficient))
    return tuple(terms)


def generator_table(support: Sequence[Point]) -> Tuple[GeneratorTerm, ...]:
    """Non-zero generator terms with all four modes in ``support``."""
    return _generator_terms(tuple(sorted(set(support))))


def quadratic_energy(alpha: GalerkinState) -> float:
    freq = np.array([_norm2(p) for p in alpha.support], dtype=np.float64)
    return float(0.5 * np.sum(freq * np.abs(alpha.amplitudes) ** 2))


def _quartic(alpha: GalerkinState, resonant_only: bool) -> float:
    field = CubicField(alpha.support, resonant_only=resonant_only)
    amps = np.asarray(alpha.amplitudes)
    return float(0.25 * np.real(np.vdot(amps, field.convolution(amps))))


def full_quartic(alpha: GalerkinState) -> float:
    return _quartic(alpha, resonant_only=False)


def resonant_quartic(alpha: GalerkinState) -> float:
    return _quartic(alpha, resonant_only=True)


def hamiltonian(alpha: GalerkinState) -> float:
    return quadratic_energy(alpha) + full_quartic(alpha)


def _encode(coords: np.ndarray, offset: int, width: int) -> np.ndarray:
    return (coords[..., 0] + offset) * width + (coords[..., 1] + offset)


class NormalFormChange:
    """Truncated time-one map of ``X_F`` for states based on ``support``.

    The map acts on the one-step closure K of the support. Its field keeps
    the triples with at most one input outside the support and drops every
    output that leaves K.
    """

    def __init__(self, support: Sequence[Point]):
        base = sorted(set(support))
        extra = sorted(convolution_closure(base) - set(base))
        self.support: Tuple[Point, ...] = tuple(base)
        self.closure: Tuple[Point, ...] = tuple(base + extra)
        self.i1, self.i2, self.i3, self.out, self.weight = self._triples()
        logger.debug(
            f"Normal form on {len(self.support)} modes, closure "
            f"{len(self.closure)}, {len(self.weight)} triples"
        )

    def _triples(self) -> Tuple[np.ndarray, ...]:
        coords = np.array(self.closure, dtype=np.int64).reshape(-1, 2)
        s, k = len(self.support), len(self.closure)
        offset = 3 * int(np.abs(coords).max(initial=0)) + 1
        width = 2 * offset + 1
        keys = _encode(coords, offset, width)
        order = np.argsort(keys)
        sorted_keys = keys[order]
        norms = np.sum(coords**2, axis=1)
        inner, outer = np.arange(s), np.arange(s, k)
        blocks = [(inner, inner, inner)]
        if len(outer):
            blocks += [
                (outer, inner, inner),
                (inner, outer, inner),
                (inner, inner, outer),
            ]
        kept: List[Tuple[np.ndarray, ...]] = []
        lost: List[Tuple[np.ndarray, ...]] = []
        for r1, r2, r3 in blocks:
            grid = np.meshgrid(r1, r2, r3, indexing="ij")
            g1, g2, g3 = (g.reshape(-1) for g in grid)
            target = coords[g1] - coords[g2] + coords[g3]
            code = _encode(target, offset, width)
            pos = np.clip(np.searchsorted(sorted_keys, code), 0, k - 1)
            hit = sorted_keys[pos] == code
            out = order[pos]
            partial = norms[g1] - norms[g2] + norms[g3]
            omega = partial - np.where(hit, norms[out], np.sum(target**2, axis=1))
            keep = hit & (omega != 0)
            kept.append(
                (g1[keep], g2[keep], g3[keep], out[keep], 1.0 / omega[keep])
            )
            drop = ~hit & (omega != 0)
            lost.append(
                (g1[drop], g2[drop], g3[drop], code[drop], 1.0 / omega[drop])
            )
        l1, l2, l3, codes, lw = (np.concatenate(parts) for parts in zip(*lost))
        _, groups = np.unique(codes, return_inverse=True)
        self._lost = (l1, l2, l3, groups.reshape(-1), lw)
        return tuple(np.concatenate(parts) for parts in zip(*kept))

    def leakage(self, y: np.ndarray) -> float:
        """l1 norm of the part of ``X_F(y)`` that falls outside the closure."""
        l1, l2, l3, groups, lw = self._lost
        if not len(lw):
            return 0.0
        rates = np.zeros(int(groups.max()) + 1, dtype=np.complex128)
        np.add.at(rates, groups, lw * y[l1] * np.conj(y[l2]) * y[l3])
        return float(np.sum(np.abs(rates)))

    def field(self, y: np.ndarray) -> np.ndarray:
        rates = np.zeros(len(self.closure), dtype=np.complex128)
        terms = self.weight * y[self.i1] * np.conj(y[self.i2]) * y[self.i3]
        np.add.at(rates, self.out, terms)
        return rates

    def lift(self, alpha: GalerkinState) -> np.ndarray:
        outside = set(alpha.support) - set(self.closure)
        if outside:
            raise ParameterError(f"Modes {sorted(outside)} lie outside the closure")
        return alpha.on(self.closure)

    def displacement(
        self, alpha: GalerkinState, cfg: IntegratorConfig, direction: int = 1
    ) -> np.ndarray:
        """``Gamma(alpha) - alpha`` on the closure, integrated directly."""
        if direction not in (1, -1):
            raise ParameterError(f"direction must be +1 or -1, got {direction}")
        start = self.lift(alpha)
        kick = self.field(start)
        scale = float(np.max(np.abs(kick), initial=0.0))
        if scale == 0.0:
            return np.zeros_like(start)
        # the displacement is cubic in the amplitude, so absolute tolerance
        # has to follow its size
        tight = cfg.model_copy(
            update={"abs_tol": min(cfg.abs_tol, 1e-3 * cfg.rel_tol * scale)}
        )

        def rhs(t: float, delta: np.ndarray) -> np.ndarray:
            return direction * self.field(start + delta)

        run = integrate(rhs, np.zeros_like(start), 0.0, 1.0, tight)
        return np.asarray(run.final)

    def apply(
        self, alpha: GalerkinState, cfg: IntegratorConfig, direction: int = 1
    ) -> GalerkinState:
        start = self.lift(alpha)
        moved = start + self.displacement(alpha, cfg, direction)
        return GalerkinState(self.closure, moved, alpha.time)

    def remainder(self, alpha: GalerkinState, cfg: IntegratorConfig) -> float:
        """``H(Gamma(alpha)) - (D + G_res)(alpha)``.

        The quartic energy is expanded to first order in the displacement;
        the dropped terms are of degree eight.
        """
        delta = self.displacement(alpha, cfg)
        base = self.lift(alpha)
        freq = np.array([_norm2(p) for p in self.closure], dtype=np.float64)
        d_quadratic = float(
            np.real(np.sum(freq * np.conj(base) * delta))
            + 0.5 * np.sum(freq * np.abs(delta) ** 2)
        )
        on_support = GalerkinState(self.support, alpha.on(self.support))
        conv = CubicField(self.support, self.closure).convolution(
            np.asarray(on_support.amplitudes)
        )
        d_quartic = float(np.real(np.vdot(delta, conv)))
        nonresonant = full_quartic(on_support) - resonant_quartic(on_support)
        return d_quadratic + d_quartic + nonresonant


@lru_cache(maxsize=8)
def _cached_change(support: Tuple[Point, ...]) -> NormalFormChange:
    return NormalFormChange(support)


def gamma_truncated(
    alpha: GalerkinState,
    direction: int = 1,
    cfg: Optional[IntegratorConfig] = None,
    base: Optional[Sequence[Point]] = None,
) -> GalerkinState:
    """Time-one map of ``X_F`` (``direction=-1`` for the inverse).

    ``base`` fixes the support whose closure carries the map; it defaults to
    the support of ``alpha``. Pass the original support when inverting a
    state that already lives on the closure.
    """
    cfg = cfg or IntegratorConfig()
    support = alpha.support if base is None else base
    change = _cached_change(tuple(sorted(set(support))))
    return change.apply(alpha, cfg, direction)


def random_state(
    support_size: int, seed: int, radius: int = 3
) -> GalerkinState:
    """Random amplitudes of unit l1 norm on ``support_size`` distinct points."""
    box = [
        (x, y)
        for x in range(-radius, radius + 1)
        for y in range(-radius, radius + 1)
    ]
    if support_size > len(box):
        raise ParameterError(f"Box of radius {radius} holds only {len(box)} points")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(box), size=support_size, replace=False)
    amps = rng.normal(size=support_size) + 1j * rng.normal(size=support_size)
    return GalerkinState(
        tuple(box[int(i)] for i in picks), amps / np.sum(np.abs(amps))
    )


def log_log_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log|y|`` against ``log x``."""
    xs = np.asarray(x, dtype=np.float64)
    ys = np.abs(np.asarray(y, dtype=np.float64))
    if xs.size < 2 or np.any(xs <= 0) or np.any(ys == 0):
        raise ParameterError("Need at least two positive samples for a log-log fit")
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)


class ScalingResult(NamedTuple):
    amplitudes: List[float]
    displacement: List[float]
    remainder: List[float]
    field_remainder: List[float]
    displacement_slope: float
    remainder_slope: float
    field_remainder_slope: float
    leakage: List[float]


def remainder_scaling(
    amplitudes: Sequence[float],
    shape: GalerkinState,
    cfg: IntegratorConfig,
) -> ScalingResult:
    """Measure ``||Gamma(a) - a||_1`` and the normal-form remainder along the
    ray ``a = eps * shape``.

    The field remainder is the radial derivative of the energy remainder,
    taken by a central difference.
    """
    change = NormalFormChange(shape.support)
    disp: List[float] = []
    rem: List[float] = []
    field_rem: List[float] = []
    leaked: List[float] = []
    for eps in amplitudes:
        alpha = GalerkinState(shape.support, eps * np.asarray(shape.amplitudes))
        delta = change.displacement(alpha, cfg)
        disp.append(float(np.sum(np.abs(delta))))
        leaked.append(change.leakage(change.lift(alpha) + delta))
        rem.append(change.remainder(alpha, cfg))
        up = GalerkinState(shape.support, (1 + RADIAL_STEP) * alpha.amplitudes)
        down = GalerkinState(shape.support, (1 - RADIAL_STEP) * alpha.amplitudes)
        field_rem.append(
            (change.remainder(up, cfg) - change.remainder(down, cfg))
            / (2.0 * RADIAL_STEP * eps)
        )
        logger.info(
            f"eps={eps:.1e}: |Gamma-Id|_1={disp[-1]:.3e}, remainder={rem[-1]:.3e}"
        )
    return ScalingResult(
        amplitudes=list(amplitudes),
        displacement=disp,
        remainder=rem,
        field_remainder=field_rem,
        displacement_slope=log_log_slope(amplitudes, disp),
        remainder_slope=log_log_slope(amplitudes, rem),
        field_remainder_slope=log_log_slope(amplitudes, field_rem),
        leakage=leaked,
    )
