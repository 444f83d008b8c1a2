"""The N-mode toy model: vector field, conserved quantities and exact orbits.

Every function accepts either a :class:`ToyState` or a complex array whose
last axis holds the modes ``b_1..b_N``, so trajectories stored as
``(samples, N)`` arrays can be evaluated in one call.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel
from scipy.special import expit

from cascade_lab.errors import ParameterError
from cascade_lab.params import ExactOrbit, OrbitKind
from cascade_lab.settings import SCHEMA_VERSION

logger = logging.getLogger(__name__)

# omega = exp(2 pi i / 3)
OMEGA = complex(-0.5, math.sqrt(3.0) / 2.0)
SQRT3 = math.sqrt(3.0)

MIN_MODES = 5


class ToyStateDocument(BaseModel):
    schema_version: str = SCHEMA_VERSION
    time: float
    re: List[float]
    im: List[float]


@dataclass(frozen=True)
class ToyState:
    """Mode amplitudes ``b_1..b_N`` at one instant of toy time."""

    modes: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        modes = np.array(self.modes, dtype=np.complex128).reshape(-1)
        if modes.size < MIN_MODES:
            raise ValueError(f"A toy state needs at least {MIN_MODES} modes")
        modes.setflags(write=False)
        object.__setattr__(self, "modes", modes)

    @property
    def n(self) -> int:
        return int(self.modes.size)

    def __array__(self, dtype: Any = None, copy: Optional[bool] = None) -> np.ndarray:
        return np.array(self.modes, dtype=dtype)

    def __len__(self) -> int:
        return self.n

    def to_json(self) -> str:
        doc = ToyStateDocument(
            time=self.time, re=self.modes.real.tolist(), im=self.modes.imag.tolist()
        )
        return doc.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ToyState":
        doc = ToyStateDocument.model_validate_json(text)
        if len(doc.re) != len(doc.im):
            raise ParameterError("Real and imaginary parts differ in length")
        return cls(modes=np.array(doc.re) + 1j * np.array(doc.im), time=doc.time)


StateLike = Union[ToyState, np.ndarray]


def _modes(state: StateLike) -> np.ndarray:
    return np.asarray(state, dtype=np.complex128)


def _neighbour_squares(b: np.ndarray) -> np.ndarray:
    """b_{j-1}^2 + b_{j+1}^2 with b_0 = b_{N+1} = 0."""
    sq = b * b
    out = np.zeros_like(sq)
    out[..., 1:] += sq[..., :-1]
    out[..., :-1] += sq[..., 1:]
    return out


def toy_rhs(state: StateLike) -> np.ndarray:
    b = _modes(state)
    power = b.real**2 + b.imag**2
    return -1j * power * b + 2j * np.conj(b) * _neighbour_squares(b)


def toy_field(t: float, b: np.ndarray) -> np.ndarray:
    """Autonomous toy field in the ``f(t, y)`` form used by the integrator."""
    return toy_rhs(b)


def toy_hamiltonian(state: StateLike) -> Union[float, np.ndarray]:
    b = _modes(state)
    power = b.real**2 + b.imag**2
    quartic = 0.25 * np.sum(power**2, axis=-1)
    coupling = np.sum(
        np.real(np.conj(b[..., 1:]) ** 2 * b[..., :-1] ** 2), axis=-1
    )
    return quartic - coupling


def toy_mass(state: StateLike) -> Union[float, np.ndarray]:
    b = _modes(state)
    return np.sum(b.real**2 + b.imag**2, axis=-1)


def _heteroclinic_factors(orbit: ExactOrbit, t: float) -> Tuple[complex, complex]:
    carrier = np.exp(-1j * (t + orbit.phase))
    sign = 1.0 if orbit.kind is OrbitKind.HETEROCLINIC_PLUS else -1.0
    lower = OMEGA**2 * carrier * math.sqrt(expit(-2.0 * SQRT3 * t))
    upper = sign * OMEGA * carrier * math.sqrt(expit(2.0 * SQRT3 * t))
    return lower, upper


def exact_orbit_point(orbit: ExactOrbit, t: float) -> ToyState:
    """Closed-form point of T_j or of the heteroclinic gamma_j^+- at time t."""
    modes = np.zeros(orbit.n, dtype=np.complex128)
    idx = orbit.j - 1
    if orbit.kind is OrbitKind.PERIODIC:
        modes[idx] = np.exp(-1j * t)
    else:
        modes[idx], modes[idx + 1] = _heteroclinic_factors(orbit, t)
    return ToyState(modes=modes, time=t)


def exact_orbit_derivative(orbit: ExactOrbit, t: float) -> np.ndarray:
    """Analytic time derivative of :func:`exact_orbit_point`."""
    rates = np.zeros(orbit.n, dtype=np.complex128)
    idx = orbit.j - 1
    if orbit.kind is OrbitKind.PERIODIC:
        rates[idx] = -1j * np.exp(-1j * t)
        return rates
    lower, upper = _heteroclinic_factors(orbit, t)
    rates[idx] = lower * (-1j - SQRT3 * expit(2.0 * SQRT3 * t))
    rates[idx + 1] = upper * (-1j + SQRT3 * expit(-2.0 * SQRT3 * t))
    return rates


def phase_lock_rate(state: StateLike, j: int) -> float:
    """Rate of change of theta_j - theta_{j+1} (1-based j)."""
    b = _modes(state)
    rates = toy_rhs(b)
    lo, hi = b[j - 1], b[j]
    if lo == 0 or hi == 0:
        raise ValueError(f"Phase of mode {j} or {j + 1} is undefined")
    return float(np.imag(rates[j - 1] / lo) - np.imag(rates[j] / hi))


def saddle_index(state: StateLike) -> Union[int, np.ndarray]:
    """1-based index of the dominant mode."""
    b = _modes(state)
    return np.argmax(np.abs(b), axis=-1) + 1
