"""
Test fixtures for cascade-lab tests.
"""

from typing import List, Tuple

import numpy as np
import pytest

from cascade_lab.lattice import Family, LambdaSet, Point
from cascade_lab.params import ExactOrbit, IntegratorConfig, OrbitKind
from cascade_lab.toy import exact_orbit_point

# Diameters of the circle |n| = 5; any two of them span a rectangle
CIRCLE_DIAMETERS: List[Tuple[Point, Point]] = [
    ((5, 0), (-5, 0)),
    ((3, 4), (-3, -4)),
    ((0, 5), (0, -5)),
    ((-3, 4), (3, -4)),
    ((4, 3), (-4, -3)),
    ((4, -3), (-4, 3)),
]


def circle_lambda(n: int) -> LambdaSet:
    """Linked set with one family per generation, all on one circle.

    Every point has the relatives the family-form flow needs, but the set is
    not faithful: non-consecutive diameters form rectangles too.
    """
    gens = [list(d) for d in CIRCLE_DIAMETERS[:n]]
    families = [
        Family(j, CIRCLE_DIAMETERS[j - 1], CIRCLE_DIAMETERS[j]) for j in range(1, n)
    ]
    return LambdaSet(gens, families)


@pytest.fixture
def cfg() -> IntegratorConfig:
    """Default integrator tolerances."""
    return IntegratorConfig()


@pytest.fixture
def make_circle_lambda():
    """Factory for linked circle sets of a given depth."""
    return circle_lambda


@pytest.fixture
def linked_lambda() -> LambdaSet:
    """Five-generation linked set with small coordinates."""
    return circle_lambda(5)


@pytest.fixture
def heteroclinic_start() -> np.ndarray:
    """Point of gamma_2^+ at t = -1 in the five-mode toy model."""
    orbit = ExactOrbit(kind=OrbitKind.HETEROCLINIC_PLUS, j=2, n=5)
    return np.asarray(exact_orbit_point(orbit, -1.0))


@pytest.fixture
def unit_state() -> np.ndarray:
    """Six-mode unit-mass state near T_3 with every mode populated."""
    rng = np.random.default_rng(3)
    b = 0.05 * (rng.normal(size=6) + 1j * rng.normal(size=6))
    b[2] = 1.0
    return b / np.linalg.norm(b)
