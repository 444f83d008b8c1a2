"""
Tests for the resonant set: geometry, verification and Sobolev sums.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from cascade_lab.lattice import (
    Family,
    LambdaSet,
    _pair_children,
    build_lambda,
    convolution_closure,
    enumerate_resonant_rectangles,
    growth_bound,
    is_geometric_rectangle,
    is_resonant_rectangle,
    primitive_triples,
    pythagorean_rotations,
    sobolev_sums,
    square_family,
    verify_lambda,
)
from cascade_lab.params import LambdaBuildParams

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def test_unit_square_is_resonant():
    """The unit square satisfies both resonance conditions."""
    assert is_resonant_rectangle(*SQUARE)
    assert is_geometric_rectangle((0, 0), (1, 0), (1, 1), (0, 1))


@pytest.mark.parametrize(
    "quad",
    [
        [(0, 0), (0, 0), (1, 1), (1, 1)],
        [(0, 0), (1, 0), (2, 1), (1, 1)],
        [(0, 0), (2, 0), (1, 1), (0, 1)],
    ],
)
def test_non_rectangles(quad):
    """Degenerate quadruples and parallelograms are not resonant."""
    assert not is_resonant_rectangle(*quad)


def test_tilted_rectangle():
    """Rectangles need not be axis parallel."""
    quad = [(0, 0), (2, 1), (1, 3), (-1, 2)]
    assert is_resonant_rectangle(*quad)
    assert is_geometric_rectangle(quad[0], quad[1], quad[2], quad[3])


def test_enumerate_rectangles():
    """The square holds exactly one rectangle up to symmetry."""
    found = enumerate_resonant_rectangles(SQUARE)
    assert len(found) == 1
    assert found[0].vertices == frozenset(SQUARE)


def test_primitive_triples():
    """Euclid's formula lists the primitive triples by hypotenuse."""
    assert primitive_triples(30) == [
        (3, 4, 5),
        (5, 12, 13),
        (15, 8, 17),
        (7, 24, 25),
        (21, 20, 29),
    ]
    for a, b, c in primitive_triples(200):
        assert a * a + b * b == c * c
        assert math.gcd(a, b) == 1


def test_pythagorean_rotations():
    """Vectors of length 5 other than +-(5, 0)."""
    found = pythagorean_rotations((5, 0))
    assert len(found) == 10
    assert (3, 4) in found and (0, -5) in found
    assert (5, 0) not in found and (-5, 0) not in found


def test_convolution_closure():
    """n1 - n2 + n3 over two collinear points."""
    assert convolution_closure([(0, 0), (1, 0)]) == {(-1, 0), (0, 0), (1, 0), (2, 0)}
    assert convolution_closure([]) == set()


def test_links(make_circle_lambda):
    """Family records give spouses, children, siblings and parents."""
    lam = make_circle_lambda(3)
    link = lam.links((3, 4))
    assert link.spouse == (-3, -4)
    assert link.children == ((0, 5), (0, -5))
    assert link.sibling == (-3, -4)
    assert link.parents == ((5, 0), (-5, 0))
    assert not lam.is_linked((7, 7))


def test_square_family_fails_only_no_spreading():
    """The square meets every condition except no-spreading."""
    verdict = verify_lambda(square_family())
    failed = [name for name, ok in verdict.conditions.items() if not ok]
    assert failed == ["no_spreading"], f"failed: {failed}"
    assert verdict.witnesses["no_spreading"]


def test_duplicate_point_breaks_distinctness():
    """A point in two generations violates distinctness."""
    lam = LambdaSet([[(0, 0), (1, 1)], [(1, 0), (0, 0)]])
    verdict = verify_lambda(lam)
    assert not verdict.distinct
    assert verdict.witnesses["distinct"][0]["generations"] == [1, 2]


def test_missing_corner_breaks_closure():
    """Three corners of a rectangle without the fourth violate closure."""
    lam = LambdaSet([[(0, 0), (1, 0)], [(0, 1), (5, 7)]])
    verdict = verify_lambda(lam)
    assert not verdict.closure
    assert verdict.witnesses["closure"][0]["missing"] == [1, 1]


def test_extra_rectangle_breaks_faithfulness(make_circle_lambda):
    """Rectangles between non-consecutive generations are not families."""
    verdict = verify_lambda(make_circle_lambda(3))
    assert not verdict.faithfulness
    assert verdict.spouse_children and verdict.sibling_parents


def test_family_across_wrong_generations(make_circle_lambda):
    """A family filed under the wrong generation is rejected."""
    lam = make_circle_lambda(3)
    lam.families[1] = Family(1, lam.families[1].parents, lam.families[1].children)
    verdict = verify_lambda(lam)
    assert not verdict.spouse_children


def test_spouse_equal_to_sibling_is_degenerate(make_circle_lambda):
    """Chained diameters make a point's spouse its sibling too."""
    verdict = verify_lambda(make_circle_lambda(3))
    assert not verdict.nondegeneracy


def test_json_round_trip(make_circle_lambda):
    """Generations and families survive serialisation."""
    lam = make_circle_lambda(4)
    back = LambdaSet.from_json(lam.to_json())
    assert back.generations == lam.generations
    assert back.families == lam.families


def test_scaled():
    """Scaling multiplies every point and family vertex."""
    lam = square_family().scaled(3)
    assert lam.generations[0] == [(0, 0), (3, 3)]
    assert lam.families[0].children == ((3, 0), (0, 3))


def test_build_params_validation():
    """Odd generation sizes and single families beyond N = 2 are refused."""
    with pytest.raises(ValidationError):
        LambdaBuildParams(N=3, gen_size=3)
    with pytest.raises(ValidationError):
        LambdaBuildParams(N=3, gen_size=2)
    assert LambdaBuildParams(N=2, gen_size=2).gen_size == 2


def test_sobolev_sums_on_circle(make_circle_lambda):
    """Points on one circle carry equal weights."""
    sums, ratio = sobolev_sums(make_circle_lambda(5), 1.5)
    assert sums == pytest.approx([2 * 25**1.5] * 5)
    assert ratio == pytest.approx(1.0)


def test_sobolev_sums_need_four_generations(make_circle_lambda):
    """S_{N-1} / S_3 needs at least four generations."""
    _, ratio = sobolev_sums(make_circle_lambda(3), 1.5)
    assert ratio is None


@pytest.mark.parametrize("s,n,expected", [(1.5, 6, 1.0), (2.0, 8, 8.0), (1.0, 9, 0.5)])
def test_growth_bound(s, n, expected):
    """Half of 2^((s-1)(N-4))."""
    assert growth_bound(s, n) == pytest.approx(expected)


def test_growth_bound_for_doubling_generations():
    """Doubling |n| per generation meets the growth bound."""
    gens = [[(2**j, 0), (0, 2**j)] for j in range(6)]
    sums, ratio = sobolev_sums(LambdaSet(gens), 1.5)
    assert ratio is not None
    assert ratio >= growth_bound(1.5, 6)
    assert sums[4] / sums[2] == pytest.approx(2 ** (2 * 2 * 1.5))


def test_integer_sums_are_exact():
    """Integer s sums in integers, so a ratio 1 + 2e-16 is not lost."""
    gens = [
        [(2, 3), (3, 2)],
        [(4, 5), (5, 4)],
        [(10**8, 0), (1, 0)],
        [(10**8, 1), (1, 1)],
        [(6, 7), (7, 6)],
    ]
    sums, ratio = sobolev_sums(LambdaSet(gens), 1.0)
    assert ratio == float(Fraction(10**16 + 3, 10**16 + 1))
    assert ratio > 1.0
    assert sums[0] == 26.0


def test_spread_pairing_marries_like_with_like():
    """Larger children marry larger children, never a sibling."""
    families = [
        Family(1, ((0, 0), (4, 4)), ((1, 0), (3, 4))),
        Family(1, ((9, 0), (5, 4)), ((10, 1), (4, 3))),
    ]
    pairs = _pair_children(families, np.random.default_rng(0), spread=True)
    assert pairs == [((10, 1), (3, 4)), ((4, 3), (1, 0))]
    siblings = {frozenset(f.children) for f in families}
    assert all(frozenset(p) not in siblings for p in pairs)


@pytest.mark.slow
def test_build_lambda_passes_verification():
    """A three-generation Lambda with four points per generation verifies."""
    lam = build_lambda(LambdaBuildParams(N=3, gen_size=4, radius=10_000, seed=7))
    assert lam.n == 3
    assert all(len(gen) == 4 for gen in lam.generations)
    verdict = verify_lambda(lam)
    assert verdict.ok, f"failed: {verdict.witnesses}"


@pytest.mark.slow
def test_build_lambda_is_reproducible():
    """The same seed builds the same set."""
    params = LambdaBuildParams(N=2, gen_size=4, radius=500, seed=3)
    assert build_lambda(params).to_json() == build_lambda(params).to_json()


@pytest.mark.slow
def test_build_lambda_meets_growth_bound():
    """A six-generation set built for growth verifies and meets the bound."""
    params = LambdaBuildParams(N=6, gen_size=4, seed=7, growth_s=1.5)
    lam = build_lambda(params)
    assert lam.n == 6
    verdict = verify_lambda(lam)
    assert verdict.ok, f"failed: {verdict.witnesses}"
    _, ratio = sobolev_sums(lam, 1.5)
    assert ratio is not None and ratio >= growth_bound(1.5, 6)
    # children share their parents' circle, so sum |n|^2 is the same each time
    plain, _ = sobolev_sums(lam, 1.0)
    assert len(set(plain)) == 1
