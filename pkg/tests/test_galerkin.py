"""
Tests for the Fourier-side cubic systems, the gauge change and the lift.
"""

from typing import Any

import numpy as np
import pytest

from cascade_lab.errors import OutOfWindow, ParameterError, UnlinkedPoint
from cascade_lab.galerkin import (
    CubicField,
    GalerkinState,
    GalerkinTrajectory,
    Partner,
    ResonantSystem,
    approximation_error,
    approximation_experiment,
    auto_gauge,
    evolve,
    full_flow,
    full_rhs,
    galerkin_mass,
    gauge_transform,
    generation_sobolev,
    l1_deviation,
    lift_toy_orbit,
    mass_off_lambda,
    reduction_error,
    resonance_partners,
    resonant_rhs,
    resonant_truncation_rhs,
    sobolev_norm,
)
from cascade_lab.integrator import integrate
from cascade_lab.lattice import LambdaSet, convolution_closure, square_family
from cascade_lab.params import LiftConfig
from cascade_lab.toy import toy_field, toy_rhs

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]

# Two-mode toy state for the one-family square set
SQUARE_START = np.array([0.8, 0.6j])


def generation_constant(lam: LambdaSet, b: np.ndarray) -> GalerkinState:
    support = tuple(lam.points)
    return GalerkinState(support, [b[lam.generation_of[p] - 1] for p in support])


def test_state_validation():
    """Supports are distinct and match the amplitudes."""
    with pytest.raises(ParameterError):
        GalerkinState(((0, 0), (0, 0)), [1.0, 2.0])
    with pytest.raises(ParameterError):
        GalerkinState(((0, 0),), [1.0, 2.0])


def test_state_on_other_support():
    """Missing modes read as zero."""
    state = GalerkinState.from_mapping({(1, 0): 2j, (0, 3): 1.0})
    assert state.support == ((0, 3), (1, 0))
    assert list(state.on([(1, 0), (5, 5)])) == [2j, 0j]


def test_state_json():
    """A state written to JSON reads back unchanged."""
    state = GalerkinState(((1, 2), (-3, 0)), [0.5 - 1j, 2.0], time=0.5)
    back = GalerkinState.from_json(state.to_json())
    assert back.support == state.support
    assert np.array_equal(back.amplitudes, state.amplitudes)


def test_single_mode_rates():
    """One mode rotates with |n|^2 + |a|^2."""
    state = GalerkinState(((1, 2),), [0.5])
    rates = full_rhs(state)
    assert rates.support == ((1, 2),)
    assert rates.amplitudes[0] == pytest.approx(1j * (5 * 0.5 + 0.125))
    trunc = resonant_truncation_rhs(state)
    assert trunc.amplitudes[0] == pytest.approx(rates.amplitudes[0])


def test_full_rhs_reaches_the_closure():
    """Two collinear modes feed their one-step closure."""
    state = GalerkinState(((0, 0), (1, 0)), [1.0, 1.0])
    rates = full_rhs(state)
    assert rates.support == ((-1, 0), (0, 0), (1, 0), (2, 0))
    assert abs(rates.amplitudes[0]) > 0 and abs(rates.amplitudes[3]) > 0


def test_resonance_partners():
    """The square feeds each corner through the opposite diagonal."""
    partners = resonance_partners((0, 1), SQUARE)
    assert Partner((0, 0), (1, 0), (1, 1), True) in partners
    trivial = [p for p in partners if not p.nontrivial]
    assert trivial and all(p.n1 == (0, 1) or p.n3 == (0, 1) for p in trivial)


@pytest.mark.parametrize("resonant_only", [False, True])
def test_cubic_flows_conserve_mass(cfg, resonant_only):
    """Truncated cubic flows keep the l2 mass."""
    support = [(0, 0), (1, 0), (1, 1), (0, 1), (2, 1)]
    rng = np.random.default_rng(5)
    start = GalerkinState(tuple(support), 0.3 * rng.normal(size=5) + 0.1j)
    field = CubicField(support, resonant_only=resonant_only)
    run = evolve(field, start, 5.0, cfg, samples=64)
    assert np.max(np.abs(run.mass - run.mass[0])) < 1e-10


def test_family_form_matches_toy(linked_lambda, heteroclinic_start):
    """On generation-constant data the family form is the toy field."""
    beta = generation_constant(linked_lambda, heteroclinic_start)
    rates = resonant_rhs(beta, linked_lambda)
    expected = generation_constant(linked_lambda, toy_rhs(heteroclinic_start))
    assert np.allclose(rates.amplitudes, expected.amplitudes, atol=1e-14)


def test_unlinked_points(linked_lambda):
    """Points outside Lambda or without relatives have no family form."""
    with pytest.raises(UnlinkedPoint):
        ResonantSystem(linked_lambda, [(9, 9)])
    with pytest.raises(UnlinkedPoint):
        ResonantSystem(LambdaSet(linked_lambda.generations, []))


def test_gauge_round_trip():
    """The inverse gauge undoes the forward one."""
    state = GalerkinState(((1, 0), (2, 3)), [1.0, 0.5j])
    there = gauge_transform(state, 2.0, 0.7)
    back = gauge_transform(there, 2.0, 0.7, direction=-1)
    assert np.allclose(back.amplitudes, state.amplitudes)
    assert there.amplitudes[0] == pytest.approx(np.exp(1j * 3.0 * 0.7))
    with pytest.raises(ParameterError):
        gauge_transform(state, 2.0, 0.7, direction=0)


def test_auto_gauge():
    """The gauge constant is twice the mass."""
    state = GalerkinState(((1, 0), (2, 3)), [1.0, 0.5j])
    assert galerkin_mass(state) == pytest.approx(1.25)
    assert auto_gauge(state) == pytest.approx(2.5)


def test_sobolev_norm():
    """(1 + |n|^2)^s weights."""
    assert sobolev_norm(GalerkinState(((1, 0),), [1.0]), 1.0) == pytest.approx(
        np.sqrt(2.0)
    )
    with pytest.raises(ParameterError):
        sobolev_norm(GalerkinState(((1, 0),), [1.0]), -0.5)


def test_generation_sobolev(linked_lambda):
    """Each generation of the circle set weighs 2 * 25^s."""
    ones = generation_constant(linked_lambda, np.ones(5))
    assert generation_sobolev(ones, linked_lambda, 1.0) == pytest.approx([50.0] * 5)


def test_lift_scales_amplitude_and_time(cfg, linked_lambda, heteroclinic_start):
    """beta(lambda^2 t) = b(t) / lambda on every generation."""
    toy = integrate(toy_field, heteroclinic_start, 0.0, 1.0, cfg)
    lifted = lift_toy_orbit(toy, linked_lambda, LiftConfig(lam=2.0), samples=5)
    assert lifted.times[-1] == pytest.approx(4.0)
    first = lifted.state(0).as_dict()
    for j, gen in enumerate(linked_lambda.generations):
        for p in gen:
            assert first[p] == pytest.approx(heteroclinic_start[j] / 2.0)
    assert lifted.mass[0] == pytest.approx(2 * 1.0 / 4.0)


def test_lift_outside_window(cfg, linked_lambda, heteroclinic_start):
    """Times beyond the toy window are refused."""
    toy = integrate(toy_field, heteroclinic_start, 0.0, 1.0, cfg)
    with pytest.raises(OutOfWindow):
        lift_toy_orbit(
            toy, linked_lambda, LiftConfig(lam=2.0), times=np.array([0.0, 5.0])
        )


def test_lift_needs_matching_generations(cfg, make_circle_lambda, heteroclinic_start):
    """The toy orbit needs one mode per generation."""
    toy = integrate(toy_field, heteroclinic_start, 0.0, 1.0, cfg)
    with pytest.raises(ParameterError):
        lift_toy_orbit(toy, make_circle_lambda(4), LiftConfig(lam=1.0))


def test_l1_deviation_needs_common_grid(cfg, linked_lambda, heteroclinic_start):
    """Trajectories on different time grids cannot be compared."""
    toy = integrate(toy_field, heteroclinic_start, 0.0, 1.0, cfg)
    one = lift_toy_orbit(toy, linked_lambda, LiftConfig(lam=1.0), samples=5)
    two = lift_toy_orbit(toy, linked_lambda, LiftConfig(lam=1.0), samples=7)
    with pytest.raises(ParameterError):
        l1_deviation(one, two)
    assert np.max(l1_deviation(one, one)) == 0.0


def test_reduction_to_toy_model(cfg, linked_lambda, heteroclinic_start):
    """Generation-constant data stays constant and follows the toy flow."""
    check = reduction_error(linked_lambda, heteroclinic_start, 2.0, cfg)
    assert check.spread < 1e-9, f"spread {check.spread:.3g}"
    assert check.deviation < 1e-8, f"deviation {check.deviation:.3g}"
    assert check.mass_drift < 1e-10


def test_approximation_experiment(cfg, linked_lambda, heteroclinic_start):
    """The family-form flow tracks the lifted toy orbit for every lambda."""
    results = approximation_experiment(
        [2.0, 4.0], linked_lambda, heteroclinic_start, 1.0, cfg, samples=64
    )
    assert [r.horizon for r in results] == pytest.approx([4.0, 16.0])
    for r in results:
        assert r.series.shape == (64,)
        assert r.max_error < 1e-7, f"lambda={r.lam}: {r.max_error:.3g}"


def test_approximation_error_through_gauge(cfg, linked_lambda, heteroclinic_start):
    """A gauged copy of the lift has zero approximation error."""
    toy = integrate(toy_field, heteroclinic_start, 0.0, 1.0, cfg)
    lifted = lift_toy_orbit(toy, linked_lambda, LiftConfig(lam=2.0), samples=9)
    phase = np.exp(1j * (1.5 + 25.0) * lifted.times)[:, None]
    alpha = GalerkinTrajectory(lifted.times, lifted.support, lifted.values * phase)
    assert np.max(approximation_error(alpha, lifted, 1.5)) < 1e-12
    assert np.max(approximation_error(alpha, lifted, 0.0)) > 1e-3


def test_convolution_matches_direct_sum():
    """The convolution table reproduces the triple sum written out."""
    support = [(0, 0), (1, 0), (1, 1), (0, 1), (2, 1), (-1, 3)]
    rng = np.random.default_rng(11)
    a = rng.normal(size=6) + 1j * rng.normal(size=6)
    index = {p: k for k, p in enumerate(support)}
    direct = np.zeros(6, dtype=complex)
    for i, n1 in enumerate(support):
        for j, n2 in enumerate(support):
            for k, n3 in enumerate(support):
                n = (n1[0] - n2[0] + n3[0], n1[1] - n2[1] + n3[1])
                if n in index:
                    direct[index[n]] += a[i] * np.conj(a[j]) * a[k]
    assert np.allclose(CubicField(support).convolution(a), direct, atol=1e-13)


def test_cubic_rates_are_gauge_covariant(linked_lambda, heteroclinic_start):
    """A constant phase on the data rotates every rate by the same phase."""
    phase = np.exp(0.9j)
    state = GalerkinState(tuple(SQUARE + [(2, 1)]), [0.3, -0.2j, 0.4, 0.1, 0.05])
    turned = GalerkinState(state.support, phase * state.amplitudes)
    for rhs in (full_rhs, resonant_truncation_rhs):
        assert np.allclose(
            rhs(turned).amplitudes, phase * rhs(state).amplitudes, atol=1e-14
        )
    beta = generation_constant(linked_lambda, heteroclinic_start)
    beta_turned = generation_constant(linked_lambda, phase * heteroclinic_start)
    assert np.allclose(
        resonant_rhs(beta_turned, linked_lambda).amplitudes,
        phase * resonant_rhs(beta, linked_lambda).amplitudes,
        atol=1e-14,
    )


def test_truncation_matches_lift_on_a_faithful_set(cfg):
    """On a single rectangle the gauged truncation is the lifted toy orbit."""
    results = approximation_experiment(
        [1.0, 2.0], square_family(), SQUARE_START, 1.0, cfg, 32, flow="truncation"
    )
    for r in results:
        assert r.max_error < 1e-8, f"lambda={r.lam}: {r.max_error:.3g}"
        assert r.leaked_mass == 0.0


def test_full_flow_runs_on_the_closure(cfg):
    """The full flow leaks a little mass off Lambda and keeps the total."""
    lam = square_family()
    closure = tuple(sorted(convolution_closure(lam.points)))
    toy = integrate(toy_field, SQUARE_START, 0.0, 0.5, cfg)
    lifted = lift_toy_orbit(toy, lam, LiftConfig(lam=4.0), samples=16)
    run = evolve(
        full_flow(closure), lifted.state(0), lifted.times[-1], cfg, 16, closure
    )
    assert np.max(np.abs(run.mass - run.mass[0])) < 1e-10
    assert 0.0 < mass_off_lambda(run, lam) < 0.1 * run.mass[0]
    result = approximation_experiment(
        [4.0], lam, SQUARE_START, 0.5, cfg, samples=16, flow="full"
    )[0]
    assert result.leaked_mass == pytest.approx(mass_off_lambda(run, lam))
    assert result.max_error > 1e-8


def test_unknown_flow(cfg):
    flow: Any = "other"
    with pytest.raises(ParameterError):
        approximation_experiment(
            [1.0], square_family(), SQUARE_START, 0.5, cfg, flow=flow
        )


@pytest.mark.slow
def test_full_flow_error_falls_with_lambda(cfg):
    """The full flow approaches the lift as lambda grows."""
    results = approximation_experiment(
        [4.0, 8.0, 16.0], square_family(), SQUARE_START, 1.0, cfg, 128, flow="full"
    )
    errors = [r.max_error for r in results]
    assert errors == sorted(errors, reverse=True), errors
    leaks = [r.leaked_mass for r in results]
    assert leaks == sorted(leaks, reverse=True), leaks


@pytest.mark.slow
def test_truncation_error_falls_with_lambda(cfg, linked_lambda):
    """On the five-generation circle set the truncation error scales as
    1 / lambda."""
    rng = np.random.default_rng(2)
    b0 = rng.normal(size=5) + 1j * rng.normal(size=5)
    b0 /= np.linalg.norm(b0)
    results = approximation_experiment(
        [4.0, 8.0, 16.0], linked_lambda, b0, 1.0, cfg, 128, flow="truncation"
    )
    errors = [r.max_error for r in results]
    assert errors == sorted(errors, reverse=True), errors
    assert errors[0] / errors[1] == pytest.approx(2.0, rel=1e-3)
    assert errors[1] / errors[2] == pytest.approx(2.0, rel=1e-3)
