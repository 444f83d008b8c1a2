"""
Tests for saddle frames, sections and the local and global maps.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from cascade_lab.errors import (
    DegenerateAngle,
    DegenerateTarget,
    InfeasibleMass,
    NonPositiveInput,
    NoSolution,
    ParameterError,
)
from cascade_lab.frames import (
    NU02,
    SaddleFrame,
    cancellation_experiment,
    cancellation_target,
    fit_hamiltonian_coefficients,
    frame_transfer,
    from_saddle_frame,
    global_map,
    hamiltonian_parts,
    heteroclinic_crossing_time,
    hyperbolic_coordinates,
    local_map,
    pushforward_rhs,
    reduced_hamiltonian,
    reduced_rhs,
    straightened_heteroclinic,
    to_saddle_frame,
    transit_time,
)
from cascade_lab.integrator import integrate
from cascade_lab.toy import SQRT3, toy_field, toy_hamiltonian, toy_mass

SIGMA = 0.15


def test_frame_round_trip(unit_state):
    """Frame coordinates reproduce the state they came from."""
    frame = to_saddle_frame(unit_state, 3)
    back = from_saddle_frame(frame)
    assert np.max(np.abs(back - unit_state)) < 1e-13


def test_frame_needs_unit_mass(unit_state):
    """Frames live on the unit mass sphere."""
    with pytest.raises(ParameterError):
        to_saddle_frame(2.0 * unit_state, 3)


def test_frame_needs_leading_mode():
    """Without mode j its phase is undefined."""
    b = np.zeros(6, dtype=complex)
    b[1] = 1.0
    with pytest.raises(DegenerateAngle):
        to_saddle_frame(b, 3)


def test_infeasible_mass():
    """Hyperbolic coordinates too large for unit mass are rejected."""
    with pytest.raises(InfeasibleMass):
        from_saddle_frame(SaddleFrame(3, 6, p1=1.0, q1=-1.0))


@pytest.mark.parametrize("j", [1, 6])
def test_saddle_index_range(j):
    """Frames exist only at saddles with two neighbours."""
    with pytest.raises(ParameterError):
        SaddleFrame(j, 6)


def test_vector_round_trip(unit_state):
    """The real coordinate vector rebuilds the same frame."""
    frame = to_saddle_frame(unit_state, 3)
    again = SaddleFrame.from_vector(3, 6, frame.vector(), frame.theta)
    assert np.allclose(from_saddle_frame(again), unit_state, atol=1e-13)


def test_hyperbolic_coordinates_match_frame(unit_state):
    """The vectorised event coordinates agree with the frame."""
    frame = to_saddle_frame(unit_state, 3)
    assert hyperbolic_coordinates(unit_state, 3) == pytest.approx(frame.hyperbolic)


def test_reduced_rhs_matches_flow(cfg, unit_state):
    """reduced_rhs is the time derivative of the frame coordinates."""
    h = 1e-6
    frame = to_saddle_frame(unit_state, 3)
    ahead = integrate(toy_field, unit_state, 0.0, h, cfg).final
    behind = integrate(toy_field, unit_state, 0.0, -h, cfg).final
    numeric = (
        to_saddle_frame(ahead, 3).vector() - to_saddle_frame(behind, 3).vector()
    ) / (2 * h)
    assert np.max(np.abs(numeric - reduced_rhs(frame))) < 1e-6


def test_diagonal_hamiltonian_coefficients():
    """The quadratic part is sqrt(3)(p1 q1 + p2 q2) and nu02 = 1/sqrt(3)."""
    fit = fit_hamiltonian_coefficients()
    assert fit.residual < 1e-10
    assert fit.quadratic[(1, 1, 0, 0)] == pytest.approx(SQRT3, rel=1e-6)
    assert fit.quadratic[(0, 0, 1, 1)] == pytest.approx(SQRT3, rel=1e-6)
    assert fit.nu02 == pytest.approx(NU02, rel=1e-6)


def test_transit_time():
    """The transit time vanishes on the exit section."""
    assert transit_time(SIGMA, SIGMA) == 0.0
    assert transit_time(1e-3, SIGMA) == pytest.approx(math.log(150) / SQRT3)
    with pytest.raises(NonPositiveInput):
        transit_time(0.0, SIGMA)


def test_cancellation_target_solves_equation():
    """x* satisfies x^2 T(x) = C / (2 nu02 sigma) on the increasing branch."""
    c = 1e-6
    x = cancellation_target(c, SIGMA)
    assert x < SIGMA * math.exp(-0.5)
    lhs = x * x * transit_time(x, SIGMA)
    assert lhs == pytest.approx(c / (2 * NU02 * SIGMA), rel=1e-9)


@pytest.mark.parametrize("c", [0.0, -1e-4, 1.0])
def test_cancellation_target_without_solution(c):
    """Non-positive or too large right-hand sides have no solution."""
    with pytest.raises(NoSolution):
        cancellation_target(c, SIGMA)


def test_straightened_heteroclinic_inverse():
    """The crossing time inverts the straightened heteroclinic."""
    t = heteroclinic_crossing_time(0.2, t0=1.0)
    assert straightened_heteroclinic(t, t0=1.0) == pytest.approx(0.2)
    assert straightened_heteroclinic(1.0, t0=1.0) == pytest.approx(1 / math.sqrt(2))


def test_frame_transfer_matches_direct_frame(unit_state):
    """Moving a frame to saddle j+1 equals building it there directly."""
    moved = frame_transfer(to_saddle_frame(unit_state, 3))
    direct = to_saddle_frame(unit_state, 4)
    assert moved.j == 4
    assert moved.hyperbolic == pytest.approx(direct.hyperbolic, abs=1e-12)
    assert np.allclose(moved.c, direct.c, atol=1e-12)
    assert np.allclose(from_saddle_frame(moved), unit_state, atol=1e-12)


def test_frame_transfer_needs_next_mode():
    """With mode j+1 empty there is no frame at j+1."""
    with pytest.raises(DegenerateTarget):
        frame_transfer(SaddleFrame(3, 6, p1=0.01, q1=0.02))


def test_local_and_global_maps(cfg):
    """A point near the heteroclinic passes Sigma_3^out and lands on
    Sigma_4^in."""
    entry = SaddleFrame(3, 6, p1=0.0, q1=SIGMA, p2=1e-3, q2=0.0)
    out = local_map(entry, cfg, SIGMA)
    assert out.p2 == pytest.approx(SIGMA, abs=1e-8)
    assert out.time > 0
    landed = global_map(out, cfg, SIGMA)
    assert landed.j == 4
    assert landed.q1 == pytest.approx(SIGMA, abs=1e-8)
    assert toy_mass(from_saddle_frame(landed)) == pytest.approx(1.0, abs=1e-9)


def test_local_map_needs_entry_section(cfg):
    """Only points on Sigma_in are accepted."""
    with pytest.raises(ParameterError):
        local_map(SaddleFrame(3, 6, q1=0.3 * SIGMA, p2=1e-3), cfg, SIGMA)


def test_global_map_needs_exit_section(cfg):
    """Only points on Sigma_out are accepted."""
    frame = SaddleFrame(3, 6, q1=1e-3, p2=0.5 * SIGMA)
    with pytest.raises(ParameterError):
        global_map(frame, cfg, SIGMA)


def test_transit_time_estimate(cfg):
    """The passage time is close to ln(sigma / p2) / sqrt(3) for small p2."""
    entry = SaddleFrame(3, 6, q1=SIGMA, p2=1e-4)
    out = local_map(entry, cfg, SIGMA)
    expected = transit_time(1e-4, SIGMA)
    assert out.time == pytest.approx(expected, rel=0.1)


def test_cancellation_improves_with_delta(cfg):
    """The cancelled exit p1 shrinks relative to the baseline as delta falls."""
    ratios = [
        cancellation_experiment(d, SIGMA, cfg).ratio for d in (1e-2, 1e-3, 1e-4)
    ]
    assert all(b < a for a, b in zip(ratios, ratios[1:])), f"ratios {ratios}"
    assert ratios[-1] < 0.5


def test_cancelled_entry_is_frame_copy():
    """Replacing p2 keeps every other coordinate of an entry."""
    entry = SaddleFrame(3, 6, p1=-1e-5, q1=SIGMA, p2=1e-3)
    flat = replace(entry, p2=0.0)
    assert flat.q1 == SIGMA and flat.p1 == entry.p1


def test_reduced_hamiltonian_vanishes_at_saddle():
    """T_j is the zero of the reduced Hamiltonian."""
    assert reduced_hamiltonian(SaddleFrame(3, 6)) == pytest.approx(0.0, abs=1e-15)
    assert np.max(np.abs(reduced_rhs(SaddleFrame(3, 6)))) < 1e-15


def spread_state(j: int, n: int = 6, seed: int = 8) -> np.ndarray:
    """Unit-mass state led by mode j with every other mode well populated."""
    rng = np.random.default_rng(seed)
    b = 0.25 * (rng.normal(size=n) + 1j * rng.normal(size=n))
    b[j - 1] = 1.0
    return b / np.linalg.norm(b)


@pytest.mark.parametrize("j", [2, 3, 4, 5])
def test_reduced_hamiltonian_is_pullback(j):
    """The closed form equals the toy Hamiltonian minus its value on T_j."""
    b = spread_state(j)
    frame = to_saddle_frame(b, j)
    assert reduced_hamiltonian(frame) == pytest.approx(
        toy_hamiltonian(b) - 0.25, abs=1e-12
    )


@pytest.mark.parametrize("j", [2, 3, 4, 5])
def test_reduced_rhs_is_pushforward(j):
    """The Hamiltonian field agrees with the toy field seen through the chart."""
    frame = to_saddle_frame(spread_state(j), j)
    assert np.max(np.abs(reduced_rhs(frame) - pushforward_rhs(frame))) < 1e-12


def test_hamiltonian_parts_separate():
    """Hyperbolic and elliptic data feed only their own parts."""
    x = 0.1
    hyp = hamiltonian_parts(SaddleFrame(3, 6, q1=x, p2=x))
    assert hyp.quadratic == pytest.approx(0.0)
    assert hyp.ell == 0.0 and hyp.mix == 0.0
    assert -2.0 / SQRT3 * hyp.hyp == pytest.approx(NU02 * x**4)

    c = np.zeros(6, dtype=complex)
    c[4] = 0.2j
    ell = hamiltonian_parts(SaddleFrame(3, 6, c=c))
    assert ell.hyp == 0.0 and ell.mix == 0.0
    assert ell.quadratic == pytest.approx(-0.5 * 0.04)
    assert ell.ell == pytest.approx(0.5 * 0.2**4)


def test_linearisation_at_saddle():
    """Rates +-sqrt(3) twice on the saddle block, +-i on each elliptic pair."""
    h = 1e-6
    zero = np.zeros(10)
    columns = []
    for k in range(10):
        step = np.zeros(10)
        step[k] = h
        ahead = reduced_rhs(SaddleFrame.from_vector(3, 6, zero + step))
        behind = reduced_rhs(SaddleFrame.from_vector(3, 6, zero - step))
        columns.append((ahead - behind) / (2 * h))
    eigenvalues = np.linalg.eigvals(np.column_stack(columns))
    real = np.sort(eigenvalues[np.abs(eigenvalues.imag) < 1e-6].real)
    assert real == pytest.approx([-SQRT3, -SQRT3, SQRT3, SQRT3], abs=1e-8)
    imag = np.sort(eigenvalues[np.abs(eigenvalues.imag) > 0.5].imag)
    assert imag == pytest.approx([-1, -1, -1, 1, 1, 1], abs=1e-8)


def test_unstable_rate():
    """A small p1 alone grows at rate sqrt(3)."""
    eps = 1e-5
    assert reduced_rhs(SaddleFrame(3, 6, p1=eps))[0] == pytest.approx(
        SQRT3 * eps, rel=1e-8
    )
