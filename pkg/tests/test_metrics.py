"""Overlaps, reduced density matrices, and phase figures of merit."""
import math

import numpy as np
import pytest

from triwave import (
    ReducedDensityMatrix,
    ThreeModeState,
    conversion_rate_down,
    conversion_rate_up,
    evolve,
    make_twin_beam,
    matched_pcs_overlap,
    matched_pcs_overlap_rho,
    mean_photon,
    overlap_with_product,
    pcs_amplitudes,
    phase_distribution,
    purity,
    reciprocal_peak_likelihood,
    reduce_mode_c,
)


def pcs_density(lam, cutoff=160):
    vec = lam ** np.arange(cutoff + 1)
    vec = vec / np.linalg.norm(vec)
    return ReducedDensityMatrix(mode="c", matrix=np.outer(vec, vec.conj()))


def bell_like_state():
    return ThreeModeState.from_fock_dict({(1, 1, 0): 1.0, (0, 0, 1): 1.0})


def test_overlap_single_mode_bra():
    state = bell_like_state()
    # projecting mode a on vacuum keeps only the converted branch
    assert abs(overlap_with_product(state, bra_a=np.array([1.0, 0.0])) - 1 / math.sqrt(2)) < 1e-12
    assert abs(overlap_with_product(state, bra_c=np.array([0.0, 1.0])) - 1 / math.sqrt(2)) < 1e-12


def test_overlap_full_product_bra():
    state = ThreeModeState.from_fock_dict({(0, 0, 1): 1.0j})
    value = overlap_with_product(
        state,
        bra_a=np.array([1.0]),
        bra_b=np.array([1.0]),
        bra_c=np.array([0.0, 1.0]),
    )
    assert abs(value - 1.0) < 1e-14


def test_overlap_short_bra_treated_as_zero_padded():
    state = bell_like_state()
    # reference with no single-photon component misses half the state
    assert abs(overlap_with_product(state, bra_c=np.array([1.0])) - 1 / math.sqrt(2)) < 1e-12


def test_overlap_joint_pair_bra():
    state = bell_like_state()
    bra_ab = np.zeros((2, 2))
    bra_ab[1, 1] = 1.0
    assert abs(overlap_with_product(state, bra_ab=bra_ab) - 1 / math.sqrt(2)) < 1e-12


def test_overlap_joint_bra_excludes_per_mode_bras():
    state = bell_like_state()
    with pytest.raises(ValueError):
        overlap_with_product(state, bra_a=np.array([1.0]), bra_ab=np.eye(2))


def test_overlap_no_bra_is_norm():
    state = ThreeModeState.from_fock_dict({(1, 0, 0): 0.6, (0, 1, 0): 0.8}, normalize=False)
    assert abs(overlap_with_product(state) - 1.0) < 1e-14


def test_reduce_mode_c_entangled():
    rho = reduce_mode_c(bell_like_state())
    assert rho.matrix.shape == (2, 2)
    assert np.allclose(rho.matrix, np.diag([0.5, 0.5]), atol=1e-14)
    rho.validate()
    assert abs(purity(rho) - 0.5) < 1e-13


def test_reduce_mode_c_product():
    state = ThreeModeState.from_fock_dict({(0, 0, 0): 1.0, (0, 0, 1): 1.0})
    rho = reduce_mode_c(state)
    assert np.allclose(rho.matrix, 0.5 * np.ones((2, 2)), atol=1e-14)
    assert abs(purity(rho) - 1.0) < 1e-13


def test_reduce_mode_c_cutoff_control():
    state = bell_like_state()
    rho = reduce_mode_c(state, cutoff=4)
    assert rho.matrix.shape == (5, 5)
    with pytest.raises(ValueError):
        reduce_mode_c(state, cutoff=0)


def test_validate_rejects_bad_matrices():
    bad_herm = ReducedDensityMatrix(mode="c", matrix=np.array([[0.5, 0.1], [0.3, 0.5]]))
    with pytest.raises(ValueError):
        bad_herm.validate()
    bad_trace = ReducedDensityMatrix(mode="c", matrix=np.diag([0.7, 0.7]))
    with pytest.raises(ValueError):
        bad_trace.validate()
    bad_positive = ReducedDensityMatrix(mode="c", matrix=np.array([[1.5, 0.0], [0.0, -0.5]]))
    with pytest.raises(ValueError):
        bad_positive.validate()


def test_mean_photon_values():
    state = ThreeModeState.from_fock_dict({(2, 1, 3): 1.0})
    assert mean_photon(state, "a") == 2.0
    assert mean_photon(state, "b") == 1.0
    assert mean_photon(state, "c") == 3.0
    with pytest.raises(ValueError):
        mean_photon(state, "d")


def test_conversion_rates():
    state = ThreeModeState.from_fock_dict({(1, 1, 0): 1.0})
    assert abs(conversion_rate_down(state, pump_energy=1.0) - 1.0) < 1e-14
    converted = ThreeModeState.from_fock_dict({(0, 0, 1): 1.0})
    assert abs(conversion_rate_up(converted, twin_beam_energy=2.0) - 1.0) < 1e-14


def test_phase_distribution_closed_form():
    lam = 0.6
    rho = pcs_density(lam)
    p = phase_distribution(rho, 512)
    phis = 2 * np.pi * np.arange(512) / 512
    expected = (1 - lam**2) / (1 - 2 * lam * np.cos(phis) + lam**2) / (2 * np.pi)
    # truncation at lam^160 makes the profiles equal to near machine level
    assert np.allclose(p, expected, atol=1e-10)


def test_phase_distribution_is_normalized_density():
    rho = pcs_density(0.45 * np.exp(1.1j))
    p = phase_distribution(rho, 1024)
    assert np.all(p > -1e-10)
    assert abs(p.mean() * 2 * np.pi - 1.0) < 1e-6


def test_phase_distribution_grid_validation():
    with pytest.raises(ValueError):
        phase_distribution(pcs_density(0.3), 128)


def test_vacuum_phase_is_uniform():
    rho = ReducedDensityMatrix(mode="c", matrix=np.eye(1, dtype=complex))
    p = phase_distribution(rho)
    assert np.allclose(p, 1 / (2 * np.pi), atol=1e-14)
    assert abs(reciprocal_peak_likelihood(rho) - 2 * np.pi) < 1e-12


def test_reciprocal_peak_likelihood_pcs_closed_form():
    for lam in (0.3, 0.6, 0.85):
        expected = 2 * np.pi * (1 - lam) / (1 + lam)
        assert abs(reciprocal_peak_likelihood(pcs_density(lam)) - expected) < 1e-9


def test_reciprocal_peak_likelihood_off_grid_peak():
    # peak phase rotated between grid points exercises the refinement
    lam = 0.6 * np.exp(0.37j)
    expected = 2 * np.pi * (1 - 0.6) / (1 + 0.6)
    assert abs(reciprocal_peak_likelihood(pcs_density(lam)) - expected) < 1e-6


def test_matched_overlap_single_photon():
    state = ThreeModeState.from_fock_dict({(0, 0, 1): -1.0j})
    overlap, lam = matched_pcs_overlap(state)
    # mean photon 1 pins |lambda|^2 = 1/2; the overlap is phase-flat here
    assert abs(overlap - 0.5) < 1e-12
    assert abs(abs(lam) - 1 / math.sqrt(2)) < 1e-12


def test_matched_overlap_vacuum():
    state = ThreeModeState.from_fock_dict({(0, 0, 0): 1.0})
    overlap, lam = matched_pcs_overlap(state)
    assert overlap == pytest.approx(1.0, abs=1e-12)
    assert lam == 0.0


def test_matched_overlap_agrees_with_direct_product_overlap():
    beam = make_twin_beam(math.sqrt(0.5))
    state = evolve(beam, 0.7)
    overlap, lam = matched_pcs_overlap(state)
    direct = overlap_with_product(state, bra_c=pcs_amplitudes(lam, state.mode_support()[2]))
    assert abs(overlap - direct) < 1e-10


def test_matched_overlap_phase_covariance():
    theta = 0.9
    base = evolve(make_twin_beam(0.55), 0.8)
    rotated = evolve(make_twin_beam(0.55 * np.exp(1j * theta)), 0.8)
    o1, lam1 = matched_pcs_overlap(base)
    o2, lam2 = matched_pcs_overlap(rotated)
    assert abs(o1 - o2) < 1e-9
    assert abs(lam2 - lam1 * np.exp(1j * theta)) < 1e-6


def test_matched_overlap_global_phase_invariance():
    amps = {(2, 2, 0): 0.4, (1, 1, 1): 0.6, (0, 0, 2): 0.3}
    state = ThreeModeState.from_fock_dict(amps)
    shifted = ThreeModeState.from_fock_dict({t: 1j * a for t, a in amps.items()})
    o1, _ = matched_pcs_overlap(state)
    o2, _ = matched_pcs_overlap(shifted)
    assert abs(o1 - o2) < 1e-12


def test_matched_overlap_rho_matches_pure_state_form():
    state = evolve(make_twin_beam(0.6), 0.5)
    o_state, lam_state = matched_pcs_overlap(state)
    o_rho, lam_rho = matched_pcs_overlap_rho(reduce_mode_c(state))
    assert abs(o_state - o_rho) < 1e-10
    assert abs(lam_state - lam_rho) < 1e-6
