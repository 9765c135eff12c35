import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from qtopo.quantum import (Metric, affinity, density_matrix, distance_matrix, fidelity,
                           fidelity_diagonal, fidelity_mixed, fidelity_pure, projector, pure_state,
                           state_distance, states_from_json, states_to_json, swap_test_estimate,
                           swap_test_fidelity_matrix)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
ALL_METRICS = list(Metric)
MIXED_METRICS = [m for m in Metric if m is not Metric.FUBINI_STUDY]
seeds = st.integers(0, 2**32 - 1)


def random_pure(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_mixed(rng, d, rank=None):
    G = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, d):
    Q, R = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def uhlmann_oracle(rho, sigma):
    s = scipy.linalg.sqrtm(rho)
    return float(np.trace(scipy.linalg.sqrtm(s @ sigma @ s)).real ** 2)


# validation


def test_state_validators():
    with pytest.raises(ValueError):
        pure_state([1, 1])
    with pytest.raises(ValueError):
        density_matrix([[1, 1], [0, 0]])
    with pytest.raises(ValueError):
        density_matrix([[0.5, 0], [0, 0.4]])
    with pytest.raises(ValueError):
        density_matrix([[1.5, 0], [0, -0.5]])
    assert density_matrix(np.eye(2) / 2).shape == (2, 2)


# fidelities


def test_fidelity_pure_examples():
    assert fidelity_pure(PLUS, PLUS) == pytest.approx(1)
    assert fidelity_pure(KET0, KET1) == 0
    assert fidelity_pure(KET0, PLUS) == pytest.approx(0.5)


def test_fidelity_diagonal_examples():
    assert fidelity_diagonal([0.3, 0.7], [0.3, 0.7]) == pytest.approx(1)
    assert fidelity_diagonal([1, 0], [0, 1]) == 0
    assert fidelity_diagonal([0.5, 0.5], [1, 0]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        fidelity_diagonal([0.5, 0.6], [1, 0])


def test_fidelity_mixed_agrees_with_closed_forms():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
        assert fidelity_mixed(np.diag(p), np.diag(q)) == pytest.approx(fidelity_diagonal(p, q), abs=1e-10)
        a, b = random_pure(rng, 3), random_pure(rng, 3)
        assert fidelity_mixed(projector(a), projector(b)) == pytest.approx(fidelity_pure(a, b), abs=1e-8)


def test_fidelity_mixed_matches_sqrtm_oracle():
    rng = np.random.default_rng(1)
    for _ in range(20):
        rho, sigma = random_mixed(rng, 3), random_mixed(rng, 3)
        assert fidelity_mixed(rho, sigma) == pytest.approx(uhlmann_oracle(rho, sigma), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 4))
def test_fidelity_mixed_symmetric_and_bounded(seed, d):
    rng = np.random.default_rng(seed)
    rho, sigma = random_mixed(rng, d), random_mixed(rng, d, rank=1)
    f = fidelity_mixed(rho, sigma)
    assert 0 <= f <= 1
    assert f == pytest.approx(fidelity_mixed(sigma, rho), abs=1e-9)


def test_mixed_pure_fidelity_is_expectation():
    rng = np.random.default_rng(2)
    psi, rho = random_pure(rng, 3), random_mixed(rng, 3)
    assert fidelity(psi, rho) == pytest.approx(uhlmann_oracle(projector(psi), rho), abs=1e-8)


def test_affinity_matches_sqrtm_oracle():
    rng = np.random.default_rng(3)
    rho, sigma = random_mixed(rng, 3), random_mixed(rng, 3)
    expected = np.trace(scipy.linalg.sqrtm(rho) @ scipy.linalg.sqrtm(sigma)).real
    assert affinity(rho, sigma) == pytest.approx(expected, abs=1e-9)


# distances


@pytest.mark.parametrize("metric", ALL_METRICS)
def test_distance_to_self_is_zero(metric):
    psi = random_pure(np.random.default_rng(4), 4)
    assert state_distance(psi, psi, metric) == pytest.approx(0, abs=1e-7)


def test_pure_state_closed_forms():
    rng = np.random.default_rng(5)
    for _ in range(10):
        a, b = random_pure(rng, 3), random_pure(rng, 3)
        F = fidelity_pure(a, b)
        assert state_distance(a, b, Metric.TRACE) == pytest.approx(2 * math.sqrt(1 - F), abs=1e-9)
        assert state_distance(a, b, Metric.HILBERT_SCHMIDT) == pytest.approx(math.sqrt(2 * (1 - F)), abs=1e-9)
        # matrix route agrees with the vector route
        for m in MIXED_METRICS:
            assert state_distance(projector(a), projector(b), m) == pytest.approx(
                state_distance(a, b, m), abs=1e-6)


def test_orthogonal_pure_states():
    assert state_distance(KET0, KET1, Metric.BURES_FIDELITY) == 1
    assert state_distance(KET0, KET1, Metric.FUBINI_STUDY) == 1
    assert state_distance(KET0, KET1, Metric.HILBERT_SCHMIDT) == pytest.approx(math.sqrt(2))
    assert state_distance(KET0, KET1, Metric.TRACE) == pytest.approx(2)


def test_fubini_study_rejects_mixed():
    with pytest.raises(ValueError):
        state_distance(np.eye(2) / 2, projector(KET0), Metric.FUBINI_STUDY)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        state_distance(KET0, np.ones(4) / 2, Metric.TRACE)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from(ALL_METRICS))
def test_triangle_inequality_pure(seed, metric):
    rng = np.random.default_rng(seed)
    a, b, c = (random_pure(rng, 2) for _ in range(3))
    ab, bc, ac = (state_distance(x, y, metric) for x, y in ((a, b), (b, c), (a, c)))
    assert ac <= ab + bc + 1e-9
    assert ab == pytest.approx(state_distance(b, a, metric), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from(MIXED_METRICS))
def test_unitary_invariance(seed, metric):
    rng = np.random.default_rng(seed)
    rho, sigma, U = random_mixed(rng, 3), random_mixed(rng, 3), random_unitary(rng, 3)
    rot = [U @ s @ U.conj().T for s in (rho, sigma)]
    assert state_distance(*rot, metric) == pytest.approx(state_distance(rho, sigma, metric), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_unitary_invariance_fubini_study(seed):
    rng = np.random.default_rng(seed)
    a, b, U = random_pure(rng, 3), random_pure(rng, 3), random_unitary(rng, 3)
    assert state_distance(U @ a, U @ b, Metric.FUBINI_STUDY) == pytest.approx(
        state_distance(a, b, Metric.FUBINI_STUDY), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([1.0, 2.0, math.inf]))
def test_schatten_embeds_lp_on_diagonal_states(seed, p):
    rng = np.random.default_rng(seed)
    x, y = rng.dirichlet(np.ones(5)), rng.dirichlet(np.ones(5))
    expected = np.linalg.norm(x - y, ord=p)
    assert state_distance(np.diag(x), np.diag(y), Metric.SCHATTEN, p) == pytest.approx(expected, abs=1e-12)


def test_distance_matrix_routes_agree():
    rng = np.random.default_rng(6)
    states = [random_pure(rng, 4) for _ in range(6)]
    for m in ALL_METRICS:
        D = distance_matrix(states, m)
        for i in range(6):
            for j in range(6):
                expected = 0.0 if i == j else state_distance(states[i], states[j], m)
                assert D[i, j] == pytest.approx(expected, abs=1e-7)


# SWAP test


def test_swap_test_identical_states():
    assert swap_test_estimate(PLUS, PLUS, 17, seed=1).value == 1.0


def test_swap_test_concentration():
    assert abs(swap_test_estimate(KET0, KET1, 100_000, seed=2).value) < 0.02
    assert abs(swap_test_estimate(KET0, PLUS, 1_000_000, seed=3).value - 0.5) < 0.005


def test_swap_test_deterministic_and_validated():
    a = swap_test_estimate(KET0, PLUS, 1000, seed=4)
    assert a == swap_test_estimate(KET0, PLUS, 1000, seed=4)
    assert a.shots == 1000
    with pytest.raises(ValueError):
        swap_test_estimate(KET0, PLUS, 0)


def test_swap_test_matrix_symmetric_unit_diagonal():
    rng = np.random.default_rng(7)
    F = swap_test_fidelity_matrix([random_pure(rng, 2) for _ in range(5)], 500, seed=8)
    np.testing.assert_array_equal(F, F.T)
    np.testing.assert_array_equal(np.diag(F), 1.0)
    assert F.min() >= 0 and F.max() <= 1


# serialisation


def test_states_json_round_trip():
    rng = np.random.default_rng(9)
    states = [random_pure(rng, 2), random_mixed(rng, 2)]
    back = states_from_json(states_to_json(states))
    for a, b in zip(states, back):
        np.testing.assert_array_equal(a, b)
