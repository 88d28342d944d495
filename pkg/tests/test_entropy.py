import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

import oracles
from antsearch.entropy import (
    EntropyKind,
    entropy,
    max_entropy,
    soft_policy,
    soft_value,
    sparsemax,
)

KINDS = [EntropyKind.SHANNON, EntropyKind.TSALLIS2]
ORACLE_NAME = {EntropyKind.SHANNON: "shannon", EntropyKind.TSALLIS2: "tsallis"}

# max over a 1e-3 simplex grid of pi.q + 0.3*H(pi), q = [1, 0.2, -0.5]
GRID_VALUE_SHANNON = 1.0220347593796488

finite_vectors = st.lists(
    st.floats(-5, 5, allow_nan=False), min_size=1, max_size=8
).map(np.array)
temperatures = st.floats(0.01, 10.0)


def test_soft_value_two_equal_actions():
    assert soft_value([0.0, 0.0], "shannon", 1.0) == pytest.approx(math.log(2), abs=1e-15)


@pytest.mark.parametrize("kind", KINDS)
def test_soft_value_shift_covariance(kind):
    q = np.array([5.0, 5.0, 5.0])
    for tau in (0.01, 0.3, 7.0):
        assert soft_value(q + 3.7, kind, tau) == pytest.approx(
            soft_value(q, kind, tau) + 3.7, abs=1e-12
        )


def test_soft_value_matches_simplex_grid():
    got = soft_value([1.0, 0.2, -0.5], "shannon", 0.3)
    assert got == pytest.approx(GRID_VALUE_SHANNON, abs=1e-4)
    assert got >= GRID_VALUE_SHANNON  # the grid can only under-estimate a max


@pytest.mark.parametrize("kind", KINDS)
def test_soft_value_matches_brute_force(kind):
    rng = np.random.default_rng(0)
    for _ in range(200):
        k = int(rng.integers(1, 7))
        q = rng.uniform(-3, 3, size=k)
        tau = float(10 ** rng.uniform(-2, 1))
        want = oracles.soft_value_scalar(list(q), tau, ORACLE_NAME[kind])
        assert soft_value(q, kind, tau) == pytest.approx(want, abs=1e-9)


def test_tsallis_value_against_grid():
    for q, tau in [([1.0, 0.2, -0.5], 0.3), ([0.1, 0.0, 0.05], 0.4), ([2.0, 2.0, 1.9], 1.0)]:
        grid, _ = oracles.grid_soft_value_3(q, tau, "tsallis")
        got = soft_value(q, "tsallis2", tau)
        assert grid - 1e-12 <= got <= grid + 1e-4


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("tau", [1e-3, 0.5, 20.0])
def test_soft_policy_symmetric(kind, tau):
    assert_allclose(soft_policy([2.5] * 4, kind, tau), [0.25] * 4, atol=1e-15)


def test_tsallis_policy_drops_far_action():
    assert_allclose(soft_policy([1.0, 0.0], "tsallis2", 0.1), [1.0, 0.0], atol=0)
    assert_allclose(oracles.sparsemax_by_enumeration([10.0, 0.0]), [1.0, 0.0])


def test_shannon_policy_two_actions():
    want = oracles.softmax_scalar([1.0, 0.0], 1.0)
    assert_allclose(soft_policy([1.0, 0.0], "shannon", 1.0), want, atol=1e-15)
    assert_allclose(want, [0.731059, 0.268941], atol=1e-6)


def test_sparsemax_matches_support_enumeration():
    rng = np.random.default_rng(1)
    for _ in range(500):
        z = rng.normal(scale=rng.choice([0.1, 1.0, 5.0]), size=int(rng.integers(1, 8)))
        assert_allclose(sparsemax(z), oracles.sparsemax_by_enumeration(z), atol=1e-12)


def test_entropy_values():
    u = np.full(18, 1 / 18)
    assert entropy(u, "shannon") == pytest.approx(2.8904, abs=1e-4)
    assert entropy(u, "tsallis2") == pytest.approx(17 / 36, abs=1e-15)
    for kind in KINDS:
        assert entropy([0.0, 1.0, 0.0], kind) == 0.0


def test_max_entropy():
    assert max_entropy("shannon", 2) == pytest.approx(math.log(2))
    assert max_entropy("tsallis2", 2) == 0.25
    assert max_entropy("shannon", 18) == pytest.approx(2.8904, abs=1e-4)
    assert max_entropy("shannon", 1) == 0.0
    for k in range(1, 30):
        assert max_entropy("tsallis2", k) == pytest.approx((1 - 1 / k) / 2)
    with pytest.raises(ValueError):
        max_entropy("shannon", 0)


@pytest.mark.parametrize("bad", [0.0, -1.0, 1e-13, float("nan")])
def test_domain_errors(bad):
    with pytest.raises(ValueError):
        soft_value([1.0, 2.0], "shannon", bad)
    with pytest.raises(ValueError):
        soft_policy([1.0, 2.0], "tsallis2", bad)


def test_empty_and_nonfinite_rejected():
    with pytest.raises(ValueError):
        soft_value([], "shannon", 1.0)
    with pytest.raises(ValueError):
        soft_policy([1.0, np.inf], "shannon", 1.0)
    with pytest.raises(ValueError):
        EntropyKind.parse("renyi")


@settings(max_examples=300, deadline=None)
@given(finite_vectors, temperatures, st.sampled_from(KINDS))
def test_policy_is_distribution(q, tau, kind):
    p = soft_policy(q, kind, tau)
    assert np.all(p >= 0)
    assert abs(p.sum() - 1) <= 1e-12
    assert -1e-12 <= entropy(p, kind) <= max_entropy(kind, q.size) + 1e-12


@settings(max_examples=300, deadline=None)
@given(finite_vectors, temperatures, st.sampled_from(KINDS))
def test_duality_consistency(q, tau, kind):
    p = soft_policy(q, kind, tau)
    assert p @ q + tau * entropy(p, kind) == pytest.approx(soft_value(q, kind, tau), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(finite_vectors, temperatures, st.sampled_from(KINDS), st.floats(-50, 50))
def test_shift_invariance(q, tau, kind, c):
    assert_allclose(soft_policy(q + c, kind, tau), soft_policy(q, kind, tau), atol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_shift_invariance_exact_on_dyadic_values(kind):
    q = np.array([0.5, -1.25, 2.0, 0.0])
    assert np.array_equal(soft_policy(q + 4.0, kind, 0.5), soft_policy(q, kind, 0.5))


@pytest.mark.parametrize("kind", KINDS)
def test_limits(kind):
    assert_allclose(soft_policy([1.0, 3.0, 2.0], kind, 1e-9), [0, 1, 0], atol=1e-12)
    assert_allclose(soft_policy([3.0, 1.0, 3.0], kind, 1e-9), [0.5, 0, 0.5], atol=1e-12)
    assert_allclose(soft_policy([1.0, 3.0, 2.0], kind, 1e9), [1 / 3] * 3, atol=1e-8)


@pytest.mark.parametrize("kind", KINDS)
def test_entropy_monotone_in_temperature(kind):
    rng = np.random.default_rng(2)
    taus = np.logspace(-3, 2, 60)
    for _ in range(1000):
        q = rng.uniform(-1, 1, size=int(rng.integers(2, 7)))
        h = [entropy(soft_policy(q, kind, t), kind) for t in taus]
        assert np.all(np.diff(h) >= -1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_row_versions_match_scalar(kind):
    from antsearch.entropy import entropy_rows, soft_policy_rows

    rng = np.random.default_rng(3)
    q = rng.normal(scale=2.0, size=(50, 5))
    q[0] = 1.0  # constant row
    for tau in (0.01, 0.7, 30.0):
        p = soft_policy_rows(q, kind, tau)
        for row, prow in zip(q, p):
            assert_allclose(prow, soft_policy(row, kind, tau), atol=1e-14)
        assert_allclose(entropy_rows(p, kind), [entropy(r, kind) for r in p], atol=1e-14)


@settings(max_examples=300, deadline=None)
@given(finite_vectors, temperatures, st.sampled_from(KINDS))
def test_list_versions_match_array_versions(q, tau, kind):
    from antsearch.entropy import soft_policy_list, soft_value_list

    assert_allclose(soft_policy_list(list(q), kind, tau), soft_policy(q, kind, tau), atol=1e-13)
    assert soft_value_list(list(q), kind, tau) == pytest.approx(soft_value(q, kind, tau),
                                                                 abs=1e-12)
