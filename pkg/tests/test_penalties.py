import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupfuse import GroupedCoefficients
from groupfuse.penalties import (FusedPenalty, adaptive_weights,
                                 penalty_value, prox_block_norm,
                                 prox_block_norms)
from helpers import ternary_min


def coeffs(*blocks):
    return GroupedCoefficients(tuple(np.atleast_1d(np.asarray(b, float))
                                     for b in blocks))


def test_penalty_value_zero_when_equal():
    pen = FusedPenalty(q=2, lam=3.0, weights=np.ones(2))
    beta = coeffs([1.0, -2.0], [1.0, -2.0], [1.0, -2.0])
    assert penalty_value(pen, beta, n=10) == 0.0


def test_penalty_value_q1_example():
    pen = FusedPenalty(q=1, lam=1.0, weights=np.ones(2))
    assert penalty_value(pen, coeffs(1.0, 3.0, 3.0), n=1) == pytest.approx(2.0)


def test_penalty_value_q2_weighted_example():
    pen = FusedPenalty(q=2, lam=2.0, weights=np.array([0.5]))
    beta = coeffs([0.0, 0.0], [3.0, 4.0])
    assert penalty_value(pen, beta, n=1) == pytest.approx(5.0)


def test_penalty_value_single_group_is_zero():
    pen = FusedPenalty(q=1, lam=5.0, weights=np.ones(0))
    assert penalty_value(pen, coeffs([1.0, 2.0]), n=7) == 0.0


def test_penalty_translation_invariance():
    rng = np.random.default_rng(23)
    pen = FusedPenalty(q=2, lam=0.7, weights=rng.uniform(0.5, 2.0, 3))
    blocks = [rng.standard_normal(2) for _ in range(4)]
    shift = rng.standard_normal(2)
    before = penalty_value(pen, GroupedCoefficients(tuple(blocks)), n=5)
    after = penalty_value(
        pen, GroupedCoefficients(tuple(b + shift for b in blocks)), n=5)
    assert after == pytest.approx(before, abs=1e-12)


def test_adaptive_weights_identical_pilot_hits_floor():
    pilot = coeffs(0.3, 0.3, 0.3)
    np.testing.assert_allclose(adaptive_weights(pilot, n=100, gamma=1.0),
                               [10.0, 10.0])


def test_adaptive_weights_example_gamma_one():
    pilot = coeffs(0.0, 0.5)
    assert adaptive_weights(pilot, n=100, gamma=1.0)[0] == pytest.approx(2.0)


def test_adaptive_weights_example_gamma_two():
    # 0.2^2 + 0.1^2 = 0.05 < 0.1, so the floor binds and the weight is 10
    pilot = GroupedCoefficients((np.array([0.0, 0.0]), np.array([0.2, 0.1])))
    assert adaptive_weights(pilot, n=100, gamma=2.0)[0] == pytest.approx(10.0)


@given(st.floats(0.0, 5.0), st.floats(0.0, 5.0),
       st.floats(0.2, 3.0), st.integers(2, 10_000))
@settings(max_examples=200)
def test_adaptive_weights_bounded_and_antitone(d1, d2, gamma, n):
    lo, hi = sorted([d1, d2])
    w_small = adaptive_weights(coeffs(0.0, hi), n, gamma)[0]
    w_big = adaptive_weights(coeffs(0.0, lo), n, gamma)[0]
    assert 0.0 < w_small <= n ** 0.5 + 1e-12
    # enlarging the pilot difference never increases the weight
    assert w_small <= w_big + 1e-12


def test_prox_block_norm_q2_example():
    np.testing.assert_allclose(prox_block_norm([3.0, 4.0], 1.0, q=2),
                               [2.4, 3.2], atol=1e-12)


def test_prox_block_norm_q2_annihilates():
    np.testing.assert_array_equal(prox_block_norm([0.3, 0.4], 0.5, q=2),
                                  [0.0, 0.0])


def test_prox_block_norm_q1_example():
    np.testing.assert_allclose(prox_block_norm([1.5, -0.2], 0.5, q=1),
                               [1.0, 0.0], atol=1e-12)


def test_prox_block_norm_q1_matches_componentwise_oracle():
    rng = np.random.default_rng(31)
    for _ in range(50):
        v = rng.normal(0.0, 2.0, 3)
        kappa = rng.uniform(0.0, 2.0)
        got = prox_block_norm(v, kappa, q=1)
        for k in range(3):
            obj = lambda z: kappa * abs(z) + 0.5 * (z - v[k]) ** 2
            assert got[k] == pytest.approx(
                ternary_min(obj, -6.0, 6.0), abs=1e-8)


def test_prox_block_norm_q2_matches_radial_oracle():
    # by rotational symmetry the block prox reduces to a 1-D problem in the
    # radial coordinate
    rng = np.random.default_rng(37)
    for _ in range(50):
        v = rng.normal(0.0, 2.0, 2)
        kappa = rng.uniform(0.0, 3.0)
        r = np.linalg.norm(v)
        radial = lambda s: kappa * s + 0.5 * (s - r) ** 2
        s_star = max(ternary_min(radial, 0.0, r + kappa + 1.0), 0.0)
        expected = s_star * v / r if r > 0 else np.zeros(2)
        np.testing.assert_allclose(prox_block_norm(v, kappa, q=2), expected,
                                   atol=1e-8)


@pytest.mark.parametrize("q", [1, 2])
def test_prox_block_norm_identity_at_zero_and_shrinks(q):
    rng = np.random.default_rng(41)
    for _ in range(50):
        v = rng.normal(0.0, 3.0, 4)
        np.testing.assert_array_equal(prox_block_norm(v, 0.0, q), v)
        out = prox_block_norm(v, rng.uniform(0.0, 2.0), q)
        assert np.linalg.norm(out) <= np.linalg.norm(v) + 1e-12


def test_prox_block_norms_batched_matches_single():
    rng = np.random.default_rng(43)
    V = rng.normal(0.0, 1.0, (5, 3))
    kappas = rng.uniform(0.0, 2.0, 5)
    for q in (1, 2):
        batch = prox_block_norms(V, kappas, q)
        for i in range(5):
            np.testing.assert_allclose(batch[i],
                                       prox_block_norm(V[i], kappas[i], q))


def test_prox_block_norms_rejects_negative_kappa():
    with pytest.raises(ValueError):
        prox_block_norm([1.0], -0.1, q=1)


def test_fused_penalty_validation():
    with pytest.raises(ValueError, match="positive"):
        FusedPenalty(q=1, lam=1.0, weights=np.array([1.0, 0.0]))
    with pytest.raises(ValueError, match="q"):
        FusedPenalty(q=3, lam=1.0, weights=np.ones(1))
    with pytest.raises(ValueError, match="lam"):
        FusedPenalty(q=1, lam=-1.0, weights=np.ones(1))
    with pytest.raises(ValueError):
        penalty_value(FusedPenalty(q=1, lam=1.0, weights=np.ones(3)),
                      coeffs(1.0, 2.0), n=1)
