import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from klmmse.errors import DimensionMismatch, NotPositiveDefinite
from klmmse.gaussian_core import (
    GaussianDist,
    KlBall,
    LinearEstimator,
    SpdMatrix,
    apply_estimator,
    channel_operators,
    kl_gaussian,
    loewner_min_eig,
    matrix_from_json,
    matrix_to_json,
    mmse_estimator,
    mmse_gaussian,
    mmse_gaussian_identity_form,
    mse_linear_under_gaussian,
    reduce_observations,
    toeplitz_exp_cov,
    vector_from_json,
    vector_to_json,
)

from conftest import random_spd


class TestSpdMatrix:
    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            SpdMatrix([[1.0, 2.0], [2.0, 1.0]])

    def test_rejects_asymmetric(self):
        with pytest.raises(NotPositiveDefinite):
            SpdMatrix([[2.0, 0.5], [0.0, 2.0]])

    def test_symmetrizes_rounding_asymmetry(self):
        a = np.array([[2.0, 0.5], [0.5 + 1e-15, 2.0]])
        m = SpdMatrix(a)
        assert np.array_equal(m.entries, m.entries.T)

    def test_non_square(self):
        with pytest.raises(DimensionMismatch):
            SpdMatrix(np.ones((2, 3)))

    def test_nonfinite(self):
        with pytest.raises(NotPositiveDefinite):
            SpdMatrix([[np.nan]])

    def test_cholesky_and_logdet(self):
        rng = np.random.default_rng(1)
        m = random_spd(rng, 5)
        assert np.allclose(m.chol @ m.chol.T, m.entries, atol=1e-12)
        assert m.logdet == pytest.approx(np.linalg.slogdet(m.entries)[1], rel=1e-12)

    def test_solve_inverse_sqrt(self):
        rng = np.random.default_rng(2)
        m = random_spd(rng, 4)
        b = rng.standard_normal(4)
        assert np.allclose(m.entries @ m.solve(b), b)
        assert np.allclose(m.inverse() @ m.entries, np.eye(4), atol=1e-12)
        r = m.sqrt()
        assert np.allclose(r @ r, m.entries, atol=1e-12)

    def test_entries_read_only(self):
        m = SpdMatrix.identity(3)
        with pytest.raises(ValueError):
            m.entries[0, 0] = 5.0


def test_toeplitz_entries_and_trace(toeplitz10):
    assert toeplitz10.entries[0, 1] == pytest.approx(math.exp(-0.9), rel=1e-15)
    assert toeplitz10.entries[0, 1] == pytest.approx(0.40657, abs=5e-6)
    assert toeplitz10.trace() == 10.0
    assert toeplitz_exp_cov(1, 3.0).entries.tolist() == [[1.0]]
    assert np.allclose(toeplitz_exp_cov(4, 60.0).entries, np.eye(4), atol=1e-25)
    with pytest.raises(ValueError):
        toeplitz_exp_cov(3, 0.0)


def test_channel_operators_against_explicit_inverse():
    sx = toeplitz_exp_cov(2, 0.9).entries
    sn = np.eye(2)
    ops = channel_operators(sx, sn)
    inv = np.linalg.inv(sx + sn)
    assert np.allclose(ops.w_x, sx @ inv, atol=1e-12)
    assert np.allclose(ops.w_n, sn @ inv, atol=1e-12)
    assert np.allclose(ops.w_x + ops.w_n, np.eye(2), atol=1e-14)
    assert np.allclose(ops.d_x, sn @ ops.w_x.T @ ops.w_x, atol=1e-12)
    assert np.allclose(ops.d_n, sx @ ops.w_n.T @ ops.w_n, atol=1e-12)


def test_scalar_mmse_half():
    assert mmse_gaussian([[1.0]], [[1.0]]) == pytest.approx(0.5, rel=1e-15)


def test_mmse_toeplitz_identity_form(toeplitz10):
    a = mmse_gaussian(toeplitz10, np.eye(10))
    b = mmse_gaussian_identity_form(toeplitz10, np.eye(10))
    assert a == pytest.approx(b, rel=1e-12)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        mmse_gaussian(np.eye(2), np.eye(3))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_mmse_properties(k, seed):
    rng = np.random.default_rng(seed)
    sx, sn = random_spd(rng, k), random_spd(rng, k)
    m = mmse_gaussian(sx, sn)
    assert m == pytest.approx(mmse_gaussian_identity_form(sx, sn), rel=1e-9)
    # bounded by each of the prior and the noise alone
    assert 0 < m <= min(sx.trace(), sn.trace()) * (1 + 1e-12)
    # more signal variance never lowers the MMSE
    assert mmse_gaussian(SpdMatrix(sx.entries * 1.5), sn) >= m * (1 - 1e-12)


def test_mmse_estimator_and_apply():
    prior = GaussianDist([1.0, -1.0], toeplitz_exp_cov(2, 0.5))
    est = mmse_estimator(prior, np.eye(2))
    assert np.allclose(est(prior.mean), prior.mean)
    batch = np.vstack([prior.mean, prior.mean + 1.0])
    out = apply_estimator(est, batch)
    assert out.shape == (2, 2)
    assert np.allclose(out[1] - out[0], est.gain @ np.ones(2))
    with pytest.raises(DimensionMismatch):
        est(np.zeros(3))


def test_matched_linear_mse_equals_mmse():
    rng = np.random.default_rng(5)
    sx, sn = random_spd(rng, 4), random_spd(rng, 4)
    prior = GaussianDist(rng.standard_normal(4), sx)
    est = mmse_estimator(prior, sn)
    assert mse_linear_under_gaussian(est, prior, sn) == pytest.approx(mmse_gaussian(sx, sn), rel=1e-12)


def test_identity_gain_mse_is_noise_trace():
    sn = SpdMatrix(np.diag([0.5, 2.0]))
    est = LinearEstimator(np.eye(2), np.zeros(2))
    prior = GaussianDist([3.0, 4.0], np.eye(2))
    assert mse_linear_under_gaussian(est, prior, sn) == pytest.approx(2.5)


def test_kl_gaussian_explicit():
    rng = np.random.default_rng(9)
    p = GaussianDist(rng.standard_normal(3), random_spd(rng, 3))
    q = GaussianDist(rng.standard_normal(3), random_spd(rng, 3))
    sp, sq = p.cov.entries, q.cov.entries
    iq = np.linalg.inv(sq)
    d = p.mean - q.mean
    ref = 0.5 * (np.trace(iq @ sp) - 3 + d @ iq @ d + np.log(np.linalg.det(sq) / np.linalg.det(sp)))
    assert kl_gaussian(p, q) == pytest.approx(ref, rel=1e-12)
    assert kl_gaussian(p, p) == pytest.approx(0.0, abs=1e-14)


def test_kl_scalar_variance_ratio():
    # variance ratio r gives (r - 1 - ln r) / 2
    p = GaussianDist([0.0], [[2.0]])
    q = GaussianDist([0.0], [[1.0]])
    assert kl_gaussian(p, q) == pytest.approx(0.5 * (2 - 1 - math.log(2)), rel=1e-14)


def test_kl_ball_validation():
    c = GaussianDist.centered(np.eye(2))
    with pytest.raises(ValueError):
        KlBall(c, -0.1)
    with pytest.raises(ValueError):
        KlBall(c, math.inf)


def test_reduce_observations():
    sn = SpdMatrix(np.eye(2) * 4.0)
    obs = np.array([[1.0, 2.0], [3.0, 4.0]])
    red, ybar = reduce_observations(sn, obs)
    assert np.allclose(red.entries, 2.0 * np.eye(2))
    assert np.allclose(ybar, [2.0, 3.0])
    assert np.array_equal(obs, [[1.0, 2.0], [3.0, 4.0]])
    with pytest.raises(ValueError):
        reduce_observations(sn, [])


def test_loewner():
    assert loewner_min_eig(np.eye(2), 2 * np.eye(2)) == pytest.approx(1.0)
    assert loewner_min_eig(2 * np.eye(2), np.eye(2)) < 0


def test_json_roundtrip(toeplitz10):
    back = matrix_from_json(matrix_to_json(toeplitz10.entries))
    assert np.array_equal(back, toeplitz10.entries)
    assert np.array_equal(vector_from_json(vector_to_json([1.5, -2.0])), [1.5, -2.0])
    with pytest.raises(DimensionMismatch):
        matrix_from_json({"dim": 3, "rows": [[1.0]]})
    with pytest.raises(ValueError):
        matrix_from_json({"rows": [[1.0]]})
