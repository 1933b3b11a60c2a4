"""Dense SPD linear algebra, Gaussian priors and closed-form MSE expressions
for the additive Gaussian noise channel ``Y = X + N``.

All inverses are realised as Cholesky solves; nothing here forms an explicit
matrix inverse except where a covariance itself is the requested output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DimensionMismatch, NotPositiveDefinite

# Relative asymmetry above which an input is rejected rather than symmetrized.
SYMMETRY_REJECT_TOL = 1e-8


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


class SpdMatrix:
    """Symmetric positive-definite matrix with an eagerly computed Cholesky factor.

    The input is symmetrized on construction. Construction fails with
    :class:`NotPositiveDefinite` when the Cholesky factorization does not
    succeed; there is no eigenvalue floor.
    """

    __slots__ = ("_a", "_cho", "_logdet")

    def __init__(self, entries):
        a = np.atleast_2d(np.asarray(entries, dtype=float))
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NotPositiveDefinite("matrix has non-finite entries")
        scale = np.linalg.norm(a)
        if np.linalg.norm(a - a.T) > SYMMETRY_REJECT_TOL * max(scale, 1e-300):
            raise NotPositiveDefinite("matrix is not symmetric")
        a = symmetrize(a)
        try:
            c, lower = cho_factor(a, lower=True, check_finite=False)
        except LinAlgError as exc:
            raise NotPositiveDefinite(str(exc)) from None
        # cho_factor leaves garbage in the unused triangle
        self._a = _frozen(a)
        self._cho = (_frozen(np.tril(c)), lower)
        self._logdet = 2.0 * float(np.sum(np.log(np.diag(c))))

    @classmethod
    def identity(cls, dim: int, scale: float = 1.0) -> "SpdMatrix":
        return cls(scale * np.eye(dim))

    @property
    def dim(self) -> int:
        return self._a.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._a

    @property
    def chol(self) -> np.ndarray:
        """Lower Cholesky factor ``L`` with ``L @ L.T == entries``."""
        return self._cho[0]

    @property
    def logdet(self) -> float:
        return self._logdet

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Return ``A^{-1} b``."""
        return cho_solve(self._cho, b, check_finite=False)

    def inverse(self) -> np.ndarray:
        return symmetrize(self.solve(np.eye(self.dim)))

    def trace(self) -> float:
        return float(np.trace(self._a))

    def sqrt(self) -> np.ndarray:
        """Symmetric square root via eigendecomposition."""
        vals, vecs = np.linalg.eigh(self._a)
        return symmetrize((vecs * np.sqrt(vals)) @ vecs.T)

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self._a)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._a, dtype=dtype)

    def __repr__(self) -> str:
        return f"SpdMatrix(dim={self.dim})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpdMatrix):
            return NotImplemented
        return np.array_equal(self._a, other._a)

    __hash__ = None


def as_spd(m) -> SpdMatrix:
    return m if isinstance(m, SpdMatrix) else SpdMatrix(m)


@dataclass(frozen=True)
class GaussianDist:
    mean: np.ndarray
    cov: SpdMatrix

    def __post_init__(self):
        cov = as_spd(self.cov)
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float)).ravel()
        if mean.shape[0] != cov.dim:
            raise DimensionMismatch(
                f"mean has length {mean.shape[0]} but covariance is {cov.dim}x{cov.dim}"
            )
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", _frozen(mean))

    @classmethod
    def centered(cls, cov) -> "GaussianDist":
        cov = as_spd(cov)
        return cls(np.zeros(cov.dim), cov)

    @property
    def dim(self) -> int:
        return self.cov.dim

    def with_cov(self, cov) -> "GaussianDist":
        return GaussianDist(self.mean, cov)


@dataclass(frozen=True)
class ChannelOperators:
    """Gains and error-covariance factors derived from a (signal, noise) pair.

    ``w_x`` is the signal gain of the matched linear estimator, ``w_n = I - w_x``
    weights the prior mean, and ``d_x``/``d_n`` are the noise- and
    signal-induced parts of the error covariance.
    """

    w_x: np.ndarray
    w_n: np.ndarray
    d_x: np.ndarray
    d_n: np.ndarray


@dataclass(frozen=True)
class KlBall:
    """Set of priors within KL divergence ``radius`` (nats) of ``center``."""

    center: GaussianDist
    radius: float

    def __post_init__(self):
        if not self.radius >= 0 or not math.isfinite(self.radius):
            raise ValueError(f"KL ball radius must be finite and >= 0, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.dim


@dataclass(frozen=True)
class LinearEstimator:
    """Estimator ``f(y) = gain @ y + (I - gain) @ anchor_mean``."""

    gain: np.ndarray
    anchor_mean: np.ndarray

    def __post_init__(self):
        gain = np.atleast_2d(np.asarray(self.gain, dtype=float))
        anchor = np.atleast_1d(np.asarray(self.anchor_mean, dtype=float)).ravel()
        if gain.ndim != 2 or gain.shape[0] != gain.shape[1]:
            raise DimensionMismatch(f"gain must be square, got shape {gain.shape}")
        if anchor.shape[0] != gain.shape[0]:
            raise DimensionMismatch("anchor mean does not match gain dimension")
        object.__setattr__(self, "gain", _frozen(gain))
        object.__setattr__(self, "anchor_mean", _frozen(anchor))

    @property
    def dim(self) -> int:
        return self.gain.shape[0]

    def __call__(self, y):
        return apply_estimator(self, y)


def _check_dims(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise DimensionMismatch(f"dimension mismatch: {dims}")


def channel_operators(sigma_x, sigma_n) -> ChannelOperators:
    """Compute ``W_X, W_N, D_X, D_N`` for signal covariance ``sigma_x`` and
    noise covariance ``sigma_n``.

    ``W_N = Sigma_N (Sigma_X + Sigma_N)^{-1}`` is obtained from one Cholesky
    solve against the (symmetric) sum, and ``W_X = I - W_N``.
    """
    sigma_x, sigma_n = as_spd(sigma_x), as_spd(sigma_n)
    _check_dims(sigma_x.dim, sigma_n.dim)
    sx, sn = sigma_x.entries, sigma_n.entries
    total = SpdMatrix(sx + sn)
    # (S^{-1} A)^T = A S^{-1} for symmetric A, S
    w_n = total.solve(sn).T
    w_x = total.solve(sx).T
    d_x = sn @ w_x.T @ w_x
    d_n = sx @ w_n.T @ w_n
    return ChannelOperators(_frozen(w_x), _frozen(w_n), _frozen(d_x), _frozen(d_n))


def mmse_gaussian(sigma_x, sigma_n) -> float:
    """MMSE of a Gaussian prior with covariance ``sigma_x`` observed in
    Gaussian noise with covariance ``sigma_n``: ``tr(D_X) + tr(D_N)``."""
    ops = channel_operators(sigma_x, sigma_n)
    return float(np.trace(ops.d_x) + np.trace(ops.d_n))


def mmse_gaussian_identity_form(sigma_x, sigma_n) -> float:
    """``tr(Sigma_X - Sigma_X (Sigma_X + Sigma_N)^{-1} Sigma_X)``.

    Algebraically equal to :func:`mmse_gaussian`; kept as an independent
    self-check.
    """
    sigma_x, sigma_n = as_spd(sigma_x), as_spd(sigma_n)
    _check_dims(sigma_x.dim, sigma_n.dim)
    sx = sigma_x.entries
    total = SpdMatrix(sx + sigma_n.entries)
    return float(np.trace(sx - sx @ total.solve(sx)))


def mmse_estimator(prior: GaussianDist, sigma_n) -> LinearEstimator:
    """Conditional-mean estimator for a Gaussian prior: ``f(y) = W_X y + W_N mu``."""
    sigma_n = as_spd(sigma_n)
    _check_dims(prior.dim, sigma_n.dim)
    ops = channel_operators(prior.cov, sigma_n)
    return LinearEstimator(ops.w_x, prior.mean)


def apply_estimator(est: LinearEstimator, y) -> np.ndarray:
    """Apply ``est`` to one observation (shape ``(K,)``) or a batch (``(n, K)``)."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != est.dim:
        raise DimensionMismatch(f"observation has length {y.shape[-1]}, estimator expects {est.dim}")
    offset = est.anchor_mean - est.gain @ est.anchor_mean
    return y @ est.gain.T + offset


def kl_gaussian(p: GaussianDist, q: GaussianDist) -> float:
    """KL divergence ``D(p || q)`` in nats between two Gaussians."""
    _check_dims(p.dim, q.dim)
    k = p.dim
    ratio = q.cov.solve(p.cov.entries)
    dmu = p.mean - q.mean
    maha = float(dmu @ q.cov.solve(dmu))
    kl = 0.5 * (float(np.trace(ratio)) - k - (p.cov.logdet - q.cov.logdet) + maha)
    # rounding can push a zero divergence slightly negative
    return max(kl, 0.0)


def mse_linear_under_gaussian(est: LinearEstimator, prior: GaussianDist, sigma_n) -> float:
    """Exact MSE of a linear estimator when ``X ~ prior``.

    With ``M = (I - W)^T (I - W)`` this is
    ``tr(Sigma_N W^T W) + tr(M Sigma_X) + (mu_X - mu_0)^T M (mu_X - mu_0)``,
    i.e. the expectation over ``X`` of the conditional squared error given
    ``X = x``.
    """
    sigma_n = as_spd(sigma_n)
    _check_dims(est.dim, prior.dim, sigma_n.dim)
    w = est.gain
    resid = np.eye(est.dim) - w
    m = resid.T @ resid
    dmu = prior.mean - est.anchor_mean
    noise_part = float(np.trace(sigma_n.entries @ w.T @ w))
    signal_part = float(np.trace(m @ prior.cov.entries))
    return noise_part + signal_part + float(dmu @ m @ dmu)


def reduce_observations(sigma_n, observations: Sequence) -> tuple[SpdMatrix, np.ndarray]:
    """Collapse ``n`` conditionally i.i.d. observations into one.

    Returns ``(Sigma_N / n, mean of observations)``; the inputs are not modified.
    """
    sigma_n = as_spd(sigma_n)
    obs = np.asarray(observations, dtype=float)
    if obs.size == 0:
        raise ValueError("at least one observation is required")
    obs = np.atleast_2d(obs)
    if obs.shape[1] != sigma_n.dim:
        raise DimensionMismatch(f"observations have length {obs.shape[1]}, noise is {sigma_n.dim}-dim")
    n = obs.shape[0]
    return SpdMatrix(sigma_n.entries / n), obs.mean(axis=0)


def toeplitz_exp_cov(dim: int, rate: float) -> SpdMatrix:
    """Covariance with entries ``exp(-rate * |i - j|)``."""
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    idx = np.arange(dim)
    return SpdMatrix(np.exp(-rate * np.abs(idx[:, None] - idx[None, :])))


def loewner_min_eig(a, b) -> float:
    """Smallest eigenvalue of ``b - a``; non-negative iff ``a <= b`` in Loewner order."""
    diff = symmetrize(np.asarray(b, dtype=float) - np.asarray(a, dtype=float))
    return float(np.linalg.eigvalsh(diff)[0])


# JSON wire format shared by every module:
#   matrices {"dim": K, "rows": [[...], ...]}, vectors {"values": [...]}


def matrix_to_json(m) -> dict:
    a = np.asarray(m, dtype=float)
    return {"dim": int(a.shape[0]), "rows": [[float(v) for v in row] for row in a]}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows = obj["rows"]
        dim = int(obj["dim"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from None
    a = np.asarray(rows, dtype=float)
    if a.shape != (dim, dim):
        raise DimensionMismatch(f"matrix declares dim {dim} but rows have shape {a.shape}")
    return a


def vector_to_json(v) -> dict:
    return {"values": [float(x) for x in np.asarray(v, dtype=float).ravel()]}


def vector_from_json(obj: dict) -> np.ndarray:
    try:
        return np.asarray(obj["values"], dtype=float).ravel()
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed vector object: {exc}") from None
