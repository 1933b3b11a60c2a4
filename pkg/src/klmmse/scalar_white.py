"""Closed-form bounds for a white signal in white noise, and the real
branches ``W_0`` / ``W_{-1}`` of the Lambert W function they rely on.

For ``Sigma_0 = s0 * I`` and ``Sigma_N = sN * I`` the extremal priors in the
KL ball are isotropic with variance ``r * s0``, where ``r`` solves
``r - ln r = 1 + 2 eps / K``. The two roots are ``r = -W_k(-exp(-c))``:
branch 0 gives ``r <= 1`` (the variance that minimises the MMSE), branch -1
gives ``r >= 1`` (the variance that maximises it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NonConvergent

INV_E = math.exp(-1.0)
MAX_HALLEY_ITERS = 50

# Below this distance from the branch point (in units of e*x + 1) the
# initial guess comes from the branch-point series.
_SERIES_ZONE = 0.25
# Below this eps/K the white variances are taken straight from the series,
# since forming -exp(-c) would discard the offset from the branch point.
_SERIES_EPS_PER_DIM = 1e-8

# W(x) = sum_k mu_k p^k with p = +/- sqrt(2 (e x + 1)), p > 0 on branch 0.
_BRANCH_SERIES = (
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680863.0 / 43545600.0,
)


def _branch_point_series(p: float) -> float:
    w = 0.0
    for coef in reversed(_BRANCH_SERIES):
        w = w * p + coef
    return w


def _initial_guess(branch: int, x: float) -> float:
    offset = math.e * x + 1.0
    if offset < _SERIES_ZONE:
        p = math.sqrt(2.0 * max(offset, 0.0))
        return _branch_point_series(p if branch == 0 else -p)
    if branch == -1:
        # asymptotic form as x -> 0-
        l1 = math.log(-x)
        l2 = math.log(-l1)
        return l1 - l2 + l2 / l1
    if x < 3.0:
        # Winitzki-type approximation, good to a few percent on [-1/e, 3]
        lx = math.log1p(x)
        return lx * (1.0 - math.log1p(lx) / (2.0 + lx))
    l1 = math.log(x)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def lambert_w(branch: int, x: float) -> float:
    """Real Lambert W: the solution ``w`` of ``w * exp(w) = x``.

    Parameters
    ----------
    branch : {0, -1}
        ``0`` for the principal branch (``w >= -1``, defined for
        ``x >= -1/e``), ``-1`` for the lower branch (``w <= -1``, defined for
        ``-1/e <= x < 0``).
    x : float

    Returns
    -------
    float

    Raises
    ------
    DomainError
        If ``x`` lies outside the domain of the requested branch.

    Notes
    -----
    Halley iteration started from the branch-point series near ``-1/e``, an
    asymptotic logarithmic guess away from it, and at most
    ``MAX_HALLEY_ITERS`` steps.
    """
    x = float(x)
    if branch not in (0, -1):
        raise DomainError(f"only branches 0 and -1 are supported, got {branch}")
    if math.isnan(x):
        raise DomainError("x is NaN")
    # admit x a few ulps below the float nearest -1/e
    if x < -INV_E * (1.0 + 4e-16):
        raise DomainError(f"x = {x!r} is below the branch point -1/e")
    if branch == -1 and x >= 0.0:
        raise DomainError(f"branch -1 is defined on [-1/e, 0), got x = {x!r}")
    if x <= -INV_E:
        return -1.0
    if branch == 0:
        if x == 0.0:
            return 0.0
        if math.isinf(x):
            return math.inf
        if abs(x) < 1e-8:
            return x - x * x + 1.5 * x ** 3

    w = _initial_guess(branch, x)
    best_w, best_f = w, math.inf
    for _ in range(MAX_HALLEY_ITERS):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) < best_f:
            best_w, best_f = w, abs(f)
        wp1 = w + 1.0
        if f == 0.0 or wp1 == 0.0:
            return w
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        w_new = w - f / denom
        # keep the iterate on the requested side of the branch point
        if branch == 0 and w_new < -1.0:
            w_new = 0.5 * (w - 1.0)
        elif branch == -1 and w_new > -1.0:
            w_new = 0.5 * (w - 1.0)
        if abs(w_new - w) <= 1e-15 * (1.0 + abs(w_new)):
            return w_new
        w = w_new
    # near -1/e the last bits of w dither; accept the best iterate if its
    # residual is at rounding level
    if best_f <= 1e-14 * max(abs(x), 1e-300):
        return best_w
    raise NonConvergent(f"Lambert W (branch {branch}) did not converge at x = {x!r}",
                        {"x": x, "w": w})


@dataclass(frozen=True)
class WhiteInstance:
    """Isotropic signal ``sigma0_sq * I`` in isotropic noise ``sigmaN_sq * I``."""

    dim: int
    sigma0_sq: float
    sigmaN_sq: float
    epsilon: float

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not self.sigma0_sq > 0 or not self.sigmaN_sq > 0:
            raise ValueError("variances must be positive")
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be >= 0")


def variance_ratios(epsilon: float, dim: int) -> tuple[float, float]:
    """Roots ``(r_low, r_high)`` of ``r - ln r = 1 + 2 eps / dim``."""
    if not epsilon >= 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    delta = 2.0 * epsilon / dim
    if epsilon / dim < _SERIES_EPS_PER_DIM:
        # e*x + 1 = 1 - exp(-delta), computed without cancellation
        p = math.sqrt(-2.0 * math.expm1(-delta))
        return -_branch_point_series(p), -_branch_point_series(-p)
    x = -math.exp(-(1.0 + delta))
    return -lambert_w(0, x), -lambert_w(-1, x)


def white_variances(inst: WhiteInstance) -> tuple[float, float]:
    """Extremal prior variances ``(s_inf, s_sup)`` for a white instance.

    ``s_inf <= sigma0_sq`` attains the lower MMSE bound and ``s_sup >= sigma0_sq``
    the upper one.
    """
    r_low, r_high = variance_ratios(inst.epsilon, inst.dim)
    return r_low * inst.sigma0_sq, r_high * inst.sigma0_sq


def white_bounds(inst: WhiteInstance) -> tuple[float, float]:
    """Total (summed over the ``K`` coordinates) MMSE bounds ``(lower, upper)``."""
    s_inf, s_sup = white_variances(inst)
    sn = inst.sigmaN_sq

    def per_dim(s):
        return s * sn / (s + sn)

    return inst.dim * per_dim(s_inf), inst.dim * per_dim(s_sup)
