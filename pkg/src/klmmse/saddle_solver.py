"""Least-favourable Gaussian priors in a KL ball and the minimax estimator.

The extremal prior covariance ``Sigma_X`` for a multiplier ``alpha`` solves the
implicit equation

    Sigma_X^{-1} = Sigma_0^{-1} - alpha * W_N(Sigma_X)^T W_N(Sigma_X),

and ``alpha`` is fixed by requiring ``KL(N(mu_0, Sigma_X) || P_0) = eps``.
``alpha >= 0`` gives the prior that maximises the MMSE (``Branch.SUP``),
``alpha <= 0`` the one that minimises it (``Branch.INF``).

The solver follows the solution curve from ``(Sigma_0, alpha = 0)`` by
pseudo-arclength continuation in ``(Sigma_X^{-1}, alpha)`` until the KL
divergence first reaches ``eps``; see :func:`solve_saddle`.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DimensionMismatch, InfeasibleAlpha, NonConvergent
from .gaussian_core import (
    GaussianDist,
    KlBall,
    LinearEstimator,
    SpdMatrix,
    as_spd,
    channel_operators,
    kl_gaussian,
    matrix_from_json,
    matrix_to_json,
    mmse_estimator,
    mmse_gaussian,
    symmetrize,
)

log = logging.getLogger(__name__)

MAX_DAMPING_HALVINGS = 20
_INITIAL_STEPS = 4
_NEWTON_STALL = 12
_CORRECTOR_ITERS = 8
_TRACK_TOL = 1e-11
# steps that turn the tangent by more than ~35 degrees are retried shorter
_MIN_TANGENT_COS = 0.8


class Branch(enum.Enum):
    SUP = "sup"
    INF = "inf"

    @property
    def sign(self) -> int:
        return 1 if self is Branch.SUP else -1


@dataclass(frozen=True)
class SolverConfig:
    """Solver tolerances and budgets.

    ``tol_fixed_point`` bounds the relative Frobenius residual of the matrix
    equation in precision form, ``max_inner_iters`` the Newton steps of the
    final polish on the KL sphere, ``max_outer_iters`` the continuation steps
    (rejected steps included), and ``damping`` is the initial polish step
    length (halved while a step would leave the PD cone or fail to reduce the
    residual).
    """

    tol_kl: float = 1e-10
    tol_fixed_point: float = 1e-12
    max_inner_iters: int = 500
    max_outer_iters: int = 200
    damping: float = 1.0

    def __post_init__(self):
        if not (self.tol_kl > 0 and self.tol_fixed_point > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_inner_iters < 1 or self.max_outer_iters < 1:
            raise ValueError("iteration budgets must be >= 1")

    @classmethod
    def from_dict(cls, d: dict | None) -> "SolverConfig":
        return cls(**(d or {}))


@dataclass(frozen=True)
class SaddleSolution:
    alpha: float
    sigma_x: SpdMatrix
    branch: Branch
    kl_achieved: float
    residual_eq3: float
    residual_eq9: float
    iterations: int

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "sigma_x": matrix_to_json(self.sigma_x.entries),
            "branch": self.branch.value,
            "kl_achieved": self.kl_achieved,
            "residual_eq3": self.residual_eq3,
            "residual_eq9": self.residual_eq9,
            "iterations": self.iterations,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SaddleSolution":
        return cls(
            alpha=float(obj["alpha"]),
            sigma_x=SpdMatrix(matrix_from_json(obj["sigma_x"])),
            branch=Branch(obj["branch"]),
            kl_achieved=float(obj["kl_achieved"]),
            residual_eq3=float(obj["residual_eq3"]),
            residual_eq9=float(obj["residual_eq9"]),
            iterations=int(obj["iterations"]),
        )


def _noise_gain_gram(sigma_x: np.ndarray, sigma_n: np.ndarray) -> np.ndarray:
    """``W_N^T W_N`` with ``W_N = Sigma_N (Sigma_X + Sigma_N)^{-1}``."""
    w_n = np.linalg.solve(sigma_x + sigma_n, sigma_n).T
    return symmetrize(w_n.T @ w_n)


def _chol_or_none(a: np.ndarray):
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None


def _inverse_from_chol(c: np.ndarray) -> np.ndarray:
    c_inv = np.linalg.inv(c)  # triangular, small K
    return symmetrize(c_inv.T @ c_inv)


class _System:
    """Optimality system in the unknowns ``(P, alpha)``, ``P = Sigma_X^{-1}``.

    Residual: ``F = Sigma_0^{-1} - alpha M(P^{-1}) - P`` (upper triangle) and
    ``KL(P) - kl_target``. Symmetric unknowns are parametrised by their upper
    triangle; an off-diagonal coordinate moves both mirrored entries.
    """

    def __init__(self, sigma_0: SpdMatrix, sigma_n: SpdMatrix):
        self.sigma_0 = sigma_0
        self.k = sigma_0.dim
        self.ref_precision = sigma_0.inverse()
        self.sn = sigma_n.entries
        self.sn_sq = self.sn @ self.sn
        self.iu = np.triu_indices(self.k)
        self.offdiag = self.iu[0] != self.iu[1]
        self.n = len(self.iu[0])

    def unpack(self, v: np.ndarray) -> np.ndarray:
        p = np.zeros((self.k, self.k))
        p[self.iu] = v
        return p + np.triu(p, 1).T

    def state(self, p: np.ndarray):
        """Quantities shared by residual and Jacobian, or None if ``p`` is not PD."""
        c = _chol_or_none(p)
        if c is None:
            return None
        sigma_x = _inverse_from_chol(c)
        a = np.linalg.inv(sigma_x + self.sn)
        a = symmetrize(a)
        m = symmetrize(a @ self.sn_sq @ a)
        logdet_x = -2.0 * float(np.sum(np.log(np.diag(c))))
        kl = 0.5 * (float(np.trace(self.sigma_0.solve(sigma_x))) - self.k
                    - (logdet_x - self.sigma_0.logdet))
        return sigma_x, a, m, kl

    def residual(self, p, alpha, st, kl_target) -> np.ndarray:
        _, _, m, kl = st
        f = self.ref_precision - alpha * m - p
        return np.append(f[self.iu], kl - kl_target)

    def jacobian(self, p, alpha, st) -> np.ndarray:
        sigma_x, a, m, _ = st
        n = self.n
        iu_r, iu_c = self.iu
        g = a @ sigma_x              # columns A s_i
        h = a @ self.sn_sq @ g       # columns A Sigma_N^2 A s_i
        jac = np.zeros((n + 1, n + 1))
        # d M for the unit perturbation of P at (i, j):
        #   g_i h_j^T + h_j g_i^T (+ the (i <-> j) mirror when i != j)
        t1 = g[iu_r[:, None], iu_r[None, :]] * h[iu_c[:, None], iu_c[None, :]]  # G[k,i] H[l,j]
        t2 = h[iu_r[:, None], iu_c[None, :]] * g[iu_c[:, None], iu_r[None, :]]  # H[k,j] G[l,i]
        t3 = g[iu_r[:, None], iu_c[None, :]] * h[iu_c[:, None], iu_r[None, :]]  # G[k,j] H[l,i]
        t4 = h[iu_r[:, None], iu_r[None, :]] * g[iu_c[:, None], iu_c[None, :]]  # H[k,i] G[l,j]
        # rows: output (k, l); columns: input (i, j). The index arrays above pair
        # rows with iu_r/iu_c of the output and columns with those of the input.
        dm = np.where(self.offdiag[None, :], t1 + t2 + t3 + t4, t1 + t2)
        eye_n = np.zeros((n, n))
        eye_n[np.arange(n), np.arange(n)] = 1.0
        jac[:n, :n] = -alpha * dm - eye_n
        jac[:n, n] = -m[self.iu]
        q = self.ref_precision - p
        r = sigma_x @ q @ sigma_x
        jac[n, :n] = np.where(self.offdiag, -r[self.iu], -0.5 * r[self.iu])
        return jac


def _newton(system: _System, p, alpha, kl_target, sign, cfg: "SolverConfig"):
    """Newton corrector for fixed ``kl_target``. Returns ``(p, alpha, st, iters)`` or None."""
    st = system.state(p)
    if st is None:
        return None
    scale = np.linalg.norm(system.ref_precision)
    for it in range(1, cfg.max_inner_iters + 1):
        res = system.residual(p, alpha, st, kl_target)
        f_norm = np.linalg.norm(res[:-1]) / max(np.linalg.norm(p), scale)
        if f_norm <= cfg.tol_fixed_point and abs(res[-1]) <= 0.01 * cfg.tol_kl:
            return p, alpha, st, it
        try:
            step = np.linalg.solve(system.jacobian(p, alpha, st), -res)
        except np.linalg.LinAlgError:
            return None
        merit = np.linalg.norm(res)
        lam = cfg.damping
        for _ in range(MAX_DAMPING_HALVINGS):
            p_new = p + lam * system.unpack(step[:-1])
            a_new = alpha + lam * step[-1]
            st_new = system.state(p_new)
            if st_new is not None and sign * a_new >= 0:
                res_new = system.residual(p_new, a_new, st_new, kl_target)
                if np.linalg.norm(res_new) < merit or merit < 1e-13:
                    break
            lam *= 0.5
        else:
            return None
        p, alpha, st = p_new, a_new, st_new
        if it > _NEWTON_STALL and f_norm > 1e-3:
            # far from quadratic convergence; let the caller shorten the step
            return None
    return None


def eq3_residual(sigma_x, sigma_0, sigma_n, alpha: float) -> float:
    """Frobenius norm of ``Sigma_X - (I + alpha D_N) Sigma_0``."""
    sigma_x, sigma_0, sigma_n = as_spd(sigma_x), as_spd(sigma_0), as_spd(sigma_n)
    ops = channel_operators(sigma_x, sigma_n)
    k = sigma_x.dim
    rhs = (np.eye(k) + alpha * ops.d_n) @ sigma_0.entries
    return float(np.linalg.norm(sigma_x.entries - rhs))


def eq9_residual(sigma_x, sigma_0, sigma_n, alpha: float) -> float:
    """Frobenius norm of
    ``(I + Sigma_N^{-1} Sigma_X)^T (I + Sigma_N^{-1} Sigma_X)(I - Sigma_0^{-1} Sigma_X) + alpha Sigma_X``.

    An inverse-free restatement of the optimality condition; zero exactly
    when ``(alpha, Sigma_X)`` satisfies it.
    """
    sigma_x, sigma_0, sigma_n = as_spd(sigma_x), as_spd(sigma_0), as_spd(sigma_n)
    if not sigma_x.dim == sigma_0.dim == sigma_n.dim:
        raise DimensionMismatch("dimension mismatch")
    sx = sigma_x.entries
    eye = np.eye(sigma_x.dim)
    a = eye + sigma_n.solve(sx)
    b = eye - sigma_0.solve(sx)
    return float(np.linalg.norm(a.T @ a @ b + alpha * sx))


def _curve_scales(system: _System) -> tuple[float, float]:
    """Rates of change of ``alpha`` and ``P`` per unit ``sqrt(KL)`` at the reference.

    Near the reference ``P = Sigma_0^{-1} - alpha M_0`` and
    ``KL ~ alpha^2 / 4 * sum(lambda_i^2)`` with ``lambda`` the eigenvalues of
    ``L^T M_0 L``. Scaling the unknowns by these rates makes unit arclength
    correspond to roughly unit ``sqrt(KL)`` at the start of the curve.
    """
    m0 = _noise_gain_gram(system.sigma_0.entries, system.sn)
    l0 = system.sigma_0.chol
    lam = np.linalg.eigvalsh(symmetrize(l0.T @ m0 @ l0))
    alpha_rate = 2.0 / float(np.linalg.norm(lam))
    return alpha_rate, alpha_rate * float(np.linalg.norm(m0))


class _Tracker:
    """Pseudo-arclength continuation of ``F(P, alpha) = 0`` in scaled coordinates.

    A point is ``y = (vech(P) / p_scale, alpha / alpha_scale)``; the tangent
    is the unit null vector of the ``n x (n + 1)`` Jacobian of ``F``.
    """

    def __init__(self, system: _System, cfg: SolverConfig):
        self.sys = system
        self.cfg = cfg
        self.a_scale, self.p_scale = _curve_scales(system)
        n = system.n
        self.d = np.append(np.full(n, self.p_scale), self.a_scale)
        self.newton_iters = 0

    def split(self, y):
        n = self.sys.n
        return self.sys.unpack(y[:n] * self.p_scale), y[n] * self.a_scale

    def _f_jac(self, y):
        p, alpha = self.split(y)
        st = self.sys.state(p)
        if st is None:
            return None
        full = self.sys.jacobian(p, alpha, st)[:-1] * self.d
        f = self.sys.residual(p, alpha, st, 0.0)[:-1]
        return f, full, st

    def tangent(self, jac, prev):
        border = np.vstack([jac, prev])
        rhs = np.zeros(len(prev))
        rhs[-1] = 1.0
        tau = np.linalg.solve(border, rhs)
        return tau / np.linalg.norm(tau)

    def correct(self, y0, tau, h):
        """Point on the curve at arclength offset ``h`` along ``tau`` from ``y0``, or None."""
        y = y0 + h * tau
        scale = np.linalg.norm(self.sys.ref_precision)
        for _ in range(_CORRECTOR_ITERS):
            out = self._f_jac(y)
            if out is None:
                return None
            f, jac, st = out
            self.newton_iters += 1
            p, _ = self.split(y)
            if np.linalg.norm(f) <= _TRACK_TOL * max(np.linalg.norm(p), scale) and \
                    abs(tau @ (y - y0) - h) <= _TRACK_TOL * (1 + abs(h)):
                return y, jac, st
            rhs = -np.append(f, tau @ (y - y0) - h)
            try:
                y = y + np.linalg.solve(np.vstack([jac, tau]), rhs)
            except np.linalg.LinAlgError:
                return None
        return None


def solve_saddle(ball: KlBall, sigma_n, branch: Branch, cfg: SolverConfig | None = None) -> SaddleSolution:
    """Solve the optimality system for one branch.

    Parameters
    ----------
    ball : KlBall
        Reference prior ``N(mu_0, Sigma_0)`` and radius ``eps``.
    sigma_n : SpdMatrix or array_like
        Noise covariance.
    branch : Branch
        ``SUP`` for the MMSE-maximising prior (``alpha >= 0``), ``INF`` for
        the minimising one (``alpha <= 0``).
    cfg : SolverConfig, optional

    Returns
    -------
    SaddleSolution

    Raises
    ------
    NonConvergent
        Step or Newton budget exhausted.
    InfeasibleAlpha
        Positive definiteness could not be kept along the solution curve.

    Notes
    -----
    The solutions of the matrix equation form a curve through
    ``(Sigma_0, alpha=0)``. Neither ``alpha`` nor the KL divergence is
    guaranteed monotone along it (both fold at high SNR on the ``INF``
    branch), so the curve is followed by pseudo-arclength continuation until
    the KL divergence first reaches ``eps``. The crossing is bracketed in
    arclength, located with Brent's method and polished by Newton's method on
    ``(F(P, alpha) = 0, KL(P) = eps)``. The first crossing is returned; other
    solutions further along the curve are not searched for.
    """
    cfg = cfg or SolverConfig()
    sigma_n = as_spd(sigma_n)
    sigma_0 = ball.center.cov
    if sigma_n.dim != sigma_0.dim:
        raise DimensionMismatch(f"noise is {sigma_n.dim}-dim, prior is {sigma_0.dim}-dim")
    eps = ball.radius
    if eps == 0.0:
        return SaddleSolution(0.0, sigma_0, branch, 0.0, 0.0, 0.0, 0)

    system = _System(sigma_0, sigma_n)
    tracker = _Tracker(system, cfg)
    sign = branch.sign
    t_goal = math.sqrt(eps)

    y = np.append(system.ref_precision[system.iu] / tracker.p_scale, 0.0)
    f, jac, st = tracker._f_jac(y)
    seed = np.zeros(system.n + 1)
    seed[-1] = sign
    tau = tracker.tangent(jac, seed)
    kl = 0.0
    h = t_goal / _INITIAL_STEPS
    max_dt = t_goal / _INITIAL_STEPS
    steps = 0
    while True:
        steps += 1
        if steps > cfg.max_outer_iters:
            raise NonConvergent(
                f"continuation did not reach KL={eps!r} in {cfg.max_outer_iters} steps",
                {"kl_reached": kl, "alpha": tracker.split(y)[1], "branch": branch.value},
            )
        out = tracker.correct(y, tau, h)
        ok = out is not None
        if ok:
            y_new, jac_new, st_new = out
            alpha_new = tracker.split(y_new)[1]
            tau_new = tracker.tangent(jac_new, tau)
            ok = (sign * alpha_new >= 0
                  and abs(math.sqrt(st_new[3]) - math.sqrt(kl)) <= max_dt
                  and tau_new @ tau >= _MIN_TANGENT_COS)
        if not ok:
            h *= 0.5
            if h < t_goal * 1e-9:
                raise InfeasibleAlpha(
                    f"lost the solution curve at KL={kl!r} on the {branch.value} branch",
                    {"kl_reached": kl, "alpha": tracker.split(y)[1], "branch": branch.value},
                )
            continue
        kl_new = st_new[3]
        if kl_new >= eps:
            y = _locate_crossing(tracker, y, tau, h, eps, kl, kl_new)
            break
        y, tau, kl = y_new, tau_new, kl_new
        h *= 1.5

    p_fin, alpha = tracker.split(y)
    out = _newton(system, p_fin, alpha, eps, sign, cfg)
    if out is None:
        raise NonConvergent("Newton polish at the KL crossing failed",
                            {"alpha": alpha, "branch": branch.value})
    p_fin, alpha, _, its = out
    total_newton = tracker.newton_iters + its
    sigma_x = SpdMatrix(system.state(p_fin)[0])
    kl = kl_gaussian(ball.center.with_cov(sigma_x), ball.center)
    if abs(kl - eps) > cfg.tol_kl:
        raise NonConvergent(f"KL constraint missed by {kl - eps:.3e}",
                            {"alpha": alpha, "branch": branch.value})
    log.debug("solve_saddle %s: eps=%g alpha=%.6g steps=%d newton=%d",
              branch.value, eps, alpha, steps, total_newton)
    return SaddleSolution(
        alpha=float(alpha),
        sigma_x=sigma_x,
        branch=branch,
        kl_achieved=kl,
        residual_eq3=eq3_residual(sigma_x, sigma_0, sigma_n, alpha),
        residual_eq9=eq9_residual(sigma_x, sigma_0, sigma_n, alpha),
        iterations=total_newton,
    )


def _locate_crossing(tracker: _Tracker, y0, tau, h, eps, kl0, kl1):
    """Point between arclength 0 and ``h`` from ``y0`` where the KL equals ``eps``."""
    points = {}

    def excess(s):
        if s == 0.0:
            return kl0 - eps
        if s == h and h in points:
            return kl1 - eps
        out = tracker.correct(y0, tau, s)
        if out is None:
            raise InfeasibleAlpha("corrector failed inside a bracketed step")
        points[s] = out[0]
        return out[2][3] - eps

    excess(h)
    if kl1 == eps:
        return points[h]
    s = brentq(excess, 0.0, h, xtol=1e-14 * (1 + h), rtol=4 * np.finfo(float).eps, maxiter=200)
    return points[s]


def robust_estimator(ball: KlBall, sigma_n, cfg: SolverConfig | None = None
                     ) -> tuple[LinearEstimator, SaddleSolution]:
    """Minimax estimator: the conditional-mean estimator of the MMSE-maximising prior."""
    sol = solve_saddle(ball, sigma_n, Branch.SUP, cfg)
    est = mmse_estimator(ball.center.with_cov(sol.sigma_x), sigma_n)
    return est, sol


@dataclass(frozen=True)
class BoundsResult:
    lower: float
    upper: float
    nominal: float
    sup: SaddleSolution
    inf: SaddleSolution


def solve_bounds(ball: KlBall, sigma_n, cfg: SolverConfig | None = None) -> BoundsResult:
    sup = solve_saddle(ball, sigma_n, Branch.SUP, cfg)
    inf = solve_saddle(ball, sigma_n, Branch.INF, cfg)
    return BoundsResult(
        lower=mmse_gaussian(inf.sigma_x, sigma_n),
        upper=mmse_gaussian(sup.sigma_x, sigma_n),
        nominal=mmse_gaussian(ball.center.cov, sigma_n),
        sup=sup,
        inf=inf,
    )


def mmse_bounds(ball: KlBall, sigma_n, cfg: SolverConfig | None = None) -> tuple[float, float]:
    """``(lower, upper)`` bounds on the MMSE over all priors in ``ball``."""
    res = solve_bounds(ball, sigma_n, cfg)
    return res.lower, res.upper


def least_favorable_for_estimator(est: LinearEstimator, ball: KlBall, sigma_n) -> GaussianDist:
    """Prior in ``ball`` that maximises the MSE of a fixed ``mu_0``-anchored linear estimator.

    The MSE is the expectation of a quadratic centred at ``mu_0`` with weight
    ``M = (I - W)^T (I - W)``, so the worst prior is Gaussian with precision
    ``Sigma_0^{-1} - alpha M`` and ``alpha`` is the unique value putting it on
    the KL sphere. In whitened coordinates this reduces to a scalar equation
    in the eigenvalues of ``L^T M L``.
    """
    center = ball.center
    if not np.allclose(est.anchor_mean, center.mean, rtol=0, atol=1e-12 * (1 + np.abs(center.mean).max())):
        raise ValueError("estimator must be anchored at the ball centre mean")
    sigma_n = as_spd(sigma_n)
    if not est.dim == center.dim == sigma_n.dim:
        raise DimensionMismatch("dimension mismatch")
    eps = ball.radius
    if eps == 0.0:
        return center
    resid = np.eye(est.dim) - est.gain
    m = symmetrize(resid.T @ resid)
    chol = center.cov.chol
    lam, vecs = np.linalg.eigh(symmetrize(chol.T @ m @ chol))
    lam_max = lam[-1]
    if lam_max <= 0:
        raise InfeasibleAlpha("estimator error does not depend on the prior; no active worst case")
    ratios = lam / lam_max

    def excess(t):
        # t = alpha * lam_max in [0, 1)
        u = -t * ratios
        return 0.5 * float(np.sum(-u / (1.0 + u) + np.log1p(u))) - eps

    t_hi = 1.0 - 1e-15
    if excess(t_hi) < 0:
        raise InfeasibleAlpha(
            f"KL stays below eps={eps!r} up to the positive-definiteness limit",
            {"alpha_limit": 1.0 / lam_max},
        )
    t = brentq(excess, 0.0, t_hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    scaled = vecs / (1.0 - t * ratios)
    cov = symmetrize(chol @ (scaled @ vecs.T) @ chol.T)
    return GaussianDist(center.mean, SpdMatrix(cov))


def least_favorable_vs_nominal(ball: KlBall, sigma_n, cfg: SolverConfig | None = None) -> GaussianDist:
    """Worst prior in ``ball`` for the nominal estimator matched to the ball centre."""
    f0 = mmse_estimator(ball.center, sigma_n)
    return least_favorable_for_estimator(f0, ball, sigma_n)


def sample_in_ball_gaussians(ball: KlBall, count: int, seed: int) -> list[GaussianDist]:
    """Random Gaussians with ``KL(Q || P_0)`` between ``eps/2`` and ``eps``.

    Each draw perturbs the centre as
    ``N(mu_0 + delta * w * Sigma_0^{1/2} u, Sigma_0^{1/2}(I + delta S) Sigma_0^{1/2})``
    with ``S`` a random symmetric matrix of unit spectral norm, ``u`` a unit
    vector and ``w`` in ``[0, 1)``; ``delta`` is set by bisection so the KL
    hits a target drawn uniformly from ``[eps/2, eps]``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    center = ball.center
    eps = ball.radius
    if eps == 0.0:
        return [center for _ in range(count)]
    rng = np.random.default_rng(seed)
    k = center.dim
    root = center.cov.sqrt()
    out = []
    for _ in range(count):
        a = rng.standard_normal((k, k))
        s = symmetrize(a)
        s_eig, s_vec = np.linalg.eigh(s)
        scale = np.abs(s_eig).max()
        s_eig = s_eig / scale
        u = rng.standard_normal(k)
        u /= np.linalg.norm(u)
        w = rng.uniform()
        target = rng.uniform(0.5 * eps, eps)

        def kl_of(delta):
            return 0.5 * float(np.sum(delta * s_eig - np.log1p(delta * s_eig))) + 0.5 * (delta * w) ** 2

        neg = s_eig.min()
        d_cap = -1.0 / neg if neg < 0 else math.inf
        d_hi = 1.0
        while d_hi < d_cap and kl_of(d_hi) < target:
            d_hi *= 2.0
        d_hi = min(d_hi, d_cap)
        d_lo = 0.0
        # invariant: kl_of(d_lo) <= target < kl_of(d_hi)
        for _ in range(100):
            mid = 0.5 * (d_lo + d_hi)
            if kl_of(mid) > target:
                d_hi = mid
            else:
                d_lo = mid
        delta = d_lo
        cov_w = symmetrize((s_vec * (1.0 + delta * s_eig)) @ s_vec.T)
        cov = symmetrize(root @ cov_w @ root)
        mean = center.mean + delta * w * (root @ u)
        q = GaussianDist(mean, SpdMatrix(cov))
        out.append(q)
    return out
