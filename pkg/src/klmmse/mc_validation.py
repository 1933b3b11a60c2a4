"""Seeded Monte Carlo checks of the analytic MSE formulas and MMSE bounds.

Random numbers come from numpy's PCG64 generator (``numpy.random.default_rng``)
with standard normals from its ziggurat sampler. Sharded runs derive one
child seed per shard with ``numpy.random.SeedSequence(seed).spawn(shards)``
and merge the shard statistics by sample-count weighting.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .gaussian_core import (
    GaussianDist,
    KlBall,
    LinearEstimator,
    as_spd,
    apply_estimator,
    kl_gaussian,
    mmse_estimator,
    mmse_gaussian,
)
from .saddle_solver import SolverConfig, sample_in_ball_gaussians, solve_bounds

CHUNK = 1 << 16
SE_GATE = 4.0


@dataclass(frozen=True)
class McConfig:
    samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int


def sample_gaussian(dist: GaussianDist, count: int, seed) -> np.ndarray:
    """``count`` draws from ``dist`` as rows of a ``(count, K)`` array."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, dist.dim))
    return dist.mean + z @ dist.cov.chol.T


def _shard_moments(est, prior, noise_chol, count, seed):
    """(n, mean, M2) of squared errors over ``count`` draws."""
    rng = np.random.default_rng(seed)
    k = prior.dim
    x_chol = prior.cov.chol
    n_tot, mean, m2 = 0, 0.0, 0.0
    done = 0
    while done < count:
        b = min(CHUNK, count - done)
        x = prior.mean + rng.standard_normal((b, k)) @ x_chol.T
        y = x + rng.standard_normal((b, k)) @ noise_chol.T
        err = apply_estimator(est, y) - x
        sq = np.einsum("ij,ij->i", err, err)
        # Chan et al. pairwise combination of running moments
        b_mean = float(sq.mean())
        b_m2 = float(np.sum((sq - b_mean) ** 2))
        n_new = n_tot + b
        delta = b_mean - mean
        mean += delta * b / n_new
        m2 += b_m2 + delta * delta * n_tot * b / n_new
        n_tot = n_new
        done += b
    return n_tot, mean, m2


def _combine(parts):
    n_tot, mean, m2 = 0, 0.0, 0.0
    for n, m, s in parts:
        n_new = n_tot + n
        delta = m - mean
        mean += delta * n / n_new
        m2 += s + delta * delta * n_tot * n / n_new
        n_tot = n_new
    return n_tot, mean, m2


def mc_mse(est: LinearEstimator, prior: GaussianDist, sigma_n, cfg: McConfig,
           shards: int = 1) -> McEstimate:
    """Empirical MSE ``E||f(X + N) - X||^2`` with its standard error.

    ``shards > 1`` splits the draws across threads with per-shard child seeds;
    results are deterministic for a fixed shard count.
    """
    sigma_n = as_spd(sigma_n)
    noise_chol = sigma_n.chol
    if shards <= 1:
        n, mean, m2 = _shard_moments(est, prior, noise_chol, cfg.samples, cfg.seed)
    else:
        children = np.random.SeedSequence(cfg.seed).spawn(shards)
        counts = [cfg.samples // shards + (i < cfg.samples % shards) for i in range(shards)]
        jobs = [(c, s) for c, s in zip(counts, children) if c > 0]
        with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
            parts = list(pool.map(lambda j: _shard_moments(est, prior, noise_chol, *j), jobs))
        n, mean, m2 = _combine(parts)
    var = m2 / (n - 1) if n > 1 else 0.0
    return McEstimate(mean=mean, std_error=math.sqrt(var / n), samples=n)


@dataclass(frozen=True)
class TrialResult:
    kl: float
    analytic_mmse: float
    mc_mmse: float
    std_error: float
    margin: float
    passed: bool


@dataclass
class BoundsReport:
    lower: float
    upper: float
    trials: list = field(default_factory=list)
    attained_upper: TrialResult | None = None

    @property
    def violations(self) -> int:
        return sum(not t.passed for t in self.trials)

    @property
    def worst_margin(self) -> float:
        return min(t.margin for t in self.trials)

    def to_json(self, include_trials: bool = True) -> dict:
        out = {
            "trials": len(self.trials),
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "lower": self.lower,
            "upper": self.upper,
            "max_abs_analytic_delta": max(abs(t.mc_mmse - t.analytic_mmse) for t in self.trials),
            "max_analytic_delta_in_se": max(
                abs(t.mc_mmse - t.analytic_mmse) / t.std_error if t.std_error > 0 else 0.0
                for t in self.trials
            ),
        }
        if self.attained_upper is not None:
            out["attained_upper"] = asdict(self.attained_upper)
        if include_trials:
            out["per_trial"] = [asdict(t) for t in self.trials]
        return out


def _check(q: GaussianDist, center: GaussianDist, sigma_n, lower, upper, cfg: McConfig) -> TrialResult:
    est = mmse_estimator(q, sigma_n)
    mc = mc_mse(est, q, sigma_n, cfg)
    gate = SE_GATE * mc.std_error
    margin = min(mc.mean - (lower - gate), (upper + gate) - mc.mean)
    return TrialResult(
        kl=kl_gaussian(q, center),
        analytic_mmse=mmse_gaussian(q.cov, sigma_n),
        mc_mmse=mc.mean,
        std_error=mc.std_error,
        margin=margin,
        passed=margin >= 0,
    )


def mc_verify_bounds(ball: KlBall, sigma_n, cfg: McConfig, trials: int, seed: int,
                     solver_cfg: SolverConfig | None = None) -> BoundsReport:
    """Check that sampled in-ball Gaussians have MC-estimated MMSE inside the bounds.

    Each trial's MMSE is estimated with the estimator matched to that prior
    and compared against ``[lower - 4 se, upper + 4 se]``. The prior that
    attains the upper bound is checked as well. Failures are reported, not
    raised.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sigma_n = as_spd(sigma_n)
    bounds = solve_bounds(ball, sigma_n, solver_cfg)
    report = BoundsReport(lower=bounds.lower, upper=bounds.upper)
    qs = sample_in_ball_gaussians(ball, trials, seed)
    for i, q in enumerate(qs):
        trial_cfg = McConfig(cfg.samples, _derive_seed(cfg.seed, i))
        report.trials.append(_check(q, ball.center, sigma_n, bounds.lower, bounds.upper, trial_cfg))
    worst = ball.center.with_cov(bounds.sup.sigma_x)
    report.attained_upper = _check(worst, ball.center, sigma_n, bounds.lower, bounds.upper,
                                   McConfig(cfg.samples, _derive_seed(cfg.seed, trials)))
    return report


def _derive_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])
