"""Parameter sweeps behind the command-line experiments.

Each sweep evaluates grid points independently and returns rows in grid
order, so results do not depend on how many worker threads were used.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .gaussian_core import (
    GaussianDist,
    KlBall,
    SpdMatrix,
    mmse_estimator,
    mse_linear_under_gaussian,
)
from .gg_bounds import (
    ScaledChannel,
    bayesian_crb,
    gg_from_power,
    gg_kl_mmse_bounds,
    gg_kl_to_gaussian,
)
from .saddle_solver import SolverConfig, least_favorable_vs_nominal, robust_estimator

ROBUSTNESS_COLUMNS = ("mse_f0_nominal", "mse_f0_lfd", "mse_fstar_nominal", "mse_fstar_lfd")
GG_COLUMNS = ("p", "crb", "kl_lower", "kl_upper", "d_kl")


def default_snr_grid() -> list[float]:
    return [float(v) for v in range(-10, 21)]


def default_eps_grid() -> list[float]:
    return [round(0.1 * i, 10) for i in range(41)]


def default_p_grid() -> list[float]:
    return [float(v) for v in np.geomspace(0.3, 8.0, 60)]


def check_grid(grid) -> list[float]:
    """Validate a sweep grid: non-empty, finite, strictly increasing."""
    vals = [float(v) for v in grid]
    if not vals:
        raise ValueError("grid must not be empty")
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("grid values must be finite")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError("grid must be strictly increasing")
    return vals


def white_noise_for_snr(sigma_0: SpdMatrix, snr_db: float) -> SpdMatrix:
    """White noise with ``tr(Sigma_0) / tr(Sigma_N)`` equal to the given SNR."""
    gamma = 10.0 ** (snr_db / 10.0)
    var = sigma_0.trace() / (sigma_0.dim * gamma)
    return SpdMatrix.identity(sigma_0.dim, var)


@dataclass(frozen=True)
class RobustnessPoint:
    mse_f0_nominal: float
    mse_f0_lfd: float
    mse_fstar_nominal: float
    mse_fstar_lfd: float


def robustness_point(center: GaussianDist, sigma_n: SpdMatrix, epsilon: float,
                     cfg: SolverConfig | None = None) -> RobustnessPoint:
    """MSE of the nominal and minimax estimators under the nominal prior and
    under each estimator's own least favourable prior."""
    ball = KlBall(center, epsilon)
    f0 = mmse_estimator(center, sigma_n)
    fstar, sol = robust_estimator(ball, sigma_n, cfg)
    worst_for_f0 = least_favorable_vs_nominal(ball, sigma_n)
    worst_for_fstar = center.with_cov(sol.sigma_x)
    return RobustnessPoint(
        mse_f0_nominal=mse_linear_under_gaussian(f0, center, sigma_n),
        mse_f0_lfd=mse_linear_under_gaussian(f0, worst_for_f0, sigma_n),
        mse_fstar_nominal=mse_linear_under_gaussian(fstar, center, sigma_n),
        mse_fstar_lfd=mse_linear_under_gaussian(fstar, worst_for_fstar, sigma_n),
    )


def _run(fn, grid, threads: int):
    if threads <= 1:
        return [fn(v) for v in grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, grid))


def sweep_snr(center: GaussianDist, epsilon: float, grid, threads: int = 1,
              cfg: SolverConfig | None = None) -> list[dict]:
    grid = check_grid(grid)

    def point(snr_db):
        pt = robustness_point(center, white_noise_for_snr(center.cov, snr_db), epsilon, cfg)
        return {"snr_db": snr_db, **pt.__dict__}

    return _run(point, grid, threads)


def sweep_eps(center: GaussianDist, snr_db: float, grid, threads: int = 1,
              cfg: SolverConfig | None = None) -> list[dict]:
    grid = check_grid(grid)
    if grid[0] < 0:
        raise ValueError("epsilon grid must be non-negative")
    sigma_n = white_noise_for_snr(center.cov, snr_db)

    def point(eps):
        pt = robustness_point(center, sigma_n, eps, cfg)
        return {"epsilon": eps, **pt.__dict__}

    return _run(point, grid, threads)


def sweep_gg(snr_db: float, power: float, grid, threads: int = 1) -> list[dict]:
    grid = check_grid(grid)
    if grid[0] <= 0:
        raise ValueError("shape grid must be positive")
    chan = ScaledChannel.from_db(snr_db)

    def point(p):
        dist = gg_from_power(p, power)
        lower, upper = gg_kl_mmse_bounds(dist, chan)
        return {"p": p, "crb": bayesian_crb(dist, chan), "kl_lower": lower,
                "kl_upper": upper, "d_kl": gg_kl_to_gaussian(p)}

    return _run(point, grid, threads)


def sign_changes(xs, ys) -> list[tuple[float, float]]:
    """Intervals ``(x_i, x_j)`` between consecutive non-zero ``ys`` of opposite sign."""
    out = []
    prev = None
    for x, y in zip(xs, ys):
        if y == 0:
            continue
        if prev is not None and (prev[1] > 0) != (y > 0):
            out.append((prev[0], x))
        prev = (x, y)
    return out
