"""Zero-mean generalized Gaussian priors observed through ``Y = sqrt(snr) X + N``.

Compares two MMSE lower bounds for a scalar generalized Gaussian input:
the Bayesian Cramér–Rao bound ``1 / (snr + I)`` and the KL-ball bound obtained
by placing the input inside the KL ball around its closest Gaussian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .scalar_white import WhiteInstance, white_bounds

_LOG_SQRT_PI = 0.5 * math.log(math.pi)


def gamma_fn(x: float) -> float:
    """Gamma function on the positive real axis."""
    if not x > 0:
        raise DomainError(f"gamma_fn is defined for x > 0 only, got {x!r}")
    return math.gamma(x)


@dataclass(frozen=True)
class GeneralizedGaussian:
    """Density ``p / (2 a Gamma(1/p)) * exp(-(|x| / a)^p)``."""

    scale: float
    shape: float

    def __post_init__(self):
        if not (self.scale > 0 and self.shape > 0):
            raise ValueError(f"scale and shape must be positive, got a={self.scale}, p={self.shape}")

    @property
    def second_moment(self) -> float:
        p = self.shape
        return self.scale ** 2 * math.exp(math.lgamma(3.0 / p) - math.lgamma(1.0 / p))


@dataclass(frozen=True)
class ScaledChannel:
    """``Y = sqrt(snr) X + N`` with ``N ~ N(0, 1)``; ``snr`` is linear, not dB."""

    snr: float

    def __post_init__(self):
        if not self.snr > 0:
            raise ValueError(f"snr must be positive, got {self.snr}")

    @classmethod
    def from_db(cls, snr_db: float) -> "ScaledChannel":
        return cls(10.0 ** (snr_db / 10.0))


def gg_from_power(p: float, b_sq: float) -> GeneralizedGaussian:
    """Generalized Gaussian of shape ``p`` with second moment ``b_sq``."""
    if not (p > 0 and b_sq > 0):
        raise ValueError("p and b_sq must be positive")
    a = math.sqrt(b_sq * math.exp(math.lgamma(1.0 / p) - math.lgamma(3.0 / p)))
    return GeneralizedGaussian(a, p)


def gg_log_density(dist: GeneralizedGaussian, x: float) -> float:
    a, p = dist.scale, dist.shape
    return math.log(p / (2.0 * a)) - math.lgamma(1.0 / p) - (abs(x) / a) ** p


def gg_density(dist: GeneralizedGaussian, x: float) -> float:
    return math.exp(gg_log_density(dist, x))


def gg_fisher_information(dist: GeneralizedGaussian) -> float:
    """Fisher information for location; ``math.inf`` when ``p <= 1/2``."""
    a, p = dist.scale, dist.shape
    if p <= 0.5:
        return math.inf
    return p * p / (a * a) * math.exp(math.lgamma(2.0 - 1.0 / p) - math.lgamma(1.0 / p))


def bayesian_crb(dist: GeneralizedGaussian, chan: ScaledChannel) -> float:
    """``1 / (snr + I)``; zero (a trivial bound) when the Fisher information is infinite."""
    info = gg_fisher_information(dist)
    if math.isinf(info):
        return 0.0
    return 1.0 / (chan.snr + info)


def gg_kl_to_gaussian(p: float) -> float:
    """KL divergence from a shape-``p`` generalized Gaussian to the closest Gaussian.

    The minimising Gaussian matches the second moment, which makes the
    result independent of the scale.
    """
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    lg1 = math.lgamma(1.0 / p)
    lg3 = math.lgamma(3.0 / p)
    val = (math.log(p / math.sqrt(2.0)) + 0.5 * (lg3 - lg1) + _LOG_SQRT_PI - lg1
           + 0.5 - 1.0 / p)
    # exact zero at p = 2 up to rounding
    return max(val, 0.0)


def gg_kl_between(dist: GeneralizedGaussian, ref_scale: float) -> float:
    """KL divergence from ``dist`` to the Gaussian ``G(ref_scale, 2)``, i.e. ``N(0, ref_scale^2 / 2)``."""
    a, p = dist.scale, dist.shape
    return (math.log(p * ref_scale / (2.0 * a)) + _LOG_SQRT_PI - math.lgamma(1.0 / p)
            + (a / ref_scale) ** 2 * math.exp(math.lgamma(3.0 / p) - math.lgamma(1.0 / p))
            - 1.0 / p)


def nearest_gaussian_scale(dist: GeneralizedGaussian) -> float:
    """Scale ``a_0`` of ``G(a_0, 2)`` minimising :func:`gg_kl_between`."""
    return math.sqrt(2.0 * dist.second_moment)


def gg_kl_mmse_bounds(dist: GeneralizedGaussian, chan: ScaledChannel) -> tuple[float, float]:
    """KL-ball bounds ``(lower, upper)`` on the MMSE of ``X`` from ``sqrt(snr) X + N``.

    ``sqrt(snr) X`` lies in the KL ball of radius ``d_KL(p)`` around
    ``N(0, snr * E[X^2])``; the white closed form gives bounds on the MMSE of
    ``sqrt(snr) X`` under unit noise, which scale back by ``1 / snr``.
    """
    inst = WhiteInstance(
        dim=1,
        sigma0_sq=chan.snr * dist.second_moment,
        sigmaN_sq=1.0,
        epsilon=gg_kl_to_gaussian(dist.shape),
    )
    lower, upper = white_bounds(inst)
    return lower / chan.snr, upper / chan.snr
