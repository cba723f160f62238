"""Stable-law parameters and scalar quantities derived from the jump measure.

The jump measure is nu(dz) = |z|^(-alpha-1) [a_minus 1_{z<0} + a_plus 1_{z>0}] dz
with alpha in (0,2)\\{1}.  Everything here is a closed form; the quadrature
module provides the independent numeric oracle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlphaOutOfRange,
    NegativeIntensity,
    Overflow,
    WrongRegime,
    ZeroMeasure,
)


class Regime(enum.Enum):
    FINITE_VARIATION = "finite_variation"      # alpha < 1, raw jump sums
    INFINITE_VARIATION = "infinite_variation"  # alpha > 1, compensated jumps


@dataclass(frozen=True)
class StableParams:
    alpha: float
    a_minus: float
    a_plus: float

    def regime(self) -> Regime:
        return Regime.FINITE_VARIATION if self.alpha < 1.0 else Regime.INFINITE_VARIATION

    @property
    def total_intensity(self) -> float:
        return self.a_minus + self.a_plus

    def ratio_c(self) -> float:
        """min/max intensity ratio in [0,1]; 1.0 for the symmetric case."""
        hi = max(self.a_minus, self.a_plus)
        return min(self.a_minus, self.a_plus) / hi

    def swapped(self) -> "StableParams":
        return StableParams(self.alpha, self.a_plus, self.a_minus)


@dataclass(frozen=True)
class TruncationLevel:
    """Cut-off below which jumps are discarded (alpha<1) or compensated-and-discarded (alpha>1)."""

    epsilon: float

    def __post_init__(self):
        if not (self.epsilon > 0.0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be a finite positive real, got {self.epsilon}")


def validate_params(alpha: float, a_minus: float, a_plus: float) -> StableParams:
    """Validate and build a StableParams; never constructs an invalid value."""
    if not (0.0 < alpha < 2.0) or alpha == 1.0:
        raise AlphaOutOfRange(f"alpha must lie in (0,2) with alpha != 1, got {alpha}")
    if a_minus < 0.0 or a_plus < 0.0:
        raise NegativeIntensity(f"tail intensities must be >= 0, got a_minus={a_minus}, a_plus={a_plus}")
    if a_minus + a_plus == 0.0:
        raise ZeroMeasure("a_minus and a_plus cannot both vanish")
    return StableParams(float(alpha), float(a_minus), float(a_plus))


def _eps(eps) -> float:
    if isinstance(eps, TruncationLevel):
        return eps.epsilon
    lvl = TruncationLevel(float(eps))
    return lvl.epsilon


def tail_mass(params: StableParams, eps) -> float:
    """Poisson rate of retained jumps: integral of nu over {|z| > eps}."""
    e = _eps(eps)
    lam = params.total_intensity * e ** (-params.alpha) / params.alpha
    if not math.isfinite(lam):
        raise Overflow(f"tail mass overflows at eps={e}, alpha={params.alpha}")
    return lam


def truncation_drift(params: StableParams, eps) -> float:
    """Compensator rate of retained jumps, integral of z nu(dz) over {|z| > eps}.

    Only defined for alpha in (1,2); below 1 the raw sum is used without
    compensation.
    """
    if params.alpha < 1.0:
        raise WrongRegime("truncation drift is only defined for alpha in (1,2)")
    e = _eps(eps)
    mu = (params.a_plus - params.a_minus) * e ** (1.0 - params.alpha) / (params.alpha - 1.0)
    if not math.isfinite(mu):
        raise Overflow(f"truncation drift overflows at eps={e}, alpha={params.alpha}")
    return mu


def small_jump_variance(params: StableParams, eps) -> float:
    """Variance per unit time of the discarded small jumps, integral of z^2 nu over {|z| <= eps}."""
    e = _eps(eps)
    return params.total_intensity * e ** (2.0 - params.alpha) / (2.0 - params.alpha)


def small_jump_mean(params: StableParams, eps) -> float:
    """Mean flux of the discarded small jumps, integral of z nu over {|z| <= eps}.

    Finite only below alpha = 1; feeds the drift form of the small-jump
    refinement in the thinning solver.
    """
    if params.alpha > 1.0:
        raise WrongRegime("small-jump mean diverges for alpha in (1,2)")
    e = _eps(eps)
    return (params.a_plus - params.a_minus) * e ** (1.0 - params.alpha) / (1.0 - params.alpha)


def sample_jump_size(params: StableParams, eps, u_sign: float, u_mag: float) -> float:
    """Inverse-transform sample of nu restricted to {|z| > eps}, normalized.

    The sign is negative iff u_sign < a_minus/(a_minus+a_plus); the magnitude
    is eps * u_mag^(-1/alpha), matching the tail law P(|z| > x) = (x/eps)^(-alpha).
    """
    if not (0.0 < u_mag < 1.0 or u_mag == 1.0):
        raise ValueError(f"u_mag must lie in (0,1], got {u_mag}")
    if not (0.0 <= u_sign < 1.0):
        raise ValueError(f"u_sign must lie in [0,1), got {u_sign}")
    e = _eps(eps)
    mag = e * u_mag ** (-1.0 / params.alpha)
    neg = u_sign < params.a_minus / params.total_intensity
    return -mag if neg else mag


def jump_sizes_from_uniforms(params: StableParams, eps, u_sign: np.ndarray, u_mag: np.ndarray) -> np.ndarray:
    """Vectorized sample_jump_size for the stream generator (u_mag in (0,1])."""
    e = _eps(eps)
    mags = e * np.power(u_mag, -1.0 / params.alpha)
    signs = np.where(u_sign < params.a_minus / params.total_intensity, -1.0, 1.0)
    return signs * mags


def split_sign_magnitude(params: StableParams, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fold one uniform u in (0,1] into (sign, residual uniform in (0,1]).

    Below p = a_minus/(a_minus+a_plus) the sign is negative and u/p is again
    uniform; above, (u-p)/(1-p) is.  Same law as two independent draws at half
    the generator cost.
    """
    p = params.a_minus / params.total_intensity
    neg = u <= p
    signs = np.where(neg, -1.0, 1.0)
    if p == 0.0:
        return signs, u
    if p == 1.0:
        return signs, u
    residual = np.where(neg, u / p, (u - p) / (1.0 - p))
    return signs, residual
