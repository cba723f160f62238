"""Stable-driven SDEs: exponents, jump-measure integrals, coupled Monte Carlo solvers."""

from .measure import Regime, StableParams, TruncationLevel, validate_params
from .exponents import BetaExponent, Monotone, beta_finite, beta_infinite, required_holder_index
from .engine import CoefficientSet, SolveConfig, make_coefficients
from .noise import EventStream, PathSkeleton, generate_event_stream

__all__ = [
    "Regime",
    "StableParams",
    "TruncationLevel",
    "validate_params",
    "BetaExponent",
    "Monotone",
    "beta_finite",
    "beta_infinite",
    "required_holder_index",
    "CoefficientSet",
    "SolveConfig",
    "make_coefficients",
    "EventStream",
    "PathSkeleton",
    "generate_event_stream",
]
