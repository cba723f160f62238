"""Critical moment exponents and closed forms of the two jump-measure integrals.

``beta_infinite`` / ``beta_finite`` give the exponent beta(alpha, c) at which
the integrals I (alpha < 1) and I-tilde (alpha > 1) vanish, where
c is the tail-intensity ratio.  ``closed_form_I`` / ``closed_form_I_tilde``
evaluate the integrals

    I      = integral of (|1 - x|^beta - 1)            nu(dx),   0 < beta < alpha < 1,
    I-tilde = integral of (|1 + x|^beta - 1 - beta*x)  nu(dx),   1 < alpha < 2,

through Euler-Gamma identities, with an independent sine-form cross-check.
The auxiliary cosine cos(pi*beta) is called ``cos_beta`` throughout to avoid
a name collision with the drift coefficient b.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from math import gamma as _gamma

from .errors import DomainError
from .measure import Regime, StableParams

# Arccos arguments this close outside [-1,1] are rounding artifacts of the
# rational formula at the endpoints c=0 and c=1; anything further out is a bug.
_ACOS_CLAMP = 1e-14

# Gamma form vs sine form must agree to this relative tolerance.
_FORM_AGREEMENT = 1e-10


class Monotone(enum.Enum):
    NON_DECREASING = "non_decreasing"
    NON_INCREASING = "non_increasing"


@dataclass(frozen=True)
class BetaExponent:
    value: float
    regime: Regime
    ratio_c: float
    cos_beta: float  # the cosine whose arccos/pi defines value


def _safe_acos(arg: float) -> float:
    if arg > 1.0:
        if arg > 1.0 + _ACOS_CLAMP:
            raise DomainError(f"arccos argument {arg} outside [-1,1]")
        arg = 1.0
    elif arg < -1.0:
        if arg < -1.0 - _ACOS_CLAMP:
            raise DomainError(f"arccos argument {arg} outside [-1,1]")
        arg = -1.0
    return math.acos(arg)


def beta_infinite(alpha: float, c: float) -> BetaExponent:
    """Critical exponent for alpha in (1,2); lies in [alpha-1, 1].

    Equals 1 at c=0 and alpha-1 at c=1, strictly between for c in (0,1).
    """
    if not (1.0 < alpha < 2.0):
        raise DomainError(f"alpha must lie in (1,2), got {alpha}")
    if not (0.0 <= c <= 1.0):
        raise DomainError(f"c must lie in [0,1], got {c}")
    a = math.cos(math.pi * alpha)
    num = c * c * (1.0 - a * a) - (1.0 + c * a) ** 2
    den = c * c * (1.0 - a * a) + (1.0 + c * a) ** 2
    cos_beta = num / den
    value = _safe_acos(cos_beta) / math.pi
    return BetaExponent(value, Regime.INFINITE_VARIATION, c, cos_beta)


def beta_finite(alpha: float, c: float) -> BetaExponent:
    """Critical exponent for alpha in (1/2,1) and c in [0, -cos(pi*alpha)).

    Equals 2*alpha-1 at c=0; undefined (DomainError) once c reaches
    |cos(pi*alpha)|, where the defining identity has no root.
    """
    if not (0.5 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (1/2,1), got {alpha}")
    a = math.cos(math.pi * alpha)  # in (-1,0)
    if not (0.0 <= c < -a):
        raise DomainError(f"c must lie in [0, {-a}) for alpha={alpha}, got {c}")
    num = (1.0 - a * a) - (c + a) ** 2
    den = (1.0 - a * a) + (c + a) ** 2
    cos_beta = num / den
    value = _safe_acos(cos_beta) / math.pi
    return BetaExponent(value, Regime.FINITE_VARIATION, c, cos_beta)


def _i_summands(alpha: float, beta: float, a_minus: float, a_plus: float):
    """The three Gamma-form summands of I (already including beta/alpha)."""
    pref = beta / alpha
    s1 = pref * a_minus * _gamma(alpha - beta) * _gamma(1.0 - alpha) / _gamma(1.0 - beta)
    s2 = -pref * a_plus * _gamma(beta) * _gamma(1.0 - alpha) / _gamma(1.0 - (alpha - beta))
    s3 = pref * a_plus * _gamma(beta) * _gamma(alpha - beta) / _gamma(alpha)
    return s1, s2, s3


def i_summand_scale(alpha: float, beta: float, a_minus: float, a_plus: float) -> float:
    """Sum of the magnitudes of the Gamma-form summands; tolerance scale for zero identities."""
    return sum(abs(s) for s in _i_summands(alpha, beta, a_minus, a_plus))


def _i_sine_form(alpha: float, beta: float, a_minus: float, a_plus: float) -> float:
    pref = beta * _gamma(beta) * _gamma(alpha - beta) / (alpha * _gamma(alpha))
    sa = math.sin(math.pi * alpha)
    return pref * (
        a_minus * math.sin(math.pi * beta) / sa
        - a_plus * math.sin(math.pi * (alpha - beta)) / sa
        + a_plus
    )


def closed_form_I(alpha: float, beta: float, a_minus: float, a_plus: float) -> float:
    """Closed form of I for 0 < beta < alpha < 1 (diverges at beta >= alpha)."""
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    if not (0.0 < beta < alpha):
        raise DomainError(f"beta must lie in (0, alpha={alpha}), got {beta}")
    s1, s2, s3 = _i_summands(alpha, beta, a_minus, a_plus)
    value = s1 + s2 + s3
    sine = _i_sine_form(alpha, beta, a_minus, a_plus)
    scale = max(abs(s1) + abs(s2) + abs(s3), 1e-300)
    if abs(value - sine) > _FORM_AGREEMENT * scale:
        raise ArithmeticError(
            f"Gamma form {value} and sine form {sine} disagree beyond {_FORM_AGREEMENT} relative"
        )
    return value


def _i_tilde_summands(alpha: float, beta: float, a_minus: float, a_plus: float):
    pref = beta * _gamma(beta) * _gamma(alpha - beta) / (alpha * _gamma(alpha))
    s_comp = math.sin(math.pi * (alpha - 1.0))
    s1 = -pref * a_plus * math.sin(math.pi * beta) / s_comp
    s2 = pref * a_minus
    s3 = pref * a_minus * math.sin(math.pi * (alpha - beta)) / s_comp
    return s1, s2, s3


def i_tilde_summand_scale(alpha: float, beta: float, a_minus: float, a_plus: float) -> float:
    """Magnitude scale of the summands with the sine factors bounded by one.

    At beta = 1 the first summand vanishes through sin(pi*beta), which would
    degenerate a literal |summand| sum; the bounded-sine scale keeps the
    zero-identity tolerance anchored to the prefactor magnitude.
    """
    pref = abs(beta * _gamma(beta) * _gamma(alpha - beta) / (alpha * _gamma(alpha)))
    s = abs(math.sin(math.pi * (alpha - 1.0)))
    return pref * (abs(a_plus) / s + abs(a_minus) + abs(a_minus) / s)


def closed_form_I_tilde(alpha: float, beta: float, a_minus: float, a_plus: float) -> float:
    """Closed form of I-tilde for alpha in (1,2), validated on beta in [alpha-1, 1]."""
    if not (1.0 < alpha < 2.0):
        raise DomainError(f"alpha must lie in (1,2), got {alpha}")
    if not (alpha - 1.0 - 1e-12 <= beta <= 1.0 + 1e-12):
        raise DomainError(f"beta must lie in [alpha-1, 1] = [{alpha - 1.0}, 1], got {beta}")
    s1, s2, s3 = _i_tilde_summands(alpha, beta, a_minus, a_plus)
    return s1 + s2 + s3


def required_holder_index(params: StableParams, monotone_class: Monotone | None) -> float:
    """Regularity index demanded of sigma (alpha>1) or gamma (alpha<1).

    The monotone refinement applies only when the declared direction matches
    the favorable one for the sign of a_plus - a_minus; otherwise the
    symmetric-case column (1/alpha resp. alpha) is returned.  For alpha in
    (0,1/2] or a ratio outside the admissible wedge the exponent convention
    is 0, so the fallback column applies there as well.
    """
    alpha = params.alpha
    c = params.ratio_c()
    if alpha > 1.0:
        if params.a_minus == params.a_plus:
            return 1.0 / alpha
        favorable = Monotone.NON_DECREASING if params.a_minus < params.a_plus else Monotone.NON_INCREASING
        if monotone_class is favorable:
            return (alpha - beta_infinite(alpha, c).value) / alpha
        return 1.0 / alpha
    if params.a_minus == params.a_plus or not (0.5 < alpha < 1.0):
        return alpha
    favorable = Monotone.NON_INCREASING if params.a_minus < params.a_plus else Monotone.NON_DECREASING
    if monotone_class is favorable and c < -math.cos(math.pi * alpha):
        return alpha - beta_finite(alpha, c).value
    return alpha
