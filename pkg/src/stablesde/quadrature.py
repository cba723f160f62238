"""Adaptive numeric evaluation of the jump-measure integrals.

Independent oracle for the closed forms in :mod:`stablesde.exponents`, plus
the smoothed families J, K (alpha < 1) and J-tilde, K-tilde, L-tilde
(alpha > 1) together with their eta -> 0 extrapolation.

Integrands are rewritten in expm1/log1p form before hitting the measure
weight x^(-alpha-1): the raw differences cancel catastrophically near zero
and the weight amplifies that noise beyond any quadrature tolerance.
Panels touching 0 or infinity are mapped by power substitutions chosen from
the known local order of the integrand, so every panel handed to the
adaptive integrator is smooth and bounded.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from math import expm1, log1p

from scipy.integrate import IntegrationWarning, quad

from .errors import DivergentSequence, DomainError, InsufficientPoints, NonConvergence
from .measure import StableParams


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 200
    singularity_split: float = 1.0  # anchor between the zero-substitution region and the tail

    def __post_init__(self):
        if self.abs_tol <= 0.0 or self.rel_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions must be >= 10")


@dataclass(frozen=True)
class SmoothedEvalPoint:
    delta: float                 # the coupling gap, nonzero
    eta: float                   # smoothing width of (eta^2 + x^2)^(beta/2)
    beta: float
    params: StableParams
    delta_small: float = 0.0     # coefficient gap, used by the tilde family only

    def __post_init__(self):
        if self.delta == 0.0:
            raise ValueError("delta must be nonzero")
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")


class QuadValue(float):
    """A float with the accumulated quadrature error estimate attached."""

    error: float

    def __new__(cls, value: float, error: float):
        obj = super().__new__(cls, value)
        obj.error = float(error)
        return obj


# ---------------------------------------------------------------------------
# numerically stable building blocks
# ---------------------------------------------------------------------------

def onep_powm1(w: float, p: float) -> float:
    """(1+w)^p - 1 without cancellation, for w >= -1."""
    if w == -1.0:
        return -1.0
    return expm1(p * log1p(w))


def onep_powm1_lin(w: float, p: float) -> float:
    """(1+w)^p - 1 - p*w without cancellation."""
    if -0.25 < w < 0.25:
        # power series from the quadratic term; ratio |w| < 1/4 converges fast
        term = p * (p - 1.0) / 2.0 * w * w
        total = term
        k = 2
        while abs(term) > 1e-18 * abs(total) + 1e-300:
            term *= (p - k) / (k + 1.0) * w
            total += term
            k += 1
            if k > 60:
                break
        return total
    return onep_powm1(w, p) - p * w


def phi_diff(d: float, s: float, eta: float, beta: float) -> float:
    """phi_eta(d+s) - phi_eta(d) with phi_eta(x) = (eta^2+x^2)^(beta/2)."""
    a = eta * eta + d * d
    w = s * (s + 2.0 * d) / a
    return a ** (beta / 2.0) * onep_powm1(w, beta / 2.0)


def phi_diff_comp(d: float, s: float, eta: float, beta: float) -> float:
    """phi_eta(d+s) - phi_eta(d) - s*phi_eta'(d), stable for small s."""
    a = eta * eta + d * d
    w = s * (s + 2.0 * d) / a
    return a ** (beta / 2.0) * (onep_powm1_lin(w, beta / 2.0) + (beta / 2.0) * s * s / a)


def phi_prime(d: float, eta: float, beta: float) -> float:
    """Derivative of (eta^2 + x^2)^(beta/2) at x = d."""
    return beta * d * (eta * eta + d * d) ** (beta / 2.0 - 1.0)


def phi_second(d: float, eta: float, beta: float) -> float:
    """Second derivative of (eta^2 + x^2)^(beta/2) at x = d."""
    a = eta * eta + d * d
    return beta * a ** (beta / 2.0 - 2.0) * (a + (beta - 2.0) * d * d)


def pow_abs_diff(d: float, s: float, beta: float) -> float:
    """|d+s|^beta - |d|^beta, stable for small s (d nonzero)."""
    v = s * (s + 2.0 * d) / (d * d)
    return abs(d) ** beta * onep_powm1(v, beta / 2.0)


def psi_bracket(d: float, s: float, eta: float, beta: float) -> float:
    """phi_eta(d+s) - phi_eta(d) - |d+s|^beta + |d|^beta."""
    return phi_diff(d, s, eta, beta) - pow_abs_diff(d, s, beta)


# ---------------------------------------------------------------------------
# the workhorse: integrate f(x) x^(-alpha-1) dx over (lower, upper)
# ---------------------------------------------------------------------------

def _quad_panel(fn, a: float, b: float, spec: QuadratureSpec):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        out = quad(
            fn, a, b,
            epsabs=spec.abs_tol, epsrel=spec.rel_tol,
            limit=spec.max_subdivisions, full_output=1,
        )
    value, abserr = out[0], out[1]
    clean = len(out) == 3
    return value, abserr, clean


# Beyond these bounds the measure variable is handled analytically through the
# integrand's limit coefficient; floats cannot represent x = t^(+-m) there,
# and for nearly degenerate exponents real mass lives outside float range.
_HEAD_X = 1e-250
_TAIL_X = 1e250


def nu_power_integral(
    f,
    alpha: float,
    spec: QuadratureSpec,
    lower: float = 0.0,
    upper: float = math.inf,
    splits=(),
    zero_order: float = 1.0,
    tail_order: float = 0.0,
    zero_limit: float | None = None,
    tail_limit: float | None = None,
) -> QuadValue:
    """Integrate f(x) * x^(-alpha-1) over (lower, upper) within (0, inf).

    ``zero_order`` is the power of the leading behavior f(x) ~ C x^q at 0
    (must exceed alpha when lower == 0); ``tail_order`` bounds f at infinity
    (must stay below alpha when upper == inf).  ``splits`` lists interior
    kinks or peaks worth dedicated panels.  ``zero_limit``/``tail_limit`` are
    the limits of f(x)/x^order at 0/infinity; when given, the sub-head and
    super-tail beyond float range integrate in closed form, which matters once
    the exponent gap |order - alpha| gets small.
    """
    pts = sorted({s for s in splits if lower < s < upper and math.isfinite(s)})
    edges = [lower, *pts, upper]
    if lower == 0.0 and edges[1] == math.inf:
        edges = [0.0, spec.singularity_split, math.inf]

    total = 0.0
    err = 0.0
    all_clean = True

    start = 0
    if lower == 0.0:
        if zero_order <= alpha:
            raise DomainError(f"integrand order {zero_order} at 0 not integrable for alpha={alpha}")
        m = 2.0 / (zero_order - alpha)
        q = zero_order
        s0 = edges[1]

        # substitute x = t^m with m = 2/(q - alpha): the transformed integrand
        # is m * t * f(x)/x^q, linear at t = 0.  Below x_tiny the ratio f/x^q
        # underflows even though x is representable; hand off to the limit.
        x_tiny = 10.0 ** (-280.0 / q)

        def near_zero(t, m=m, q=q):
            try:
                x = t ** m
            except OverflowError:
                return 0.0
            if x < x_tiny:
                return m * t * zero_limit if zero_limit is not None else 0.0
            return m * t * (f(x) / x ** q)

        t_lo = 0.0
        if zero_limit is not None:
            total += zero_limit * _HEAD_X ** (zero_order - alpha) / (zero_order - alpha)
            t_lo = _HEAD_X ** (1.0 / m)
        v, e, ok = _quad_panel(near_zero, t_lo, s0 ** (1.0 / m), spec)
        total += v
        err += e
        all_clean &= ok
        start = 1

    end = len(edges) - 1
    if upper == math.inf:
        if tail_order >= alpha:
            raise DomainError(f"tail order {tail_order} not integrable for alpha={alpha}")
        m2 = 2.0 / (alpha - tail_order)
        s1 = edges[-2]

        def tail(t, m2=m2):
            try:
                x = t ** (-m2)
            except OverflowError:
                return 0.0
            if not math.isfinite(x):
                return 0.0
            r = f(x) / x ** tail_order if tail_order != 0.0 else f(x)
            if not math.isfinite(r):
                return 0.0
            return m2 * t * r

        t_lo = 0.0
        if tail_limit is not None:
            total += tail_limit * _TAIL_X ** (tail_order - alpha) / (alpha - tail_order)
            t_lo = _TAIL_X ** (-1.0 / m2)
        v, e, ok = _quad_panel(tail, t_lo, s1 ** (-1.0 / m2), spec)
        total += v
        err += e
        all_clean &= ok
        end -= 1

    for i in range(start, end):
        fn = lambda x: f(x) * x ** (-alpha - 1.0)
        v, e, ok = _quad_panel(fn, edges[i], edges[i + 1], spec)
        total += v
        err += e
        all_clean &= ok

    # a hit subdivision cap is only fatal when the achieved error is far off
    # the requested tolerances; the remaining estimate still rides on QuadValue
    if not all_clean and err > max(1e3 * spec.abs_tol, 1e3 * spec.rel_tol * abs(total), 1e-7):
        raise NonConvergence(
            f"subdivision budget exhausted: value={total}, error={err}, spec={spec}"
        )
    return QuadValue(total, err)


def _two_sided(f_pos, f_neg, params: StableParams, spec: QuadratureSpec, **kw):
    """a_plus * int f_pos + a_minus * int f_neg over (0, inf), sharing panel options.

    ``splits_neg``, ``zero_limits`` and ``tail_limits`` carry per-side values;
    everything else is shared.
    """
    kw_pos = dict(kw)
    kw_neg = dict(kw)
    kw_neg["splits"] = kw.get("splits_neg", kw.get("splits", ()))
    for key, pos_key, neg_key in (
        ("zero_limits", "zero_limit", "zero_limit"),
        ("tail_limits", "tail_limit", "tail_limit"),
    ):
        if key in kw:
            pos_val, neg_val = kw[key]
            kw_pos[pos_key] = pos_val
            kw_neg[neg_key] = neg_val
    for d in (kw_pos, kw_neg):
        d.pop("splits_neg", None)
        d.pop("zero_limits", None)
        d.pop("tail_limits", None)
    total = 0.0
    err = 0.0
    if params.a_plus > 0.0:
        r = nu_power_integral(f_pos, params.alpha, spec, **kw_pos)
        total += params.a_plus * r
        err += params.a_plus * r.error
    if params.a_minus > 0.0:
        r = nu_power_integral(f_neg, params.alpha, spec, **kw_neg)
        total += params.a_minus * r
        err += params.a_minus * r.error
    return QuadValue(total, err)


# ---------------------------------------------------------------------------
# the two base integrals
# ---------------------------------------------------------------------------

def integral_I_numeric(
    alpha: float, beta: float, a_minus: float, a_plus: float,
    spec: QuadratureSpec = QuadratureSpec(),
) -> QuadValue:
    """Numeric value of the integral of (|1-x|^beta - 1) against the jump measure."""
    if not (0.0 < beta < alpha < 1.0):
        raise DomainError(f"need 0 < beta < alpha < 1, got alpha={alpha}, beta={beta}")
    params = StableParams(alpha, a_minus, a_plus)

    def f_pos(x):
        # |1-x|^beta - 1 for x > 0; kink at x = 1
        return onep_powm1(-x, beta) if x < 1.0 else onep_powm1(x - 2.0, beta) if x < 2.0 else (x - 1.0) ** beta - 1.0

    def f_neg(x):
        # |1+x|^beta - 1 on the reflected negative axis
        return onep_powm1(x, beta)

    return _two_sided(
        f_pos, f_neg, params, spec,
        splits=(1.0, 2.0), splits_neg=(1.0,),
        zero_order=1.0, tail_order=beta,
        zero_limits=(-beta, beta), tail_limits=(1.0, 1.0),
    )


def integral_I_tilde_numeric(
    alpha: float, beta: float, a_minus: float, a_plus: float,
    spec: QuadratureSpec = QuadratureSpec(),
) -> QuadValue:
    """Numeric value of the integral of (|1+x|^beta - 1 - beta*x) against the jump measure."""
    if not (1.0 < alpha < 2.0):
        raise DomainError(f"alpha must lie in (1,2), got {alpha}")
    if not (alpha - 1.0 - 1e-12 <= beta <= 1.0 + 1e-12):
        raise DomainError(f"beta must lie in [alpha-1, 1], got {beta}")
    # The compensator term -beta*x dominates the tail but only converges in
    # combination with the rest near zero.  Split at Z: keep the compensated
    # integrand on (0, Z], integrate the raw difference |1 +- x|^beta - 1 on
    # (Z, inf) where it has clean order beta, and add the linear tail
    # -beta * integral_Z^inf x nu(dx) in closed form.
    zsplit = 4.0
    lin_tail = zsplit ** (1.0 - alpha) / (alpha - 1.0)
    total = 0.0
    err = 0.0
    curv = beta * (beta - 1.0) / 2.0
    if a_plus > 0.0:
        near = nu_power_integral(
            lambda x: onep_powm1_lin(x, beta), alpha, spec,
            upper=zsplit, splits=(1.0,), zero_order=2.0, zero_limit=curv,
        )
        far = nu_power_integral(
            lambda x: onep_powm1(x, beta), alpha, spec,
            lower=zsplit, splits=(2.0 * zsplit,), tail_order=beta, tail_limit=1.0,
        )
        total += a_plus * (near + far - beta * lin_tail)
        err += a_plus * (near.error + far.error)
    if a_minus > 0.0:
        def near_neg(x):
            if x < 1.0:
                return onep_powm1_lin(-x, beta)
            return abs(x - 1.0) ** beta - 1.0 + beta * x

        near = nu_power_integral(
            near_neg, alpha, spec,
            upper=zsplit, splits=(1.0, 2.0), zero_order=2.0, zero_limit=curv,
        )
        far = nu_power_integral(
            lambda x: (x - 1.0) ** beta - 1.0, alpha, spec,
            lower=zsplit, splits=(2.0 * zsplit,), tail_order=beta, tail_limit=1.0,
        )
        total += a_minus * (near + far + beta * lin_tail)
        err += a_minus * (near.error + far.error)
    return QuadValue(total, err)


# ---------------------------------------------------------------------------
# smoothed families
# ---------------------------------------------------------------------------

def J_eta(point: SmoothedEvalPoint, spec: QuadratureSpec = QuadratureSpec()) -> QuadValue:
    """Smoothed gap integral: integral of phi_eta(delta - z) - phi_eta(delta) against nu."""
    p = point.params
    if not (0.0 < p.alpha < 1.0) or not (0.0 < point.beta < p.alpha):
        raise DomainError("J requires alpha in (0,1) and beta in (0, alpha)")
    d, eta, beta = point.delta, point.eta, point.beta

    def f_pos(z):
        return phi_diff(d, -z, eta, beta)

    def f_neg(z):
        return phi_diff(d, z, eta, beta)

    ad = abs(d)
    peak = _peak_splits(ad, eta)
    dphi = phi_prime(d, eta, beta)
    return _two_sided(
        f_pos, f_neg, p, spec,
        splits=peak, splits_neg=peak,
        zero_order=1.0, tail_order=beta,
        zero_limits=(-dphi, dphi), tail_limits=(1.0, 1.0),
    )


def K_eta(point: SmoothedEvalPoint, spec: QuadratureSpec = QuadratureSpec()) -> QuadValue:
    """Absolute version of J; dominates |J| pointwise."""
    p = point.params
    if not (0.0 < p.alpha < 1.0) or not (0.0 < point.beta < p.alpha):
        raise DomainError("K requires alpha in (0,1) and beta in (0, alpha)")
    d, eta, beta = point.delta, point.eta, point.beta

    def f_pos(z):
        return abs(phi_diff(d, -z, eta, beta))

    def f_neg(z):
        return abs(phi_diff(d, z, eta, beta))

    ad = abs(d)
    # |phi_diff| kinks where the arguments have equal magnitude: z = 2*delta
    peak = _peak_splits(ad, eta) + (2.0 * ad,)
    adphi = abs(phi_prime(d, eta, beta))
    return _two_sided(
        f_pos, f_neg, p, spec,
        splits=peak, splits_neg=peak,
        zero_order=1.0, tail_order=beta,
        zero_limits=(adphi, adphi), tail_limits=(1.0, 1.0),
    )


def _peak_splits(center: float, width: float):
    """Panel edges resolving a width-scale feature at ``center``."""
    pts = [center, 2.0 * center]
    for k in (5.0, 50.0):
        if k * width < 0.5 * center:
            pts += [center - k * width, center + k * width]
    return tuple(sorted(pts))


def _require_tilde(point: SmoothedEvalPoint):
    p = point.params
    if not (1.0 < p.alpha < 2.0) or not (0.0 < point.beta <= 1.0):
        raise DomainError("tilde family requires alpha in (1,2) and beta in (0,1]")


def tilde_J_eta(point: SmoothedEvalPoint, spec: QuadratureSpec = QuadratureSpec()) -> QuadValue:
    """Compensated smoothed integral over the whole line."""
    _require_tilde(point)
    p = point.params
    d, dl, eta, beta = point.delta, point.delta_small, point.eta, point.beta
    if dl == 0.0:
        return QuadValue(0.0, 0.0)

    zstar = abs(d / dl)
    zsplit = 4.0 * max(zstar, abs(d), 1.0)
    peak = _peak_splits(zstar, eta / abs(dl))
    lin_tail = zsplit ** (1.0 - p.alpha) / (p.alpha - 1.0)
    dphi = phi_prime(d, eta, beta)
    total = 0.0
    err = 0.0
    curv = 0.5 * dl * dl * phi_second(d, eta, beta)
    for a_side, sign in ((p.a_plus, 1.0), (p.a_minus, -1.0)):
        if a_side == 0.0:
            continue
        near = nu_power_integral(
            lambda z: phi_diff_comp(d, sign * dl * z, eta, beta), p.alpha, spec,
            upper=zsplit, splits=peak, zero_order=2.0, zero_limit=curv,
        )
        far = nu_power_integral(
            lambda z: phi_diff(d, sign * dl * z, eta, beta), p.alpha, spec,
            lower=zsplit, splits=(2.0 * zsplit,), tail_order=beta,
            tail_limit=abs(dl) ** beta,
        )
        total += a_side * (near + far - sign * dl * dphi * lin_tail)
        err += a_side * (near.error + far.error)
    return QuadValue(total, err)


def tilde_K_eta(point: SmoothedEvalPoint, spec: QuadratureSpec = QuadratureSpec()) -> QuadValue:
    """Squared smoothing defect on the inner region |delta_small * z| <= |delta|."""
    _require_tilde(point)
    p = point.params
    d, dl, eta, beta = point.delta, point.delta_small, point.eta, point.beta
    if dl == 0.0:
        return QuadValue(0.0, 0.0)

    def f_pos(z):
        b = psi_bracket(d, dl * z, eta, beta)
        return b * b

    def f_neg(z):
        b = psi_bracket(d, -dl * z, eta, beta)
        return b * b

    zmax = abs(d / dl)
    psi_slope = phi_prime(d, eta, beta) - beta * math.copysign(abs(d) ** (beta - 1.0), d)
    zl = (dl * psi_slope) ** 2
    return _two_sided(
        f_pos, f_neg, p, spec,
        splits=(0.5 * zmax,), splits_neg=(0.5 * zmax,),
        upper=zmax, zero_order=2.0, zero_limits=(zl, zl),
    )


def tilde_L_eta(point: SmoothedEvalPoint, spec: QuadratureSpec = QuadratureSpec()) -> QuadValue:
    """Absolute smoothing defect on the outer region |delta_small * z| > |delta|."""
    _require_tilde(point)
    p = point.params
    d, dl, eta, beta = point.delta, point.delta_small, point.eta, point.beta
    if dl == 0.0:
        return QuadValue(0.0, 0.0)

    def f_pos(z):
        return abs(psi_bracket(d, dl * z, eta, beta))

    def f_neg(z):
        return abs(psi_bracket(d, -dl * z, eta, beta))

    z0 = abs(d / dl)
    psi_d = (eta * eta + d * d) ** (beta / 2.0) - abs(d) ** beta
    return _two_sided(
        f_pos, f_neg, p, spec,
        splits=(2.0 * z0, 8.0 * z0, 32.0 * z0), splits_neg=(2.0 * z0, 8.0 * z0, 32.0 * z0),
        lower=z0, tail_order=0.0, tail_limits=(psi_d, psi_d),
    )


# ---------------------------------------------------------------------------
# eta -> 0 extrapolation
# ---------------------------------------------------------------------------

def default_eta_sweep(levels: int = 13) -> list[float]:
    """Geometric eta sequence 0.1 * 2^(-k), k = 0..levels-1."""
    return [0.1 * 2.0 ** (-k) for k in range(levels)]


@dataclass(frozen=True)
class EtaLimit:
    value: float
    error: float
    monotone_tail: bool


def eta_limit_extrapolate(values) -> EtaLimit:
    """Extrapolate a sequence of (eta, value) pairs, eta strictly decreasing, to eta -> 0.

    Uses Aitken acceleration on the final triple (exact for value = L + c*eta^p
    sampled on a geometric eta grid).  Raises DivergentSequence when the tail
    differences stop shrinking.
    """
    pairs = list(values)
    if len(pairs) < 3:
        raise InsufficientPoints(f"need at least 3 points, got {len(pairs)}")
    etas = [float(e) for e, _ in pairs]
    vals = [float(v) for _, v in pairs]
    if any(e2 >= e1 for e1, e2 in zip(etas, etas[1:])):
        raise InsufficientPoints("eta values must be strictly decreasing")

    scale = max(abs(v) for v in vals) or 1.0
    diffs = [v2 - v1 for v1, v2 in zip(vals, vals[1:])]
    if all(abs(dv) <= 1e-15 * scale for dv in diffs):
        return EtaLimit(vals[-1], 0.0, True)

    tail = diffs[-3:]
    mags = [abs(dv) for dv in tail]
    growing = all(m2 >= m1 for m1, m2 in zip(mags, mags[1:])) and mags[-1] > 1e-12 * scale
    if growing:
        raise DivergentSequence(f"tail differences not shrinking: {tail}")

    d1, d2 = diffs[-2], diffs[-1]
    denom = d2 - d1
    if denom == 0.0:
        limit = vals[-1]
    else:
        limit = vals[-1] - d2 * d2 / denom

    if len(vals) >= 4:
        d1p, d2p = diffs[-3], diffs[-2]
        denp = d2p - d1p
        prev = vals[-2] - d2p * d2p / denp if denp != 0.0 else vals[-2]
        err = abs(limit - prev)
    else:
        err = abs(limit - vals[-1])

    signs = {math.copysign(1.0, dv) for dv in tail if dv != 0.0}
    return EtaLimit(limit, err, len(signs) <= 1)
