"""Path solvers for the two SDE representations.

Jump-adapted Euler for the compensated equation (alpha in (1,2)) and
state-dependent thinning for the band representation (alpha in (0,1)), plus
coupled-pair variants where both solutions consume one shared event stream.
Events land exactly on the time grid, so jump handling is exact and only the
drift integration carries discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    Blowup,
    DominationExceeded,
    RegimeMismatch,
    StableSdeError,
)
from .exponents import Monotone
from .exprlang import Expr, compile_fn, derive_signed_power, parse
from .measure import (
    Regime,
    StableParams,
    small_jump_mean,
    small_jump_variance,
    truncation_drift,
)
from .noise import (
    EventStream,
    PathSkeleton,
    generate_event_stream,
    generate_u_extension_stream,
    merge_streams,
    substream_seed,
)


class GrowthBoundViolation(StableSdeError, ValueError):
    pass


@dataclass
class CoefficientSet:
    """Diffusion sigma, drift b and the derived thinning band gamma.

    ``gamma`` is sign(sigma)|sigma|^alpha unless supplied directly, in which
    case sigma is recovered as sign(gamma)|gamma|^(1/alpha).  Monotonicity and
    Hoelder declarations are caller metadata consumed by the experiment gates.
    """

    sigma: object
    b: object
    gamma: object
    alpha: float
    sigma_expr: Expr | None = None
    b_expr: Expr | None = None
    gamma_expr: Expr | None = None
    declared_growth: float | None = None
    sigma_monotone: Monotone | None = None
    gamma_monotone: Monotone | None = None
    b_constant: bool = False
    declared_holder: tuple[float, float] | None = None

    @property
    def drift_is_zero(self) -> bool:
        from .exprlang import Num

        return isinstance(self.b_expr, Num) and self.b_expr.value == 0.0


def make_coefficients(
    alpha: float,
    sigma: str | Expr | None = None,
    b: str | Expr = "0",
    gamma: str | Expr | None = None,
    declared_growth: float | None = None,
    sigma_monotone: Monotone | None = None,
    gamma_monotone: Monotone | None = None,
    b_constant: bool | None = None,
    declared_holder: tuple[float, float] | None = None,
) -> CoefficientSet:
    if sigma is None and gamma is None:
        raise ValueError("need sigma or gamma")
    sigma_expr = parse(sigma) if isinstance(sigma, str) else sigma
    b_expr = parse(b) if isinstance(b, str) else b
    gamma_expr = parse(gamma) if isinstance(gamma, str) else gamma
    if gamma_expr is not None:
        gamma_fn = compile_fn(gamma_expr)
        sigma_fn = (
            compile_fn(sigma_expr) if sigma_expr is not None
            else derive_signed_power(gamma_expr, 1.0 / alpha)
        )
    else:
        sigma_fn = compile_fn(sigma_expr)
        gamma_fn = derive_signed_power(sigma_expr, alpha)
    if b_constant is None:
        from .exprlang import Num

        b_constant = isinstance(b_expr, Num)
    return CoefficientSet(
        sigma=sigma_fn,
        b=compile_fn(b_expr),
        gamma=gamma_fn,
        alpha=alpha,
        sigma_expr=sigma_expr,
        b_expr=b_expr,
        gamma_expr=gamma_expr,
        declared_growth=declared_growth,
        sigma_monotone=sigma_monotone,
        gamma_monotone=gamma_monotone,
        b_constant=b_constant,
        declared_holder=declared_holder,
    )


@dataclass(frozen=True)
class UBoundPolicy:
    """Initial thinning bound (None derives 2*sup|gamma| near the start) and regrowth factor."""

    initial: float | None = None
    growth: float = 4.0
    max_regen: int = 8


@dataclass(frozen=True)
class SolveConfig:
    horizon: float
    epsilon: float
    euler_step: float = 1e-3
    seed: tuple | int = 0
    checkpoint_times: tuple = ()
    u_bound_policy: UBoundPolicy = UBoundPolicy()
    blowup_guard: float = 1e12
    event_cap: int = 100_000_000
    # replace the discarded small jumps by their matching Gaussian term
    # (alpha > 1) or mean drift (alpha < 1); off by default so pure-jump
    # pathwise identities stay exact
    small_jump_refinement: bool = False
    # Wiener grid width for the Gaussian term; defaults to euler_step and is
    # deliberately NOT halved in bias-refinement reruns so the fine and
    # coarse runs share one Brownian realization
    wiener_step: float | None = None

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")
        if self.euler_step <= 0.0:
            raise ValueError("euler_step must be positive")
        cps = tuple(float(t) for t in self.checkpoint_times)
        if any(t < 0.0 or t > self.horizon for t in cps):
            raise ValueError("checkpoint times must lie in [0, horizon]")
        if list(cps) != sorted(cps):
            raise ValueError("checkpoint times must be sorted")
        object.__setattr__(self, "checkpoint_times", cps)


@dataclass(frozen=True)
class CoupledResult:
    path_x: PathSkeleton | None
    path_x_tilde: PathSkeleton | None
    delta_at_checkpoints: np.ndarray
    checkpoint_times: tuple
    window_sup_delta: np.ndarray  # per-segment sup of |delta| between checkpoints
    stream: EventStream


def default_u_bound(coeffs: CoefficientSet, x0: float, x0_tilde: float | None = None) -> float:
    """2 * sup|gamma| over [-R, R], R = 10*(1+|x0|), sampled on a dense grid."""
    r = 10.0 * (1.0 + max(abs(x0), abs(x0_tilde) if x0_tilde is not None else 0.0))
    xs = np.linspace(-r, r, 4097)
    g = max(abs(coeffs.gamma(float(x))) for x in xs)
    return max(2.0 * g, 1.0)


def _empty_nodes():
    return (
        np.empty(0), np.empty(0), np.empty(0, dtype=np.uint8), np.empty(0),
    )


def _node_budget(n_events: int, n_cps: int, horizon: float, h: float, n_cells: int = 0) -> int:
    return 2 * (n_events + n_cps) + int(horizon / h) + 2 * n_cells + 16


def _gaussian_refinement(params, stream, config):
    """(sig_eps, w_step, normals) for the small-jump Gaussian term; zeros when off.

    The pool is keyed off config.seed, not the stream, so a bias-refinement
    rerun (superposed stream, same config seed, same wiener_step) reuses the
    identical Brownian realization.
    """
    from .noise import _rng, seed_tuple

    if not config.small_jump_refinement:
        return 0.0, math.inf, np.empty(0)
    sig = math.sqrt(small_jump_variance(params, stream.epsilon))
    w = config.wiener_step if config.wiener_step is not None else config.euler_step
    n_cells = int(math.ceil(config.horizon / w)) + 1
    normals = _rng(seed_tuple(config.seed) + (17,)).standard_normal(n_cells)
    return sig, w, normals


def _skeleton(nn, node_t, node_x, node_jump, node_rate) -> PathSkeleton:
    return PathSkeleton(
        node_t[:nn].copy(),
        node_x[:nn].copy(),
        node_jump[:nn].astype(bool),
        node_rate[1:nn].copy(),
    )


def _check_growth(coeffs: CoefficientSet, values: np.ndarray) -> None:
    if coeffs.declared_growth is None:
        return
    # opportunistic runtime check at the visited states
    probe = values if len(values) <= 4096 else values[:: max(len(values) // 4096, 1)]
    for x in probe:
        lhs = abs(coeffs.sigma(float(x))) + abs(coeffs.b(float(x)))
        if lhs > coeffs.declared_growth * (1.0 + abs(float(x))) + 1e-9:
            raise GrowthBoundViolation(
                f"|sigma|+|b| = {lhs} exceeds declared linear growth at x={x}"
            )


def _require_iv(params: StableParams, stream: EventStream):
    if params.alpha <= 1.0:
        raise RegimeMismatch(f"alpha={params.alpha} is not in (1,2)")
    if stream.us is not None:
        raise RegimeMismatch("compensated solver expects a stream without u coordinates")


def _require_fv(params: StableParams, stream: EventStream):
    if params.alpha >= 1.0:
        raise RegimeMismatch(f"alpha={params.alpha} is not in (0,1)")
    if stream.us is None:
        raise RegimeMismatch("thinning solver needs a stream with u coordinates")


def solve_infinite_variation(
    coeffs: CoefficientSet,
    x0: float,
    stream: EventStream,
    config: SolveConfig,
    record: bool = True,
) -> PathSkeleton:
    """Jump-adapted Euler for the compensated equation; deterministic given (stream, config)."""
    params = stream.params
    _require_iv(params, stream)
    mu = truncation_drift(params, stream.epsilon)
    cps = np.asarray(config.checkpoint_times)
    cp_values = np.empty(len(cps))
    seg_sup = np.zeros(len(cps))
    sig_eps, w_step, normals = _gaussian_refinement(params, stream, config)
    drift_free = coeffs.drift_is_zero and mu == 0.0
    if record:
        budget = _node_budget(stream.n_events, len(cps), config.horizon, config.euler_step,
                              len(normals))
        node_t = np.empty(budget)
        node_x = np.empty(budget)
        node_jump = np.zeros(budget, dtype=np.uint8)
        node_rate = np.empty(budget)
    else:
        node_t, node_x, node_jump, node_rate = _empty_nodes()
    status, nn, t, x = _kernels.path_iv_kernel(
        stream.times, stream.sizes, float(x0), mu, config.euler_step, config.horizon,
        cps, coeffs.sigma, coeffs.b, config.blowup_guard, drift_free,
        sig_eps, w_step, normals,
        cp_values, seg_sup, record, node_t, node_x, node_jump, node_rate,
    )
    if status == _kernels.STATUS_BLOWUP:
        raise Blowup(f"state {x} exceeded guard {config.blowup_guard} at t={t}", t, x)
    if not record:
        return PathSkeleton(np.array([0.0, config.horizon]), np.array([x0, x]),
                            np.zeros(2, dtype=bool), np.zeros(1))
    skel = _skeleton(nn, node_t, node_x, node_jump, node_rate)
    _check_growth(coeffs, skel.values)
    return skel


def solve_finite_variation(
    coeffs: CoefficientSet,
    y0: float,
    stream: EventStream,
    config: SolveConfig,
    record: bool = True,
) -> PathSkeleton:
    """Thinning solver; aborts with DominationExceeded when |gamma| leaves the u range."""
    params = stream.params
    _require_fv(params, stream)
    cps = np.asarray(config.checkpoint_times)
    cp_values = np.empty(len(cps))
    seg_sup = np.zeros(len(cps))
    accept = np.zeros(stream.n_events, dtype=np.uint8)
    m_small = small_jump_mean(params, stream.epsilon) if config.small_jump_refinement else 0.0
    drift_free = coeffs.drift_is_zero and m_small == 0.0
    if record:
        budget = _node_budget(stream.n_events, len(cps), config.horizon, config.euler_step)
        node_t = np.empty(budget)
        node_x = np.empty(budget)
        node_jump = np.zeros(budget, dtype=np.uint8)
        node_rate = np.empty(budget)
    else:
        node_t, node_x, node_jump, node_rate = _empty_nodes()
    status, nn, t, hw, y = _kernels.path_fv_kernel(
        stream.times, stream.sizes, stream.us, float(y0), config.euler_step, config.horizon,
        cps, coeffs.gamma, coeffs.b, float(stream.u_bound), config.blowup_guard, drift_free,
        m_small,
        cp_values, seg_sup, accept, record, node_t, node_x, node_jump, node_rate,
    )
    if status == _kernels.STATUS_DOMINATION:
        raise DominationExceeded(
            f"|gamma| reached {hw} above u_bound {stream.u_bound} at t={t}", hw
        )
    if status == _kernels.STATUS_BLOWUP:
        raise Blowup(f"state {y} exceeded guard {config.blowup_guard} at t={t}", t, y)
    if not record:
        return PathSkeleton(np.array([0.0, config.horizon]), np.array([y0, y]),
                            np.zeros(2, dtype=bool), np.zeros(1))
    skel = _skeleton(nn, node_t, node_x, node_jump, node_rate)
    _check_growth(coeffs, skel.values)
    return skel


def solve_finite_variation_adaptive(
    coeffs: CoefficientSet,
    y0: float,
    params: StableParams,
    config: SolveConfig,
    record: bool = True,
    y0_tilde: float | None = None,
):
    """Generate the stream, solve, and regrow the u band on domination failures.

    Regrowth keeps the already-generated events and superposes an independent
    band of larger |u|, so the refined stream is the restriction-consistent
    extension of the old one.  Returns (skeleton(s), stream).
    """
    policy = config.u_bound_policy
    u_bound = policy.initial if policy.initial is not None else default_u_bound(coeffs, y0, y0_tilde)
    stream = generate_event_stream(
        params, config.epsilon, config.horizon, u_bound=u_bound,
        seed=config.seed, event_cap=config.event_cap,
    )
    coupled = y0_tilde is not None
    for attempt in range(policy.max_regen + 1):
        try:
            if coupled:
                return solve_coupled_pair(
                    coeffs, y0, y0_tilde, stream, config, Regime.FINITE_VARIATION, record=record
                ), stream
            return solve_finite_variation(coeffs, y0, stream, config, record=record), stream
        except DominationExceeded:
            if attempt == policy.max_regen:
                raise
            new_bound = stream.u_bound * policy.growth
            ext = generate_u_extension_stream(
                stream, new_bound, seed=substream_seed(config.seed, 7000 + attempt),
                event_cap=config.event_cap,
            )
            stream = merge_streams(stream, ext)


def solve_coupled_pair(
    coeffs: CoefficientSet,
    x0: float,
    x0_tilde: float,
    stream: EventStream,
    config: SolveConfig,
    regime: Regime,
    record: bool = True,
) -> CoupledResult:
    """Run both solutions on the identical stream and record the gap at checkpoints.

    In the thinning regime each event is tested independently against each
    path's gamma band; that per-event test is the coupling.
    """
    params = stream.params
    if regime is not params.regime():
        raise RegimeMismatch(f"requested {regime} but params have alpha={params.alpha}")
    cps = np.asarray(config.checkpoint_times)
    deltas = np.empty(len(cps))
    seg_sup = np.zeros(len(cps))
    if record:
        n_cells = int(config.horizon / (config.wiener_step or config.euler_step)) + 2 \
            if config.small_jump_refinement else 0
        budget = _node_budget(stream.n_events, len(cps), config.horizon, config.euler_step,
                              n_cells)
        node_t = np.empty(budget)
        node_x = np.empty(budget)
        node_xt = np.empty(budget)
        node_jump = np.zeros(budget, dtype=np.uint8)
        node_rate_x = np.empty(budget)
        node_rate_xt = np.empty(budget)
    else:
        node_t, node_x, node_jump, node_rate_x = _empty_nodes()
        node_xt = np.empty(0)
        node_rate_xt = np.empty(0)

    if regime is Regime.INFINITE_VARIATION:
        _require_iv(params, stream)
        mu = truncation_drift(params, stream.epsilon)
        sig_eps, w_step, normals = _gaussian_refinement(params, stream, config)
        drift_free = coeffs.drift_is_zero and mu == 0.0
        out = _kernels.couple_iv_kernel(
            stream.times, stream.sizes, float(x0), float(x0_tilde), mu,
            config.euler_step, config.horizon, cps,
            coeffs.sigma, coeffs.b, config.blowup_guard, drift_free,
            sig_eps, w_step, normals,
            deltas, seg_sup, record,
            node_t, node_x, node_xt, node_jump, node_rate_x, node_rate_xt,
        )
        status, nn, t = out[0], out[1], out[2]
        if status == _kernels.STATUS_BLOWUP:
            raise Blowup(f"coupled state exceeded guard at t={t}", t)
    else:
        _require_fv(params, stream)
        m_small = small_jump_mean(params, stream.epsilon) if config.small_jump_refinement else 0.0
        drift_free = coeffs.drift_is_zero and m_small == 0.0
        out = _kernels.couple_fv_kernel(
            stream.times, stream.sizes, stream.us, float(x0), float(x0_tilde),
            config.euler_step, config.horizon, cps,
            coeffs.gamma, coeffs.b, float(stream.u_bound), config.blowup_guard, drift_free,
            m_small,
            deltas, seg_sup, record,
            node_t, node_x, node_xt, node_jump, node_rate_x, node_rate_xt,
        )
        status, nn, t, hw = out[0], out[1], out[2], out[3]
        if status == _kernels.STATUS_DOMINATION:
            raise DominationExceeded(
                f"|gamma| reached {hw} above u_bound {stream.u_bound} at t={t}", hw
            )
        if status == _kernels.STATUS_BLOWUP:
            raise Blowup(f"coupled state exceeded guard at t={t}", t)

    if record:
        path_x = _skeleton(nn, node_t, node_x, node_jump, node_rate_x)
        path_xt = _skeleton(nn, node_t, node_xt, node_jump, node_rate_xt)
        _check_growth(coeffs, path_x.values)
        _check_growth(coeffs, path_xt.values)
    else:
        path_x = path_xt = None
    return CoupledResult(path_x, path_xt, deltas, tuple(cps.tolist()), seg_sup, stream)
