"""Monte Carlo harnesses for the coupling equalities, growth bounds and moment studies.

Statistical protocol: every assertion is "within 3 standard errors plus an
explicitly estimated bias budget".  The budget comes from re-running a
subsample with halved (euler_step, epsilon), where the refined stream is the
superposition of the original events and an independent small-jump band; the
common events make the fine/coarse difference a low-variance estimate of the
discretization bias rather than a noisy re-draw.

Paths reduce into a preallocated array indexed by path number, so estimates
are bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .engine import (
    CoefficientSet,
    SolveConfig,
    default_u_bound,
    make_coefficients,
    solve_coupled_pair,
)
from .errors import (
    DomainError,
    DominationExceeded,
    InsufficientPaths,
    RegimeMismatch,
    ScenarioAssumptionViolation,
)
from .exponents import Monotone, beta_finite, beta_infinite
from .measure import Regime, StableParams, validate_params
from .noise import (
    generate_band_stream,
    generate_event_stream,
    generate_u_extension_stream,
    merge_streams,
    substream_seed,
)

MIN_PATHS = 100
REFINE_FRACTION = 0.1
MIN_REFINE_PATHS = 20


def max_workers() -> int:
    raw = os.environ.get("STABLE_SDE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_paths: int
    bias_budget: float = 0.0


@dataclass
class CouplingReport:
    scenario: str
    beta_used: float
    initial_gap: float
    checkpoint_times: tuple
    estimates: list
    targets: list | None = None
    verdicts: list | None = None

    def passed(self) -> bool:
        return self.verdicts is not None and all(v == "PASS" for v in self.verdicts)


def mean_and_se(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n == 0:
        return math.nan, math.nan
    if np.all(values == values[0]):
        return float(values[0]), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n))


# ---------------------------------------------------------------------------
# coupled batch driver
# ---------------------------------------------------------------------------

def _fv_coupled_deltas(coeffs, x0, x0t, params, config, stream):
    """Coupled thinning solve with superposition-consistent u-band regrowth."""
    policy = config.u_bound_policy
    for attempt in range(policy.max_regen + 1):
        try:
            res = solve_coupled_pair(
                coeffs, x0, x0t, stream, config, Regime.FINITE_VARIATION, record=False
            )
            return res.delta_at_checkpoints, res.window_sup_delta
        except DominationExceeded:
            if attempt == policy.max_regen:
                raise
            ext = generate_u_extension_stream(
                stream, stream.u_bound * policy.growth,
                seed=stream.seed + (7000 + attempt,),
            )
            stream = merge_streams(stream, ext)


def _one_coupled_path(coeffs, x0, x0t, params, config, u_bound, refine):
    """|delta|^beta rows for one path: coarse, and optionally refined at (eps/2, h/2)."""
    seed = config.seed
    if params.regime() is Regime.INFINITE_VARIATION:
        stream = generate_event_stream(
            params, config.epsilon, config.horizon, seed=seed, event_cap=config.event_cap
        )
        res = solve_coupled_pair(
            coeffs, x0, x0t, stream, config, Regime.INFINITE_VARIATION, record=False
        )
        deltas, sups = res.delta_at_checkpoints, res.window_sup_delta
    else:
        stream = generate_event_stream(
            params, config.epsilon, config.horizon, u_bound=u_bound,
            seed=seed, event_cap=config.event_cap,
        )
        deltas, sups = _fv_coupled_deltas(coeffs, x0, x0t, params, config, stream)
    if not refine:
        return deltas, sups, None
    band = generate_band_stream(
        params, config.epsilon / 2.0, config.epsilon, config.horizon,
        u_bound=stream.u_bound, seed=substream_seed(seed, 1),
    )
    fine_stream = merge_streams(stream, band)
    fine_cfg = replace(
        config, epsilon=config.epsilon / 2.0, euler_step=config.euler_step / 2.0,
        wiener_step=config.wiener_step or config.euler_step,
    )
    if params.regime() is Regime.INFINITE_VARIATION:
        res = solve_coupled_pair(
            coeffs, x0, x0t, fine_stream, fine_cfg, Regime.INFINITE_VARIATION, record=False
        )
        fine = res.delta_at_checkpoints
    else:
        fine, _ = _fv_coupled_deltas(coeffs, x0, x0t, params, fine_cfg, fine_stream)
    return deltas, sups, fine


def run_coupled_batch(
    coeffs: CoefficientSet,
    x0: float,
    x0_tilde: float,
    params: StableParams,
    beta: float,
    config: SolveConfig,
    n_paths: int,
    refine_fraction: float = REFINE_FRACTION,
    collect_window_sups: bool = False,
):
    """Per-path |delta_t|^beta at the checkpoints plus bias budgets.

    Returns (values (n_paths, n_cps), budgets (n_cps,), window_sups or None).
    """
    cps = config.checkpoint_times
    n_cps = len(cps)
    values = np.empty((n_paths, n_cps))
    sups = np.empty((n_paths, n_cps)) if collect_window_sups else None
    n_ref = max(int(math.ceil(n_paths * refine_fraction)), MIN_REFINE_PATHS) if refine_fraction > 0 else 0
    n_ref = min(n_ref, n_paths)
    coarse_ref = np.empty((n_ref, n_cps))
    fine_ref = np.empty((n_ref, n_cps))
    u_bound = None
    if params.regime() is Regime.FINITE_VARIATION:
        pol = config.u_bound_policy
        u_bound = pol.initial if pol.initial is not None else default_u_bound(coeffs, x0, x0_tilde)
    root = config.seed

    def work(i: int) -> None:
        cfg_i = replace(config, seed=substream_seed(root, i))
        refine = i < n_ref
        deltas, wsups, fine = _one_coupled_path(coeffs, x0, x0_tilde, params, cfg_i, u_bound, refine)
        row = np.abs(deltas) ** beta
        values[i] = row
        if sups is not None:
            sups[i] = wsups
        if refine:
            coarse_ref[i] = row
            fine_ref[i] = np.abs(fine) ** beta

    _parallel_map(work, n_paths)
    if n_ref:
        budgets = np.abs(fine_ref.mean(axis=0) - coarse_ref.mean(axis=0))
    else:
        budgets = np.zeros(n_cps)
    return values, budgets, sups


def _parallel_map(fn, n: int) -> None:
    workers = min(max_workers(), max(n, 1))
    if workers <= 1 or n <= 1:
        for i in range(n):
            fn(i)
        return
    chunk = max(n // (workers * 8), 1)
    ranges = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]

    def run_range(bounds):
        for i in range(bounds[0], bounds[1]):
            fn(i)

    with ThreadPoolExecutor(max_workers=workers) as ex:
        list(ex.map(run_range, ranges))


def estimate_coupling_moment(
    coeffs: CoefficientSet,
    x0: float,
    x0_tilde: float,
    params: StableParams,
    beta: float,
    config: SolveConfig,
    n_paths: int,
    scenario: str = "custom",
) -> CouplingReport:
    """Mean and SE of |X_t - X~_t|^beta at each checkpoint over independent coupled solves."""
    if n_paths < MIN_PATHS:
        raise InsufficientPaths(f"need at least {MIN_PATHS} paths, got {n_paths}")
    if not (0.0 < beta < params.alpha):
        raise DomainError(f"beta must lie in (0, alpha={params.alpha}), got {beta}")
    values, budgets, _ = run_coupled_batch(coeffs, x0, x0_tilde, params, beta, config, n_paths)
    estimates = []
    for k in range(len(config.checkpoint_times)):
        m, se = mean_and_se(values[:, k])
        estimates.append(McEstimate(m, se, n_paths, float(budgets[k])))
    return CouplingReport(
        scenario, beta, abs(x0 - x0_tilde), config.checkpoint_times, estimates
    )


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

@dataclass
class Scenario:
    name: str
    params: StableParams
    coeffs: CoefficientSet
    x0: float
    x0_tilde: float
    config: SolveConfig
    beta: float | None = None      # None resolves to the critical exponent
    gate: str = "equality"         # equality | bound | contraction | moment
    gaps: tuple = (1.0, 0.1, 0.01)
    window_starts: tuple = ()
    contraction_threshold: float = 0.05
    horizons: tuple = (1.0, 2.0, 4.0)

    def resolved_beta(self) -> float:
        if self.beta is not None:
            return self.beta
        c = self.params.ratio_c()
        if self.params.alpha > 1.0:
            return beta_infinite(self.params.alpha, c).value
        return beta_finite(self.params.alpha, c).value


def _scenario_E1() -> Scenario:
    params = validate_params(1.5, 1.0, 1.0)
    coeffs = make_coefficients(
        1.5, sigma="1+min(abs(x)^(2/3),5)", b="0",
        declared_growth=8.0, sigma_monotone=None, b_constant=True,
        declared_holder=(2.0 / 3.0, 1.0),
    )
    cfg = SolveConfig(
        horizon=1.0, epsilon=1e-3, euler_step=1e-3, seed=20240801,
        checkpoint_times=(0.25, 0.5, 1.0), small_jump_refinement=True,
    )
    return Scenario("E1", params, coeffs, 0.0, 1.0, cfg, gate="equality")


def _scenario_E2() -> Scenario:
    params = validate_params(0.75, 0.0, 1.0)
    coeffs = make_coefficients(
        0.75, gamma="1.5-0.5*clamp(sign(x)*abs(x)^0.25,-1,1)", b="0",
        declared_growth=16.0, gamma_monotone=Monotone.NON_INCREASING, b_constant=True,
        declared_holder=(0.25, 0.5),
    )
    # the raw band representation has truncation bias ~ eps^(1-alpha); the
    # small-jump mean-drift refinement knocks it down to ~ eps^(2-alpha)
    cfg = SolveConfig(
        horizon=1.0, epsilon=1e-4, euler_step=1e-3, seed=20240802,
        checkpoint_times=(0.25, 0.5, 1.0), small_jump_refinement=True,
    )
    return Scenario("E2", params, coeffs, 0.0, 1.0, cfg, gate="equality")


def _scenario_lipschitz() -> Scenario:
    params = validate_params(1.5, 1.0, 1.0)
    coeffs = make_coefficients(
        1.5, sigma="1+0.1*min(abs(x),10)", b="-x",
        declared_growth=3.0, b_constant=False, declared_holder=(1.0, 0.1),
    )
    cfg = SolveConfig(
        horizon=1.0, epsilon=1e-3, euler_step=1e-3, seed=20240803,
        checkpoint_times=(0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0),
    )
    return Scenario("lipschitz", params, coeffs, 0.0, 1.0, cfg, gate="bound")


def _scenario_holder() -> Scenario:
    base = _scenario_E1()
    cfg = replace(
        base.config, seed=20240804,
        checkpoint_times=(0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0),
    )
    return Scenario("holder", base.params, base.coeffs, 0.0, 1.0, cfg, gate="bound")


def _scenario_contraction() -> Scenario:
    params = validate_params(1.5, 1.0, 1.0)
    coeffs = make_coefficients(
        1.5, sigma="1+min(abs(x)^(2/3),1)", b="-x",
        declared_growth=3.0, b_constant=False, declared_holder=(2.0 / 3.0, 1.0),
    )
    cfg = SolveConfig(
        horizon=50.0, epsilon=1e-2, euler_step=1e-2, seed=20240805,
        checkpoint_times=(0.0, 10.0, 20.0, 30.0, 40.0, 50.0),
    )
    return Scenario(
        "contraction", params, coeffs, 0.0, 1.0, cfg, gate="contraction",
        window_starts=(0.0, 10.0, 20.0, 30.0, 40.0, 50.0), contraction_threshold=0.05,
    )


def _scenario_additive() -> Scenario:
    params = validate_params(1.5, 1.0, 1.0)
    coeffs = make_coefficients(1.5, sigma="1", b="0", declared_growth=2.0, b_constant=True)
    cfg = SolveConfig(
        horizon=4.0, epsilon=3e-3, euler_step=1e-2, seed=20240806,
        checkpoint_times=(1.0, 2.0, 4.0),
    )
    return Scenario(
        "additive", params, coeffs, 0.0, 1.0, cfg, gate="moment",
        beta=0.5, horizons=(1.0, 2.0, 4.0),
    )


_SCENARIOS = {
    "E1": _scenario_E1,
    "E2": _scenario_E2,
    "lipschitz": _scenario_lipschitz,
    "holder": _scenario_holder,
    "contraction": _scenario_contraction,
    "additive": _scenario_additive,
}


def scenario_names() -> list[str]:
    return sorted(_SCENARIOS)


def get_scenario(name: str) -> Scenario:
    try:
        return _SCENARIOS[name]()
    except KeyError:
        raise KeyError(f"unknown scenario '{name}'; known: {', '.join(scenario_names())}") from None


# ---------------------------------------------------------------------------
# the named verifications
# ---------------------------------------------------------------------------

def _check_equality_hypotheses(sc: Scenario) -> None:
    c = sc.coeffs
    p = sc.params
    if not c.b_constant:
        raise ScenarioAssumptionViolation("equality case needs a constant drift")
    if p.alpha > 1.0:
        if p.a_plus > p.a_minus and c.sigma_monotone is not Monotone.NON_DECREASING:
            raise ScenarioAssumptionViolation(
                "equality with a_minus < a_plus needs non-decreasing sigma"
            )
        if p.a_plus < p.a_minus and c.sigma_monotone is not Monotone.NON_INCREASING:
            raise ScenarioAssumptionViolation(
                "equality with a_minus > a_plus needs non-increasing sigma"
            )
    else:
        if c.gamma_monotone is not Monotone.NON_INCREASING:
            raise ScenarioAssumptionViolation("equality below alpha=1 needs non-increasing gamma")
        # beta_finite raises DomainError when the intensity ratio leaves the wedge
        beta_finite(p.alpha, p.ratio_c())


def verify_equality_case(
    scenario, n_paths: int = 20_000, config: SolveConfig | None = None,
) -> tuple[bool, CouplingReport]:
    """Gate: | mean |delta_t|^beta - gap^beta | <= 3*SE + bias budget at every checkpoint."""
    sc = get_scenario(scenario) if isinstance(scenario, str) else scenario
    _check_equality_hypotheses(sc)
    cfg = config if config is not None else sc.config
    beta = sc.resolved_beta()
    report = estimate_coupling_moment(
        sc.coeffs, sc.x0, sc.x0_tilde, sc.params, beta, cfg, n_paths, scenario=sc.name
    )
    target = abs(sc.x0 - sc.x0_tilde) ** beta
    report.targets = [target] * len(report.estimates)
    report.verdicts = [
        "PASS" if abs(est.mean - target) <= 3.0 * est.std_error + est.bias_budget else "FAIL"
        for est in report.estimates
    ]
    return report.passed(), report


@dataclass
class GronwallReport:
    scenario: str
    beta: float
    gaps: tuple
    reports: list            # CouplingReport per gap
    ratio_min: float
    ratio_max: float
    fitted_C: float
    envelope_ok: bool
    monotone_in_gap: bool

    def passed(self) -> bool:
        return (
            math.isfinite(self.fitted_C)
            and self.ratio_max / self.ratio_min < 10.0
            and self.envelope_ok
            and self.monotone_in_gap
        )


def verify_gronwall_bound(
    coeffs: CoefficientSet,
    gaps,
    params: StableParams,
    beta: float,
    config: SolveConfig,
    n_paths: int,
    scenario: str = "bound",
) -> GronwallReport:
    """Bounded gap-normalized moments, exponential envelope fit, continuity in the start."""
    gaps = tuple(float(g) for g in gaps)
    reports = []
    for k, g in enumerate(gaps):
        cfg = replace(config, seed=substream_seed(config.seed, 100 + k))
        if g == 0.0:
            zero = McEstimate(0.0, 0.0, n_paths, 0.0)
            reports.append(CouplingReport(
                scenario, beta, 0.0, cfg.checkpoint_times,
                [zero] * len(cfg.checkpoint_times),
            ))
            continue
        reports.append(estimate_coupling_moment(
            coeffs, 0.0, g, params, beta, cfg, n_paths, scenario=scenario
        ))

    cps = config.checkpoint_times
    ratios = []
    for g, rep in zip(gaps, reports):
        if g == 0.0:
            continue
        ratios.append([est.mean / g ** beta for est in rep.estimates])
    ratios = np.array(ratios)
    ratio_min = float(ratios.min())
    ratio_max = float(ratios.max())

    # fit the exponential envelope on the first half of the checkpoints,
    # validate on the second half
    half = max(len(cps) // 2, 1)
    ts = np.array(cps[:half])
    logr = np.log(np.maximum(ratios[:, :half], 1e-300))
    slope = float(np.polyfit(np.tile(ts, len(ratios)), logr.ravel(), 1)[0]) if len(ts) > 1 else 0.0
    fitted_C = max(slope, 0.0)
    envelope_ok = True
    for g, rep in zip(gaps, reports):
        if g == 0.0:
            envelope_ok &= all(est.mean == 0.0 for est in rep.estimates)
            continue
        for t, est in zip(cps, rep.estimates):
            if t < cps[half - 1]:
                continue
            bound = g ** beta * math.exp(fitted_C * t)
            if est.mean > bound + 3.0 * est.std_error + est.bias_budget:
                envelope_ok = False

    # continuity in the initial gap at the final checkpoint
    finals = [(g, rep.estimates[-1]) for g, rep in zip(gaps, reports) if g > 0.0]
    finals.sort(key=lambda it: -it[0])
    monotone = all(
        b.mean <= a.mean + 3.0 * (a.std_error + b.std_error)
        for (_, a), (_, b) in zip(finals, finals[1:])
    )
    return GronwallReport(
        scenario, beta, gaps, reports, ratio_min, ratio_max, fitted_C, envelope_ok, monotone
    )


@dataclass
class MomentReport:
    scenario: str
    beta: float
    horizons: tuple
    estimates: list          # McEstimate per horizon, for E[sup |X|^beta]
    geometric_ok: bool

    def passed(self) -> bool:
        return self.geometric_ok and all(
            math.isfinite(e.mean) and math.isfinite(e.std_error) for e in self.estimates
        )


def moment_boundedness_study(
    coeffs: CoefficientSet,
    x0: float,
    params: StableParams,
    beta: float,
    horizons,
    n_paths: int,
    config: SolveConfig,
    scenario: str = "moment",
) -> MomentReport:
    """Estimates of E[sup_{[0,T]} |X_t|^beta] with a running-sup estimator."""
    if not (0.0 < beta < params.alpha):
        raise DomainError(f"beta must lie in (0, alpha={params.alpha}), got {beta}")
    horizons = tuple(float(t) for t in horizons)
    cfg = replace(config, horizon=horizons[-1], checkpoint_times=horizons)
    sups = np.empty((n_paths, len(horizons)))
    root = cfg.seed
    from .noise import generate_event_stream as _gen

    iv = params.regime() is Regime.INFINITE_VARIATION
    u_bound = None
    if not iv:
        pol = cfg.u_bound_policy
        u_bound = pol.initial if pol.initial is not None else default_u_bound(coeffs, x0)

    def work(i: int) -> None:
        cfg_i = replace(cfg, seed=substream_seed(root, i))
        stream = _gen(
            params, cfg_i.epsilon, cfg_i.horizon, u_bound=u_bound,
            seed=cfg_i.seed, event_cap=cfg_i.event_cap,
        )
        seg = _segment_sups(coeffs, x0, stream, cfg_i, iv)
        sups[i] = np.maximum.accumulate(seg)

    _parallel_map(work, n_paths)
    estimates = []
    for k in range(len(horizons)):
        m, se = mean_and_se(sups[:, k] ** beta)
        estimates.append(McEstimate(m, se, n_paths))
    means = [e.mean for e in estimates]
    geometric_ok = all(
        m2 <= max(10.0 * m1, m1 + 10.0 * se)
        for (m1, m2, se) in zip(means, means[1:], [e.std_error for e in estimates[1:]])
    )
    return MomentReport(scenario, beta, horizons, estimates, geometric_ok)


def _segment_sups(coeffs, x0, stream, config, iv: bool) -> np.ndarray:
    from . import _kernels
    from .errors import Blowup
    from .measure import truncation_drift

    cps = np.asarray(config.checkpoint_times)
    cp_values = np.empty(len(cps))
    seg_sup = np.zeros(len(cps))
    empty_f = np.empty(0)
    empty_u = np.empty(0, dtype=np.uint8)
    if iv:
        from .engine import _gaussian_refinement

        mu = truncation_drift(stream.params, stream.epsilon)
        sig_eps, w_step, normals = _gaussian_refinement(stream.params, stream, config)
        drift_free = coeffs.drift_is_zero and mu == 0.0
        status, nn, t, x = _kernels.path_iv_kernel(
            stream.times, stream.sizes, float(x0), mu, config.euler_step, config.horizon,
            cps, coeffs.sigma, coeffs.b, config.blowup_guard, drift_free,
            sig_eps, w_step, normals,
            cp_values, seg_sup, False, empty_f, empty_f, empty_u, empty_f,
        )
    else:
        from .measure import small_jump_mean

        accept = np.zeros(stream.n_events, dtype=np.uint8)
        m_small = small_jump_mean(stream.params, stream.epsilon) \
            if config.small_jump_refinement else 0.0
        status, nn, t, hw, x = _kernels.path_fv_kernel(
            stream.times, stream.sizes, stream.us, float(x0), config.euler_step,
            config.horizon, cps, coeffs.gamma, coeffs.b, float(stream.u_bound),
            config.blowup_guard, coeffs.drift_is_zero and m_small == 0.0, m_small,
            cp_values, seg_sup, accept, False, empty_f, empty_f, empty_u, empty_f,
        )
        if status == _kernels.STATUS_DOMINATION:
            raise DominationExceeded(f"|gamma| reached {hw} above bound", hw)
    if status == _kernels.STATUS_BLOWUP:
        raise Blowup(f"state exceeded guard at t={t}", t, x)
    return seg_sup


@dataclass
class ContractionConfig:
    coeffs: CoefficientSet
    horizon: float
    window_starts: tuple
    rho: object | None = None    # optional strictly increasing modulus, diagnostic only


@dataclass
class ContractionReport:
    scenario: str
    window_starts: tuple
    median_tail_sup: list
    threshold: float
    initial_gap: float
    per_path_monotone: bool
    rho_violations: int = 0

    def passed(self) -> bool:
        return self.per_path_monotone and self.median_tail_sup[-1] < self.threshold * self.initial_gap


def contraction_study(
    cfg: ContractionConfig,
    params: StableParams,
    x0: float,
    x0_tilde: float,
    n_paths: int,
    solve_config: SolveConfig,
    threshold: float = 0.05,
    scenario: str = "contraction",
) -> ContractionReport:
    """Tail suprema sup_{[s, T]} |delta| over increasing window starts s."""
    if params.alpha <= 1.0:
        raise RegimeMismatch("contraction study applies to alpha in (1,2)")
    if params.a_minus != params.a_plus or params.a_minus <= 0.0:
        raise RegimeMismatch("contraction study needs a_minus = a_plus > 0")
    starts = tuple(float(s) for s in cfg.window_starts)
    cps = tuple(sorted(set(starts) | {cfg.horizon}))
    run_cfg = replace(solve_config, horizon=cfg.horizon, checkpoint_times=cps)
    values, _, sups = run_coupled_batch(
        cfg.coeffs, x0, x0_tilde, params, 1.0, run_cfg, n_paths,
        refine_fraction=0.0, collect_window_sups=True,
    )
    # per-path tail sup over [s_j, T]: |delta(s_j)| joined with later segment sups
    n_cp = len(cps)
    tail = np.empty((n_paths, n_cp))
    suffix = np.empty_like(sups)
    suffix[:, -1] = sups[:, -1]
    for k in range(n_cp - 2, -1, -1):
        suffix[:, k] = np.maximum(sups[:, k], suffix[:, k + 1])
    for j in range(n_cp):
        later = suffix[:, j + 1] if j + 1 < n_cp else 0.0
        tail[:, j] = np.maximum(np.abs(values[:, j]), later)
    keep = [cps.index(s) for s in starts]
    tail = tail[:, keep]
    monotone = bool(np.all(np.diff(tail, axis=1) <= 1e-15))
    medians = [float(np.median(tail[:, j])) for j in range(len(starts))]
    violations = 0
    if cfg.rho is not None:
        rng = np.random.Generator(np.random.Philox(12345))
        xs = rng.uniform(-5, 5, 512)
        ys = rng.uniform(-5, 5, 512)
        for x, y in zip(xs, ys):
            if x == y:
                continue
            lhs = abs(x - y) ** (params.alpha - 2.0) * (
                abs(cfg.coeffs.b(x) - cfg.coeffs.b(y))
                + abs(cfg.coeffs.sigma(x) - cfg.coeffs.sigma(y)) ** params.alpha
            )
            if lhs < cfg.rho(abs(x - y)):
                violations += 1
    return ContractionReport(
        scenario, starts, medians, threshold, abs(x0 - x0_tilde), monotone, violations
    )


def sign_flip_fraction(
    coeffs: CoefficientSet,
    x0: float,
    x0_tilde: float,
    params: StableParams,
    config: SolveConfig,
    n_paths: int = 1000,
) -> float:
    """Fraction of coupled paths whose gap changes sign at some checkpoint.

    A shared-noise diagnostic only: reported, never asserted, since a single
    large jump can push the discrete gap through zero.
    """
    sign0 = math.copysign(1.0, x0 - x0_tilde)
    flips = 0
    root = config.seed
    for i in range(n_paths):
        cfg_i = replace(config, seed=substream_seed(root, i))
        if params.regime() is Regime.INFINITE_VARIATION:
            stream = generate_event_stream(
                params, cfg_i.epsilon, cfg_i.horizon, seed=cfg_i.seed,
                event_cap=cfg_i.event_cap,
            )
            res = solve_coupled_pair(
                coeffs, x0, x0_tilde, stream, cfg_i, Regime.INFINITE_VARIATION, record=False
            )
            deltas = res.delta_at_checkpoints
        else:
            pol = cfg_i.u_bound_policy
            ub = pol.initial if pol.initial is not None else default_u_bound(coeffs, x0, x0_tilde)
            stream = generate_event_stream(
                params, cfg_i.epsilon, cfg_i.horizon, u_bound=ub,
                seed=cfg_i.seed, event_cap=cfg_i.event_cap,
            )
            deltas, _ = _fv_coupled_deltas(coeffs, x0, x0_tilde, params, cfg_i, stream)
        if any(d != 0.0 and math.copysign(1.0, d) != sign0 for d in deltas):
            flips += 1
    return flips / n_paths


def equality_probe_outside_wedge(
    alpha: float,
    c: float,
    beta: float,
    n_paths: int = 2000,
    seed=20240807,
) -> CouplingReport:
    """Exploratory: the finite-variation equality experiment at a ratio beyond the
    admissible wedge.  Reported without any verdict; no conclusion is drawn."""
    params = validate_params(alpha, c, 1.0)
    coeffs = make_coefficients(
        alpha, gamma="1.5-0.5*clamp(sign(x)*abs(x)^0.25,-1,1)", b="0",
        gamma_monotone=Monotone.NON_INCREASING, b_constant=True,
    )
    cfg = SolveConfig(
        horizon=1.0, epsilon=1e-4, euler_step=1e-2, seed=seed,
        checkpoint_times=(0.5, 1.0),
    )
    return estimate_coupling_moment(
        coeffs, 0.0, 1.0, params, beta, cfg, n_paths, scenario=f"wedge-probe(c={c})"
    )


# ---------------------------------------------------------------------------
# report CSV
# ---------------------------------------------------------------------------

def write_report_csv(report: CouplingReport, fh) -> None:
    fh.write("scenario,t,beta,mean,std_error,n_paths,bias_budget,target,verdict\n")
    targets = report.targets or [""] * len(report.estimates)
    verdicts = report.verdicts or [""] * len(report.estimates)
    for t, est, target, verdict in zip(
        report.checkpoint_times, report.estimates, targets, verdicts
    ):
        tgt = repr(target) if target != "" else ""
        fh.write(
            f"{report.scenario},{t!r},{report.beta_used!r},{est.mean!r},"
            f"{est.std_error!r},{est.n_paths},{est.bias_budget!r},{tgt},{verdict}\n"
        )
