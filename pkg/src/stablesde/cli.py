"""Command-line surface.

Subcommands: exponent, integrals, simulate, couple, contract.
Exit codes: 0 pass, 2 usage or domain error, 3 statistical/identity failure,
4 runtime solver failure.  All outputs are reproducible byte-for-byte from
(config, seed); the worker count (STABLE_SDE_THREADS) never changes results.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .config import (
    RunConfig,
    build_coefficients,
    build_params,
    build_solve_config,
    parse_config,
    sim_value,
)
from .engine import solve_finite_variation_adaptive, solve_infinite_variation
from .errors import (
    Blowup,
    ConfigError,
    DominationExceeded,
    DomainError,
    InsufficientPaths,
    NonConvergence,
    RegimeMismatch,
    ScenarioAssumptionViolation,
    StableSdeError,
)
from .exponents import Monotone, beta_finite, beta_infinite, required_holder_index
from .experiments import (
    ContractionConfig,
    Scenario,
    contraction_study,
    get_scenario,
    verify_equality_case,
    verify_gronwall_bound,
    write_report_csv,
)
from .measure import Regime, validate_params
from .noise import generate_event_stream, substream_seed
from .quadrature import QuadratureSpec, integral_I_numeric, integral_I_tilde_numeric

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_STAT_FAIL = 3
EXIT_SOLVER_FAIL = 4

_USAGE_ERRORS = (
    ConfigError, DomainError, InsufficientPaths, RegimeMismatch,
    ScenarioAssumptionViolation, ValueError, KeyError, OSError,
)
_SOLVER_ERRORS = (Blowup, DominationExceeded)


def _monotone_arg(value: str):
    table = {
        "none": None,
        "non_decreasing": Monotone.NON_DECREASING,
        "non_increasing": Monotone.NON_INCREASING,
    }
    if value not in table:
        raise argparse.ArgumentTypeError(f"bad monotone class {value!r}")
    return table[value]


# ---------------------------------------------------------------------------
# exponent
# ---------------------------------------------------------------------------

def cmd_exponent(args) -> int:
    if args.c is not None:
        c = args.c
        params = validate_params(args.alpha, c, 1.0)
    else:
        if args.a_minus is None or args.a_plus is None:
            raise DomainError("give either --c or both --a-minus and --a-plus")
        params = validate_params(args.alpha, args.a_minus, args.a_plus)
        c = params.ratio_c()
    if args.alpha > 1.0:
        exp = beta_infinite(args.alpha, c)
    else:
        exp = beta_finite(args.alpha, c)
    lines = [
        f"alpha {args.alpha!r}",
        f"c {c!r}",
        f"regime {exp.regime.value}",
        f"beta {exp.value!r}",
    ]
    target = "sigma" if args.alpha > 1.0 else "gamma"
    for label, cls in (
        ("none", None),
        ("non_decreasing", Monotone.NON_DECREASING),
        ("non_increasing", Monotone.NON_INCREASING),
    ):
        idx = required_holder_index(params, cls)
        lines.append(f"holder_{target}_{label} {idx!r}")
    print("\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# integrals
# ---------------------------------------------------------------------------

def _integrals_grid(regime: str, n: int):
    rows = []
    if n <= 0:
        return rows
    if regime in ("finite", "both"):
        for alpha in np.linspace(0.55, 0.95, n).tolist():
            cs = np.linspace(0.0, -np.cos(np.pi * alpha) * 0.95, 5).tolist()
            for c in cs:
                rows.append((alpha, beta_finite(alpha, c).value, c, 1.0))
            rows.append((alpha, 0.6 * alpha, 1.0, 1.0))
            rows.append((alpha, 0.4 * alpha, 0.0, 1.0))
    if regime in ("infinite", "both"):
        for alpha in np.linspace(1.1, 1.9, n).tolist():
            for c in np.linspace(0.0, 1.0, 5).tolist():
                rows.append((alpha, beta_infinite(alpha, c).value, c, 1.0))
            rows.append((alpha, 1.0, 0.3, 1.0))
            rows.append((alpha, alpha / 2.0, 1.0, 0.0))
    return rows


def cmd_integrals(args) -> int:
    from .exponents import closed_form_I, closed_form_I_tilde

    rows = _integrals_grid(args.regime, args.n)
    if not rows:
        raise DomainError("empty integral grid")
    spec = QuadratureSpec()
    out_lines = ["alpha,beta,a_minus,a_plus,closed_form,quadrature,abs_diff"]
    worst = 0.0
    failed = False
    for alpha, beta, a_minus, a_plus in rows:
        if alpha < 1.0:
            closed = closed_form_I(alpha, beta, a_minus, a_plus)
            numeric = integral_I_numeric(alpha, beta, a_minus, a_plus, spec)
        else:
            closed = closed_form_I_tilde(alpha, beta, a_minus, a_plus)
            numeric = integral_I_tilde_numeric(alpha, beta, a_minus, a_plus, spec)
        diff = abs(closed - float(numeric))
        tol = max(args.tol * max(abs(closed), 1.0), numeric.error)
        if diff > tol:
            failed = True
        worst = max(worst, diff / max(abs(closed), 1.0))
        out_lines.append(
            f"{alpha!r},{beta!r},{a_minus!r},{a_plus!r},{closed!r},{float(numeric)!r},{diff!r}"
        )
    _emit(args, out_lines, ycols=("closed_form", "quadrature"))
    print(f"# rows={len(rows)} worst_rel_diff={worst:.3e}", file=sys.stderr)
    return EXIT_STAT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = parse_config(args.config)
    params = build_params(cfg)
    coeffs = build_coefficients(cfg, params.alpha)
    solve_cfg = build_solve_config(cfg)
    n_paths = sim_value(cfg, "n_paths", 1)
    x0 = sim_value(cfg, "x0", 0.0)
    os.makedirs(args.out_dir, exist_ok=True)
    root = solve_cfg.seed
    for i in range(n_paths):
        cfg_i = replace(solve_cfg, seed=substream_seed(root, i))
        if params.regime() is Regime.INFINITE_VARIATION:
            stream = generate_event_stream(
                params, cfg_i.epsilon, cfg_i.horizon, seed=cfg_i.seed,
                event_cap=cfg_i.event_cap,
            )
            skel = solve_infinite_variation(coeffs, x0, stream, cfg_i)
        else:
            skel, _stream = solve_finite_variation_adaptive(coeffs, x0, params, cfg_i)
        skel.to_csv(os.path.join(args.out_dir, f"path_{i:04d}.csv"))
    print(f"wrote {n_paths} path file(s) to {args.out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# couple
# ---------------------------------------------------------------------------

def _scenario_from_config(cfg: RunConfig) -> tuple[Scenario, int]:
    exp = cfg.section("experiment")
    name = exp.get("name", "custom")
    if name != "custom":
        sc = get_scenario(name)
        solve_cfg = build_solve_config(cfg, base=sc.config)
        sc.config = solve_cfg
        sc.x0 = sim_value(cfg, "x0", sc.x0)
        sc.x0_tilde = sim_value(cfg, "x0_tilde", sc.x0_tilde)
    else:
        params = build_params(cfg)
        coeffs = build_coefficients(cfg, params.alpha)
        solve_cfg = build_solve_config(cfg)
        sc = Scenario(
            "custom", params, coeffs,
            sim_value(cfg, "x0", 0.0), sim_value(cfg, "x0_tilde", 1.0),
            solve_cfg, gate=exp.get("gate", "equality"),
        )
    if "gate" in exp:
        sc.gate = exp["gate"]
    if "beta" in exp:
        sc.beta = float(exp["beta"])
    if "gaps" in exp:
        sc.gaps = tuple(float(tok) for tok in exp["gaps"].replace(",", " ").split())
    n_paths = sim_value(cfg, "n_paths", 20_000)
    return sc, n_paths


def cmd_couple(args) -> int:
    cfg = parse_config(args.config)
    sc, n_paths = _scenario_from_config(cfg)
    if sc.gate == "equality":
        ok, report = verify_equality_case(sc, n_paths=n_paths, config=sc.config)
        lines = _report_lines(report)
        _emit(args, lines, ycols=("mean",))
        return EXIT_OK if ok else EXIT_STAT_FAIL
    if sc.gate == "bound":
        rep = verify_gronwall_bound(
            sc.coeffs, sc.gaps, sc.params, sc.resolved_beta(), sc.config, n_paths,
            scenario=sc.name,
        )
        lines = ["scenario,t,beta,mean,std_error,n_paths,bias_budget,target,verdict"]
        for g, sub in zip(sc.gaps, rep.reports):
            for t, est in zip(sub.checkpoint_times, sub.estimates):
                bound = g ** rep.beta * float(np.exp(rep.fitted_C * t))
                lines.append(
                    f"{sc.name}[gap={g}],{t!r},{rep.beta!r},{est.mean!r},{est.std_error!r},"
                    f"{est.n_paths},{est.bias_budget!r},{bound!r},"
                    f"{'PASS' if rep.passed() else 'FAIL'}"
                )
        _emit(args, lines, ycols=("mean",))
        print(
            f"# ratio_range=[{rep.ratio_min!r},{rep.ratio_max!r}] fitted_C={rep.fitted_C!r}",
            file=sys.stderr,
        )
        return EXIT_OK if rep.passed() else EXIT_STAT_FAIL
    raise ConfigError(f"unknown gate {sc.gate!r} for couple")


def _report_lines(report) -> list[str]:
    import io

    buf = io.StringIO()
    write_report_csv(report, buf)
    return buf.getvalue().splitlines()


# ---------------------------------------------------------------------------
# contract
# ---------------------------------------------------------------------------

def cmd_contract(args) -> int:
    cfg = parse_config(args.config)
    exp = cfg.section("experiment")
    name = exp.get("name", "contraction")
    sc = get_scenario(name) if name != "custom" else None
    if sc is None:
        params = build_params(cfg)
        coeffs = build_coefficients(cfg, params.alpha)
        solve_cfg = build_solve_config(cfg)
        windows = tuple(float(tok) for tok in exp.get("windows", "0").replace(",", " ").split())
        threshold = float(exp.get("threshold", "0.05"))
        x0 = sim_value(cfg, "x0", 0.0)
        x0t = sim_value(cfg, "x0_tilde", 1.0)
    else:
        params = sc.params
        coeffs = sc.coeffs
        solve_cfg = build_solve_config(cfg, base=sc.config)
        windows = sc.window_starts
        threshold = float(exp.get("threshold", repr(sc.contraction_threshold)))
        x0 = sim_value(cfg, "x0", sc.x0)
        x0t = sim_value(cfg, "x0_tilde", sc.x0_tilde)
    n_paths = sim_value(cfg, "n_paths", 400)
    ccfg = ContractionConfig(coeffs, solve_cfg.horizon, windows)
    rep = contraction_study(
        ccfg, params, x0, x0t, n_paths, solve_cfg, threshold=threshold,
        scenario=name,
    )
    lines = ["window_start,median_tail_sup"]
    for s, m in zip(rep.window_starts, rep.median_tail_sup):
        lines.append(f"{s!r},{m!r}")
    _emit(args, lines, ycols=("median_tail_sup",))
    print(
        f"# monotone={rep.per_path_monotone} last_median={rep.median_tail_sup[-1]!r} "
        f"threshold={threshold * rep.initial_gap!r}",
        file=sys.stderr,
    )
    return EXIT_OK if rep.passed() else EXIT_STAT_FAIL


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _emit(args, lines, ycols=()) -> None:
    text = "\n".join(lines) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    script = getattr(args, "gnuplot_script", None)
    if script:
        data = out if out else "-"
        header = lines[0].split(",")
        with open(script, "w") as fh:
            fh.write("set datafile separator ','\nset key autotitle columnhead\n")
            for col in ycols:
                if col in header:
                    idx = header.index(col) + 1
                    fh.write(f"plot '{data}' using {idx} with linespoints\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stable-sde",
        description="Critical exponents, jump-measure integrals and coupled "
                    "Monte Carlo experiments for stable-driven SDEs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponent", help="critical exponent and required regularity indices")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--c", type=float, default=None, help="intensity ratio a_minus/a_plus")
    p.add_argument("--a-minus", type=float, default=None)
    p.add_argument("--a-plus", type=float, default=None)
    p.set_defaults(fn=cmd_exponent)

    p = sub.add_parser("integrals", help="closed forms vs adaptive quadrature on a grid")
    p.add_argument("--regime", choices=("finite", "infinite", "both"), default="both")
    p.add_argument("--n", type=int, default=5, help="alpha grid size per regime")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.add_argument("--gnuplot-script", default=None)
    p.set_defaults(fn=cmd_integrals)

    p = sub.add_parser("simulate", help="write per-path skeleton CSVs from a config")
    p.add_argument("config")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("couple", help="coupled-moment equality or bound gate")
    p.add_argument("config")
    p.add_argument("--out", default=None)
    p.add_argument("--gnuplot-script", default=None)
    p.set_defaults(fn=cmd_couple)

    p = sub.add_parser("contract", help="long-time contraction study")
    p.add_argument("config")
    p.add_argument("--out", default=None)
    p.add_argument("--gnuplot-script", default=None)
    p.set_defaults(fn=cmd_contract)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER_FAIL
    except NonConvergence as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_STAT_FAIL
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StableSdeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
