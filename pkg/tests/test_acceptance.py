"""Acceptance suite: one test per criterion, printed pass/fail lines included.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; the full suite takes several minutes at the stated sample sizes.
"""

import math
import os
import subprocess
import sys
import time
from dataclasses import replace

import numpy as np

from stablesde.engine import SolveConfig, make_coefficients, solve_finite_variation
from stablesde.exponents import (
    beta_finite,
    beta_infinite,
    closed_form_I,
    closed_form_I_tilde,
    i_summand_scale,
    i_tilde_summand_scale,
)
from stablesde.experiments import (
    ContractionConfig,
    contraction_study,
    get_scenario,
    moment_boundedness_study,
    verify_equality_case,
    verify_gronwall_bound,
)
from stablesde.measure import StableParams, validate_params
from stablesde.noise import (
    generate_event_stream,
    reconstruct_Z,
    self_similarity_distance,
    stable_endpoint_samples,
)
from stablesde.quadrature import (
    J_eta,
    K_eta,
    QuadratureSpec,
    SmoothedEvalPoint,
    default_eta_sweep,
    eta_limit_extrapolate,
    integral_I_numeric,
    integral_I_tilde_numeric,
    tilde_J_eta,
    tilde_K_eta,
    tilde_L_eta,
)

SPEC = QuadratureSpec()


def report(criterion, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {criterion}: {status}{' — ' + detail if detail else ''}")
    assert ok, f"criterion {criterion} failed: {detail}"


def test_criterion_01_exponent_boundary_identities():
    worst = 0.0
    for alpha in (1.1, 1.3, 1.5, 1.7, 1.9):
        worst = max(worst, abs(beta_infinite(alpha, 0.0).value - 1.0))
        worst = max(worst, abs(beta_infinite(alpha, 1.0).value - (alpha - 1.0)))
    for alpha in (0.55, 0.65, 0.75, 0.85, 0.95):
        worst = max(worst, abs(beta_finite(alpha, 0.0).value - (2.0 * alpha - 1.0)))
    report(1, worst < 1e-12, f"worst boundary deviation {worst:.2e}")


def test_criterion_02_zero_identities():
    t0 = time.time()
    worst_rel = 0.0
    worst_quad = 0.0
    for alpha in np.linspace(0.55, 0.95, 5).tolist():
        cmax = -math.cos(math.pi * alpha)
        for c in np.linspace(0.0, cmax * 0.99, 5).tolist():
            beta = beta_finite(alpha, c).value
            scale = i_summand_scale(alpha, beta, c, 1.0)
            worst_rel = max(worst_rel, abs(closed_form_I(alpha, beta, c, 1.0)) / scale)
            numeric = integral_I_numeric(alpha, beta, c, 1.0, SPEC)
            worst_quad = max(worst_quad, abs(float(numeric)) / max(scale, 1.0))
    for alpha in np.linspace(1.1, 1.9, 5).tolist():
        for c in np.linspace(0.0, 1.0, 5).tolist():
            beta = beta_infinite(alpha, c).value
            scale = i_tilde_summand_scale(alpha, beta, c, 1.0)
            worst_rel = max(worst_rel, abs(closed_form_I_tilde(alpha, beta, c, 1.0)) / scale)
            numeric = integral_I_tilde_numeric(alpha, beta, c, 1.0, SPEC)
            worst_quad = max(worst_quad, abs(float(numeric)) / max(scale, 1.0))
    ok = worst_rel < 1e-10 and worst_quad < 1e-6
    report(2, ok, f"closed-form rel {worst_rel:.2e}, quadrature {worst_quad:.2e}, {time.time()-t0:.0f}s")


def test_criterion_03_cross_oracle_agreement():
    t0 = time.time()
    rows = 0
    worst = 0.0
    for alpha in (0.55, 0.65, 0.75, 0.85, 0.95):
        for frac in (0.3, 0.6, 0.9):
            beta = frac * alpha
            for am, ap in ((0.0, 1.0), (1.0, 1.0), (0.3, 1.0)):
                closed = closed_form_I(alpha, beta, am, ap)
                numeric = float(integral_I_numeric(alpha, beta, am, ap, SPEC))
                worst = max(worst, abs(closed - numeric) / max(abs(closed), 1e-3))
                rows += 1
    for alpha in (1.1, 1.3, 1.5, 1.7, 1.9):
        for frac in (0.15, 0.5, 0.9):
            beta = alpha - 1.0 + frac * (2.0 - alpha)
            for am, ap in ((1.0, 1.0), (0.5, 1.0), (1.0, 0.0)):
                closed = closed_form_I_tilde(alpha, beta, am, ap)
                numeric = float(integral_I_tilde_numeric(alpha, beta, am, ap, SPEC))
                worst = max(worst, abs(closed - numeric) / max(abs(closed), 1e-3))
                rows += 1
    special_closed = closed_form_I_tilde(1.5, 0.5, 1.0, 0.0)
    special_numeric = float(integral_I_tilde_numeric(1.5, 0.5, 1.0, 0.0, SPEC))
    ok = (
        rows >= 50
        and worst < 1e-6
        and abs(special_closed - 2.0 / 3.0) < 1e-12
        and abs(special_numeric - 2.0 / 3.0) < 1e-6
    )
    report(3, ok, f"{rows} rows, worst rel diff {worst:.2e}, "
                  f"I-tilde(1.5,0.5,1,0)={special_numeric:.9f}, {time.time()-t0:.0f}s")


def _extra(fn, etas=None, **point):
    etas = etas if etas is not None else default_eta_sweep()
    return eta_limit_extrapolate(
        [(eta, float(fn(SmoothedEvalPoint(eta=eta, **point), SPEC))) for eta in etas]
    )


def test_criterion_04_smoothed_limits_and_bounds():
    t0 = time.time()
    # eta-extrapolated J vs |delta|^(beta-alpha) * (side-matched I) to 1e-4
    worst_j = 0.0
    for am, ap, alpha, frac in ((0.0, 1.0, 0.75, 1.0), (1.0, 1.0, 0.75, 0.8), (0.5, 1.0, 0.6, 0.7)):
        params = StableParams(alpha, am, ap)
        beta = beta_finite(alpha, params.ratio_c()).value if frac == 1.0 else frac * 0.5 * alpha
        i_pos = closed_form_I(alpha, beta, am, ap)
        i_neg = closed_form_I(alpha, beta, ap, am)
        for delta in (0.5, 1.0, 2.0, -1.0):
            lim = _extra(J_eta, delta=delta, beta=beta, params=params)
            target = abs(delta) ** (beta - alpha) * (i_pos if delta > 0 else i_neg)
            worst_j = max(worst_j, abs(lim.value - target))

    # extrapolated K-tilde and L-tilde limits below 1e-4
    worst_kl = 0.0
    for alpha, am, ap in ((1.5, 1.0, 1.0), (1.3, 0.5, 1.0), (1.8, 1.0, 1.0)):
        params = StableParams(alpha, am, ap)
        beta = beta_infinite(alpha, params.ratio_c()).value
        for d, dl in ((1.0, 1.0), (0.5, 2.0), (2.0, 0.5)):
            limk = _extra(tilde_K_eta, delta=d, beta=beta, params=params, delta_small=dl)
            liml = _extra(tilde_L_eta, delta=d, beta=beta, params=params, delta_small=dl)
            worst_kl = max(worst_kl, abs(limk.value), abs(liml.value))

    # empirical bound constants: the suprema over the (state, eta) sweep are
    # finite and move by < 10% when the sweep is extended by eta_min/2
    def sup_constants(etas):
        p_fv = StableParams(0.75, 1.0, 1.0)
        beta_fv = 0.4
        k_sup = max(
            float(K_eta(SmoothedEvalPoint(delta=d, eta=eta, beta=beta_fv, params=p_fv), SPEC))
            * abs(d) ** (p_fv.alpha - beta_fv)
            for d in np.geomspace(1e-3, 1e3, 7).tolist()
            for eta in etas
        )
        p_iv = StableParams(1.5, 1.0, 1.0)
        beta_iv = 0.8
        jt_sup = kt_sup = lt_sup = 0.0
        for d in (0.5, 1.0, 2.0):
            for dl in (0.5, 1.0, 2.0):
                for eta in etas:
                    pt = SmoothedEvalPoint(
                        delta=d, eta=eta, beta=beta_iv, params=p_iv, delta_small=dl
                    )
                    jt_sup = max(jt_sup, abs(float(tilde_J_eta(pt, SPEC)))
                                 * d ** (p_iv.alpha - beta_iv) * dl ** -p_iv.alpha)
                    kt_sup = max(kt_sup, float(tilde_K_eta(pt, SPEC))
                                 * d ** (p_iv.alpha - 2 * beta_iv) * dl ** -p_iv.alpha)
                    lt_sup = max(lt_sup, float(tilde_L_eta(pt, SPEC))
                                 * d ** (p_iv.alpha - beta_iv) * dl ** -p_iv.alpha)
        return np.array([k_sup, jt_sup, kt_sup, lt_sup])

    sweep = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
    c_ref = sup_constants(sweep)
    c_ext = sup_constants(sweep + [sweep[-1] / 2.0])
    finite = bool(np.all(np.isfinite(c_ref)) and np.all(np.isfinite(c_ext)))
    drift = np.abs(c_ext - c_ref) / np.maximum(c_ref, 1e-12)
    stable = bool(np.all(drift < 0.10))
    ok = worst_j < 1e-4 and worst_kl < 1e-4 and finite and stable
    report(4, ok, f"J dev {worst_j:.2e}, K~/L~ limits {worst_kl:.2e}, "
                  f"constants {np.round(c_ref, 3).tolist()} drift {np.max(drift):.3f}, "
                  f"{time.time()-t0:.0f}s")


def test_criterion_05_equality_E1():
    t0 = time.time()
    sc = get_scenario("E1")
    assert sc.config.epsilon <= 1e-3
    ok, rep = verify_equality_case(sc, n_paths=20_000)
    budget_ok = all(est.bias_budget < est.std_error for est in rep.estimates)
    detail = "; ".join(
        f"t={t}: {est.mean:.4f}±{est.std_error:.4f} (budget {est.bias_budget:.4f})"
        for t, est in zip(rep.checkpoint_times, rep.estimates)
    )
    report(5, ok and budget_ok, f"{detail}, {time.time()-t0:.0f}s")


def test_criterion_06_equality_E2():
    t0 = time.time()
    sc = get_scenario("E2")
    ok, rep = verify_equality_case(sc, n_paths=20_000)
    budget_ok = all(est.bias_budget < est.std_error for est in rep.estimates)
    detail = "; ".join(
        f"t={t}: {est.mean:.4f}±{est.std_error:.4f} (budget {est.bias_budget:.4f})"
        for t, est in zip(rep.checkpoint_times, rep.estimates)
    )
    report(6, ok and budget_ok, f"{detail}, {time.time()-t0:.0f}s")


def test_criterion_07_gronwall_bounds():
    t0 = time.time()
    details = []
    all_ok = True
    for name in ("lipschitz", "holder"):
        sc = get_scenario(name)
        rep = verify_gronwall_bound(
            sc.coeffs, (1.0, 0.1, 0.01), sc.params, sc.resolved_beta(), sc.config,
            2000, scenario=name,
        )
        all_ok &= rep.passed()
        details.append(
            f"{name}: ratio [{rep.ratio_min:.3f},{rep.ratio_max:.3f}] "
            f"C={rep.fitted_C:.3f} envelope={rep.envelope_ok} monotone={rep.monotone_in_gap}"
        )
    report(7, all_ok, "; ".join(details) + f", {time.time()-t0:.0f}s")


def test_criterion_08_moment_boundedness():
    t0 = time.time()
    sc = get_scenario("additive")
    horizons = (1.0, 2.0, 4.0)
    rep_a = moment_boundedness_study(sc.coeffs, 0.0, sc.params, 0.5, horizons, 2000, sc.config)
    cfg_b = replace(sc.config, seed=987654)
    rep_b = moment_boundedness_study(sc.coeffs, 0.0, sc.params, 0.5, horizons, 4000, cfg_b)
    finite = all(math.isfinite(e.mean) for e in rep_a.estimates + rep_b.estimates)
    stable = True
    for ea, eb in zip(rep_a.estimates, rep_b.estimates):
        tol = 2.0 * math.hypot(ea.std_error, eb.std_error)  # SE of the difference
        stable &= abs(ea.mean - eb.mean) <= tol
    ok = finite and stable and rep_a.passed() and rep_b.passed()
    detail = ", ".join(
        f"T={T}: {ea.mean:.4f}->{eb.mean:.4f}" for T, ea, eb in
        zip(horizons, rep_a.estimates, rep_b.estimates)
    )
    report(8, ok, detail + f", {time.time()-t0:.0f}s")


def test_criterion_09_contraction():
    t0 = time.time()
    sc = get_scenario("contraction")
    ccfg = ContractionConfig(sc.coeffs, sc.config.horizon, sc.window_starts)
    rep = contraction_study(
        ccfg, sc.params, sc.x0, sc.x0_tilde, 400, sc.config,
        threshold=sc.contraction_threshold,
    )
    ok = rep.passed()
    report(9, ok, f"medians {[f'{m:.2e}' for m in rep.median_tail_sup]}, "
                  f"monotone={rep.per_path_monotone}, {time.time()-t0:.0f}s")


def test_criterion_10_representation_identity_and_self_similarity():
    t0 = time.time()
    params = validate_params(0.75, 0.0, 1.0)
    coeffs = make_coefficients(0.75, sigma="1+0.5*clamp(sign(x)*abs(x)^0.5,-1,1)", b="0")
    cfg = SolveConfig(horizon=1.0, epsilon=0.05, euler_step=0.01)
    worst = 0.0
    for i in range(100):
        stream = generate_event_stream(params, 0.05, 1.0, u_bound=4.0, seed=(6000, i))
        path = solve_finite_variation(coeffs, 0.0, stream, cfg)
        z = reconstruct_Z(stream, path, coeffs, params)
        jump_times = set(path.jump_times().tolist())
        for t, dz in zip(z.jump_times(), z.jump_sizes()):
            y_pre = path.left_limit_at(t)
            dy = path.value_at(t) - y_pre if t in jump_times else 0.0
            worst = max(worst, abs(coeffs.sigma(y_pre) * dz - dy))
    sym = validate_params(1.5, 1.0, 1.0)
    n = 100_000
    eps = 0.1
    null = self_similarity_distance(
        stable_endpoint_samples(sym, eps, 1.0, n, seed=(61, 0)),
        stable_endpoint_samples(sym, eps, 1.0, n, seed=(61, 1)),
    )
    c = 2.0 ** (1.0 / sym.alpha)
    scaled = self_similarity_distance(
        stable_endpoint_samples(sym, eps * c, 2.0, n, seed=(61, 2)),
        c * stable_endpoint_samples(sym, eps, 1.0, n, seed=(61, 3)),
    )
    ok = worst < 1e-10 and null < 0.02 and scaled < 0.02
    report(10, ok, f"max jump residual {worst:.2e}, CF null {null:.4f}, "
                   f"CF scaled {scaled:.4f}, {time.time()-t0:.0f}s")


def test_criterion_11_cli_determinism(tmp_path):
    t0 = time.time()
    env_base = dict(os.environ)

    def run(args, threads):
        env = dict(env_base)
        env["STABLE_SDE_THREADS"] = threads
        out = subprocess.run(
            [sys.executable, "-m", "stablesde.cli", *args],
            capture_output=True, env=env, timeout=600,
        )
        assert out.returncode == 0, out.stderr.decode()
        return out.stdout

    couple_cfg = tmp_path / "couple.cfg"
    couple_cfg.write_text(
        "[experiment]\nname = E1\n\n"
        "[sim]\nn_paths = 150\nseed = 4242\nepsilon = 0.01\ncheckpoints = 0.5, 1.0\n"
    )
    contract_cfg = tmp_path / "contract.cfg"
    contract_cfg.write_text("[experiment]\nname = contraction\n\n[sim]\nn_paths = 60\nseed = 7\n")
    sim_cfg = tmp_path / "sim.cfg"
    sim_cfg.write_text(
        "[stable]\nalpha = 1.5\na_minus = 1.0\na_plus = 1.0\n\n"
        "[coeffs]\nsigma = 1+0.1*min(abs(x),10)\nb = -x\n\n"
        "[sim]\nhorizon = 1.0\nepsilon = 0.02\neuler_step = 0.01\nn_paths = 2\nseed = 11\n"
    )
    checks = []

    checks.append(run(["exponent", "--alpha", "1.5", "--c", "0.5"], "1")
                  == run(["exponent", "--alpha", "1.5", "--c", "0.5"], "2"))
    checks.append(run(["integrals", "--n", "2"], "1") == run(["integrals", "--n", "2"], "2"))

    for threads, out_dir in (("1", tmp_path / "sim1"), ("2", tmp_path / "sim2")):
        run(["simulate", str(sim_cfg), "--out-dir", str(out_dir)], threads)
    files1 = sorted(os.listdir(tmp_path / "sim1"))
    checks.append(files1 == sorted(os.listdir(tmp_path / "sim2")))
    checks.append(all(
        (tmp_path / "sim1" / f).read_bytes() == (tmp_path / "sim2" / f).read_bytes()
        for f in files1
    ))

    rep1 = tmp_path / "rep1.csv"
    rep2 = tmp_path / "rep2.csv"
    run(["couple", str(couple_cfg), "--out", str(rep1)], "1")
    run(["couple", str(couple_cfg), "--out", str(rep2)], "2")
    checks.append(rep1.read_bytes() == rep2.read_bytes())

    con1 = tmp_path / "con1.csv"
    con2 = tmp_path / "con2.csv"
    run(["contract", str(contract_cfg), "--out", str(con1)], "1")
    run(["contract", str(contract_cfg), "--out", str(con2)], "2")
    checks.append(con1.read_bytes() == con2.read_bytes())

    report(11, all(checks), f"{len(checks)} byte-identity checks, {time.time()-t0:.0f}s")
