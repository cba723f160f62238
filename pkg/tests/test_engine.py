import math

import numpy as np
import pytest

from stablesde.engine import (
    GrowthBoundViolation,
    SolveConfig,
    UBoundPolicy,
    default_u_bound,
    make_coefficients,
    solve_coupled_pair,
    solve_finite_variation,
    solve_finite_variation_adaptive,
    solve_infinite_variation,
)
from stablesde.errors import Blowup, DominationExceeded, RegimeMismatch
from stablesde.exponents import Monotone
from stablesde.measure import Regime, validate_params
from stablesde.noise import build_stable_path, generate_event_stream, reconstruct_Z

SYM = validate_params(1.5, 1.0, 1.0)
FV = validate_params(0.75, 0.0, 1.0)


def test_drift_only_is_exact():
    coeffs = make_coefficients(1.5, sigma="0", b="1")
    stream = generate_event_stream(SYM, 0.1, 2.0, seed=42)
    cfg = SolveConfig(horizon=2.0, epsilon=0.1, euler_step=0.01, checkpoint_times=(0.7, 2.0))
    skel = solve_infinite_variation(coeffs, 3.0, stream, cfg)
    assert skel.final_value == pytest.approx(5.0, abs=1e-12)
    assert skel.value_at(0.7) == pytest.approx(3.7, abs=1e-12)


def test_additive_noise_matches_stable_path():
    coeffs = make_coefficients(1.5, sigma="1", b="0")
    stream = generate_event_stream(SYM, 0.05, 1.0, seed=7)
    cfg = SolveConfig(horizon=1.0, epsilon=0.05, euler_step=0.01)
    skel = solve_infinite_variation(coeffs, 1.0, stream, cfg)
    z = build_stable_path(stream, SYM, compensate=True)
    for t in (0.25, 0.5, 0.75, 1.0):
        assert skel.value_at(t) == pytest.approx(1.0 + z.value_at(t), abs=1e-12)
    # jump contributions match sigma * (stream partial sums) exactly
    assert np.allclose(skel.jump_sizes(), stream.sizes, atol=1e-12)


def test_euler_order_on_linear_drift():
    coeffs = make_coefficients(1.5, sigma="0", b="-x")
    stream = generate_event_stream(SYM, 1e9, 1.0, seed=1)  # effectively no jumps
    assert stream.n_events == 0
    errors = []
    steps = (0.02, 0.01, 0.005, 0.0025)
    for h in steps:
        cfg = SolveConfig(horizon=1.0, epsilon=1e9, euler_step=h)
        skel = solve_infinite_variation(coeffs, 1.0, stream, cfg)
        errors.append(abs(skel.final_value - math.exp(-1.0)))
    for e1, e2 in zip(errors, errors[1:]):
        assert e1 / e2 == pytest.approx(2.0, abs=0.2)


def test_thinning_constant_band():
    # gamma = 1: exactly the events with u in (0,1) are accepted
    coeffs = make_coefficients(0.75, sigma="1", b="0")
    stream = generate_event_stream(FV, 0.02, 1.0, u_bound=2.0, seed=3)
    cfg = SolveConfig(horizon=1.0, epsilon=0.02, euler_step=0.01)
    skel = solve_finite_variation(coeffs, 0.5, stream, cfg)
    manual = 0.5 + sum(z for z, u in zip(stream.sizes, stream.us) if 0.0 < u < 1.0)
    assert skel.final_value == pytest.approx(manual, abs=1e-12)


def test_thinning_zero_band():
    coeffs = make_coefficients(0.75, sigma="0", b="0.5")
    stream = generate_event_stream(FV, 0.02, 1.0, u_bound=2.0, seed=3)
    cfg = SolveConfig(horizon=1.0, epsilon=0.02, euler_step=0.01)
    skel = solve_finite_variation(coeffs, 0.0, stream, cfg)
    assert not skel.jump_flags.any()
    assert skel.final_value == pytest.approx(0.5, abs=1e-12)


def test_thinning_acceptance_fraction():
    c = 0.8
    u_bound = 2.0
    coeffs = make_coefficients(0.75, gamma=repr(c), b="0")
    accepted = 0
    total = 0
    cfg = SolveConfig(horizon=1.0, epsilon=0.005, euler_step=0.01)
    for i in range(60):
        stream = generate_event_stream(FV, 0.005, 1.0, u_bound=u_bound, seed=(13, i))
        skel = solve_finite_variation(coeffs, 0.0, stream, cfg)
        accepted += int(skel.jump_flags.sum())
        total += stream.n_events
    assert total > 10_000
    frac = accepted / total
    p = c / (2.0 * u_bound)
    assert abs(frac - p) < 3.0 * math.sqrt(p * (1 - p) / total)


def test_coupled_trivial_and_additive():
    cfg = SolveConfig(horizon=1.0, epsilon=0.05, euler_step=0.01, checkpoint_times=(0.5, 1.0))
    stream = generate_event_stream(SYM, 0.05, 1.0, seed=5)
    coeffs = make_coefficients(1.5, sigma="1+min(abs(x)^(2/3),5)", b="0")
    same = solve_coupled_pair(coeffs, 2.0, 2.0, stream, cfg, Regime.INFINITE_VARIATION)
    assert np.all(same.delta_at_checkpoints == 0.0)
    assert np.all(same.window_sup_delta == 0.0)
    additive = make_coefficients(1.5, sigma="1", b="0")
    res = solve_coupled_pair(additive, 0.0, 1.0, stream, cfg, Regime.INFINITE_VARIATION)
    # the shared noise cancels in the difference (up to summation rounding)
    assert np.allclose(res.delta_at_checkpoints, -1.0, atol=1e-12)
    with pytest.raises(RegimeMismatch):
        solve_coupled_pair(additive, 0.0, 1.0, stream, cfg, Regime.FINITE_VARIATION)


def test_pathwise_determinism_bit_exact():
    coeffs = make_coefficients(1.5, sigma="1+0.1*min(abs(x),10)", b="-x")
    stream = generate_event_stream(SYM, 0.05, 1.0, seed=8)
    cfg = SolveConfig(horizon=1.0, epsilon=0.05, euler_step=0.005, checkpoint_times=(1.0,))
    a = solve_infinite_variation(coeffs, 0.3, stream, cfg)
    b = solve_infinite_variation(coeffs, 0.3, stream, cfg)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.values, b.values)


def test_fast_path_matches_recorded():
    coeffs = make_coefficients(1.5, sigma="1+min(abs(x)^(2/3),5)", b="0")
    cfg = SolveConfig(horizon=1.0, epsilon=0.02, euler_step=0.01, checkpoint_times=(0.3, 1.0))
    stream = generate_event_stream(SYM, 0.02, 1.0, seed=15)
    rec = solve_coupled_pair(coeffs, 0.0, 1.0, stream, cfg, Regime.INFINITE_VARIATION, record=True)
    fast = solve_coupled_pair(coeffs, 0.0, 1.0, stream, cfg, Regime.INFINITE_VARIATION, record=False)
    assert np.array_equal(rec.delta_at_checkpoints, fast.delta_at_checkpoints)
    assert rec.path_x.value_at(0.3) - rec.path_x_tilde.value_at(0.3) == rec.delta_at_checkpoints[0]


def test_reconstruction_identity_for_every_fv_solve():
    coeffs = make_coefficients(0.75, sigma="1+0.5*clamp(sign(x)*abs(x)^0.5,-1,1)", b="0")
    cfg = SolveConfig(horizon=1.0, epsilon=0.05, euler_step=0.01)
    for i in range(10):
        stream = generate_event_stream(FV, 0.05, 1.0, u_bound=4.0, seed=(99, i))
        path = solve_finite_variation(coeffs, 0.0, stream, cfg)
        z = reconstruct_Z(stream, path, coeffs, FV)
        for t, dz in zip(z.jump_times(), z.jump_sizes()):
            y_pre = path.left_limit_at(t)
            jump_of_y = path.value_at(t) - y_pre if t in set(path.jump_times().tolist()) else 0.0
            assert abs(coeffs.sigma(y_pre) * dz - jump_of_y) < 1e-10


def test_blowup_guard():
    coeffs = make_coefficients(1.5, sigma="0", b="x*x")
    stream = generate_event_stream(SYM, 1e9, 3.0, seed=1)
    cfg = SolveConfig(horizon=3.0, epsilon=1e9, euler_step=0.001, blowup_guard=1e6)
    with pytest.raises(Blowup):
        solve_infinite_variation(coeffs, 10.0, stream, cfg)


def test_domination_and_adaptive_regrowth():
    # gamma exceeds a deliberately small initial bound once the path moves;
    # the adaptive driver regrows the band by superposition and succeeds
    coeffs = make_coefficients(0.75, gamma="1+min(abs(x),3)", b="0")
    cfg = SolveConfig(horizon=1.0, epsilon=0.02, euler_step=0.01,
                      u_bound_policy=UBoundPolicy(initial=1.05, growth=4.0), seed=31)
    stream = generate_event_stream(FV, 0.02, 1.0, u_bound=1.05, seed=31)
    with pytest.raises(DominationExceeded) as err:
        solve_finite_variation(coeffs, 0.5, stream, cfg)
    assert err.value.high_water > 1.05
    skel, final_stream = solve_finite_variation_adaptive(coeffs, 0.5, FV, cfg)
    assert final_stream.u_bound > 1.05
    assert math.isfinite(skel.final_value)


def test_default_u_bound_covers_gamma():
    coeffs = make_coefficients(0.75, gamma="1.5-0.5*clamp(sign(x)*abs(x)^0.25,-1,1)", b="0")
    ub = default_u_bound(coeffs, 0.0, 1.0)
    assert ub == pytest.approx(4.0, rel=1e-6)  # 2 * sup|gamma| with sup = 2


def test_growth_check():
    coeffs = make_coefficients(1.5, sigma="x*x", b="0", declared_growth=1.0)
    stream = generate_event_stream(SYM, 1e9, 1.0, seed=2)  # no jumps: path sits at x0
    assert stream.n_events == 0
    cfg = SolveConfig(horizon=1.0, epsilon=1e9, euler_step=0.01)
    with pytest.raises(GrowthBoundViolation):
        solve_infinite_variation(coeffs, 5.0, stream, cfg)


def test_gamma_consistency_invariant():
    coeffs = make_coefficients(0.8, sigma="x-0.5", b="0")
    rng = np.random.default_rng(3)
    for x in rng.uniform(-5, 5, 10_000):
        s = coeffs.sigma(float(x))
        g = coeffs.gamma(float(x))
        assert (g == 0.0) == (s == 0.0)
        assert math.copysign(1.0, g) == math.copysign(1.0, s) or g == s == 0.0


def test_solve_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(horizon=0.0, epsilon=0.1)
    with pytest.raises(ValueError):
        SolveConfig(horizon=1.0, epsilon=0.1, euler_step=0.0)
    with pytest.raises(ValueError):
        SolveConfig(horizon=1.0, epsilon=0.1, checkpoint_times=(2.0,))
    with pytest.raises(ValueError):
        SolveConfig(horizon=1.0, epsilon=0.1, checkpoint_times=(0.5, 0.25))


def test_monotone_coefficient_metadata():
    coeffs = make_coefficients(
        1.5, sigma="min(x, 5)", b="0", sigma_monotone=Monotone.NON_DECREASING
    )
    assert coeffs.sigma_monotone is Monotone.NON_DECREASING
    assert coeffs.b_constant
    assert not make_coefficients(1.5, sigma="1", b="-x").b_constant
