import os
import subprocess
import sys

import pytest

BIN = [sys.executable, "-m", "stablesde.cli"]


def run_cli(*args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        BIN + list(args), capture_output=True, text=True, env=env, timeout=600
    )


@pytest.fixture()
def e1_config(tmp_path):
    cfg = tmp_path / "e1.cfg"
    cfg.write_text(
        "[experiment]\nname = E1\n\n"
        "[sim]\nn_paths = 150\nseed = 77\nepsilon = 0.01\ncheckpoints = 0.5, 1.0\n"
    )
    return str(cfg)


def test_exponent_examples():
    out = run_cli("exponent", "--alpha", "1.5", "--c", "1")
    assert out.returncode == 0
    fields = dict(line.split(" ", 1) for line in out.stdout.splitlines())
    assert abs(float(fields["beta"]) - 0.5) < 1e-12
    assert fields["regime"] == "infinite_variation"

    out = run_cli("exponent", "--alpha", "0.75", "--c", "0")
    assert out.returncode == 0
    fields = dict(line.split(" ", 1) for line in out.stdout.splitlines())
    assert abs(float(fields["beta"]) - 0.5) < 1e-12

    out = run_cli("exponent", "--alpha", "0.75", "--c", "0.8")
    assert out.returncode == 2

    out = run_cli("exponent", "--alpha", "1.5", "--a-minus", "0", "--a-plus", "1")
    assert out.returncode == 0
    fields = dict(line.split(" ", 1) for line in out.stdout.splitlines())
    assert abs(float(fields["beta"]) - 1.0) < 1e-12


def test_integrals_command(tmp_path):
    out_path = tmp_path / "grid.csv"
    out = run_cli("integrals", "--n", "2", "--out", str(out_path))
    assert out.returncode == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "alpha,beta,a_minus,a_plus,closed_form,quadrature,abs_diff"
    assert len(lines) > 20
    for line in lines[1:]:
        parts = line.split(",")
        closed, diff = float(parts[4]), float(parts[6])
        assert diff <= 1e-6 * max(abs(closed), 1.0) + 1e-9

    out = run_cli("integrals", "--n", "0")
    assert out.returncode == 2


def test_simulate_deterministic(tmp_path):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text(
        "[stable]\nalpha = 1.5\na_minus = 1.0\na_plus = 1.0\n\n"
        "[coeffs]\nsigma = 1+0.1*min(abs(x),10)\nb = -x\n\n"
        "[sim]\nhorizon = 1.0\nepsilon = 0.02\neuler_step = 0.01\n"
        "n_paths = 2\nseed = 42\nx0 = 0.5\n"
    )
    d1, d2 = tmp_path / "run1", tmp_path / "run2"
    out1 = run_cli("simulate", str(cfg), "--out-dir", str(d1))
    out2 = run_cli("simulate", str(cfg), "--out-dir", str(d2))
    assert out1.returncode == 0 and out2.returncode == 0
    for name in sorted(os.listdir(d1)):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()
    first = (d1 / "path_0000.csv").read_text().splitlines()
    assert first[0] == "t,value,is_jump"
    assert first[1].startswith("0.0,0.5,")


def test_simulate_drift_only(tmp_path):
    cfg = tmp_path / "sim.cfg"
    cfg.write_text(
        "[stable]\nalpha = 1.5\na_minus = 1.0\na_plus = 1.0\n\n"
        "[coeffs]\nsigma = 0\nb = 1\n\n"
        "[sim]\nhorizon = 2.0\nepsilon = 0.5\nn_paths = 1\nseed = 1\nx0 = 0.0\n"
    )
    d = tmp_path / "out"
    out = run_cli("simulate", str(cfg), "--out-dir", str(d))
    assert out.returncode == 0
    last = (d / "path_0000.csv").read_text().splitlines()[-1]
    t, v, _ = last.split(",")
    assert float(t) == 2.0 and abs(float(v) - 2.0) < 1e-12


def test_couple_scenario_and_exit_codes(e1_config, tmp_path):
    out_path = tmp_path / "rep.csv"
    out = run_cli("couple", e1_config, "--out", str(out_path))
    assert out.returncode == 0
    lines = out_path.read_text().splitlines()
    assert lines[0].startswith("scenario,t,beta,mean")
    assert all(line.endswith("PASS") for line in lines[1:])


def test_couple_insufficient_paths(tmp_path):
    cfg = tmp_path / "few.cfg"
    cfg.write_text("[experiment]\nname = E1\n\n[sim]\nn_paths = 10\nepsilon = 0.01\n")
    out = run_cli("couple", str(cfg))
    assert out.returncode == 2


def test_couple_thread_invariance(e1_config, tmp_path):
    outs = []
    for workers in ("1", "2"):
        path = tmp_path / f"rep{workers}.csv"
        out = run_cli(
            "couple", e1_config, "--out", str(path),
            env_extra={"STABLE_SDE_THREADS": workers},
        )
        assert out.returncode == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_contract_command(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[experiment]\nname = contraction\n\n[sim]\nn_paths = 60\nseed = 3\n")
    rep = tmp_path / "c.csv"
    out = run_cli("contract", str(cfg), "--out", str(rep))
    assert out.returncode == 0
    lines = rep.read_text().splitlines()
    assert lines[0] == "window_start,median_tail_sup"
    meds = [float(line.split(",")[1]) for line in lines[1:]]
    assert all(m2 <= m1 + 1e-15 for m1, m2 in zip(meds, meds[1:]))


def test_contract_regime_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(
        "[experiment]\nname = custom\nwindows = 0, 1\n\n"
        "[stable]\nalpha = 1.5\na_minus = 0.5\na_plus = 1.0\n\n"
        "[coeffs]\nsigma = 1\nb = -x\n\n"
        "[sim]\nhorizon = 1.0\nepsilon = 0.05\nn_paths = 50\nseed = 1\n"
    )
    out = run_cli("contract", str(cfg))
    assert out.returncode == 2


def test_config_strictness(tmp_path):
    cfg = tmp_path / "typo.cfg"
    cfg.write_text("[stable]\nalpha = 1.5\na_minuss = 1.0\na_plus = 1.0\n")
    out = run_cli("couple", str(cfg))
    assert out.returncode == 2
    assert "a_minuss" in out.stderr


def test_help_and_unknown_flags():
    assert run_cli("--help").returncode == 0
    for cmd in ("exponent", "integrals", "simulate", "couple", "contract"):
        out = run_cli(cmd, "--help")
        assert out.returncode == 0
        assert "--help" in out.stdout or "usage" in out.stdout.lower()
    out = run_cli("exponent", "--alpha", "1.5", "--c", "1", "--bogus")
    assert out.returncode == 2
    out = run_cli("nonsense")
    assert out.returncode == 2


def test_gnuplot_script_emission(tmp_path):
    out_path = tmp_path / "grid.csv"
    gp = tmp_path / "grid.gp"
    out = run_cli("integrals", "--n", "2", "--regime", "finite",
                  "--out", str(out_path), "--gnuplot-script", str(gp))
    assert out.returncode == 0
    text = gp.read_text()
    assert "plot" in text and str(out_path) in text
