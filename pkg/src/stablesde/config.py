"""Sectioned key/value run configuration.

Strict parsing: unknown sections or keys are errors, since a typo in alpha or
epsilon would corrupt an experiment silently.  Values may be quoted; floats
accept anything Python's float() does.  Grammar:

    [stable]            alpha, a_minus, a_plus
    [coeffs]            sigma, b, gamma, sigma_monotone, gamma_monotone,
                        b_constant, growth, holder_index, holder_constant
    [sim]               horizon, epsilon, euler_step, n_paths, seed,
                        checkpoints, x0, x0_tilde, refinement, u_bound,
                        u_bound_growth, blowup_guard
    [experiment]        name, gate, gaps, windows, threshold, beta
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace

from .engine import SolveConfig, UBoundPolicy, make_coefficients
from .errors import ConfigError
from .exponents import Monotone
from .measure import validate_params

_ALLOWED = {
    "stable": {"alpha", "a_minus", "a_plus"},
    "coeffs": {
        "sigma", "b", "gamma", "sigma_monotone", "gamma_monotone",
        "b_constant", "growth", "holder_index", "holder_constant",
    },
    "sim": {
        "horizon", "epsilon", "euler_step", "n_paths", "seed", "checkpoints",
        "x0", "x0_tilde", "refinement", "u_bound", "u_bound_growth", "blowup_guard",
    },
    "experiment": {"name", "gate", "gaps", "windows", "threshold", "beta"},
}


@dataclass
class RunConfig:
    sections: dict

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})

    def require(self, name: str) -> dict:
        if name not in self.sections:
            raise ConfigError(f"missing required section [{name}]")
        return self.sections[name]


def _unquote(value: str) -> str:
    v = value.strip()
    if len(v) >= 2 and v[0] == v[-1] and v[0] in "\"'":
        return v[1:-1]
    return v


def parse_config(path) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    sections = {}
    for sec in cp.sections():
        if sec not in _ALLOWED:
            raise ConfigError(f"unknown section [{sec}]")
        body = {}
        for key, value in cp.items(sec):
            if key not in _ALLOWED[sec]:
                raise ConfigError(f"unknown key '{key}' in section [{sec}]")
            body[key] = _unquote(value)
        sections[sec] = body
    return RunConfig(sections)


def _get_float(body: dict, key: str, default=None) -> float | None:
    if key not in body:
        if default is None:
            raise ConfigError(f"missing key '{key}'")
        return default
    try:
        return float(body[key])
    except ValueError:
        raise ConfigError(f"key '{key}' is not a number: {body[key]!r}") from None


def _get_int(body: dict, key: str, default=None) -> int | None:
    if key not in body:
        return default
    try:
        return int(body[key])
    except ValueError:
        raise ConfigError(f"key '{key}' is not an integer: {body[key]!r}") from None


def _get_bool(body: dict, key: str, default: bool) -> bool:
    if key not in body:
        return default
    v = body[key].lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key '{key}' is not a boolean: {body[key]!r}")


def _get_floats(body: dict, key: str, default=None):
    if key not in body:
        return default
    raw = body[key].replace(",", " ").split()
    try:
        return tuple(float(tok) for tok in raw)
    except ValueError:
        raise ConfigError(f"key '{key}' is not a number list: {body[key]!r}") from None


_MONOTONE = {
    "": None,
    "none": None,
    "non_decreasing": Monotone.NON_DECREASING,
    "non-decreasing": Monotone.NON_DECREASING,
    "non_increasing": Monotone.NON_INCREASING,
    "non-increasing": Monotone.NON_INCREASING,
}


def build_params(cfg: RunConfig):
    body = cfg.require("stable")
    return validate_params(
        _get_float(body, "alpha"), _get_float(body, "a_minus"), _get_float(body, "a_plus")
    )


def build_coefficients(cfg: RunConfig, alpha: float):
    body = cfg.require("coeffs")
    sigma = body.get("sigma")
    gamma = body.get("gamma")
    if sigma is None and gamma is None:
        raise ConfigError("[coeffs] needs sigma or gamma")
    try:
        sig_mono = _MONOTONE[body.get("sigma_monotone", "").lower()]
        gam_mono = _MONOTONE[body.get("gamma_monotone", "").lower()]
    except KeyError as exc:
        raise ConfigError(f"bad monotone class {exc.args[0]!r}") from None
    holder = None
    if "holder_index" in body:
        holder = (_get_float(body, "holder_index"), _get_float(body, "holder_constant", 1.0))
    return make_coefficients(
        alpha,
        sigma=sigma,
        b=body.get("b", "0"),
        gamma=gamma,
        declared_growth=_get_float(body, "growth", 0.0) or None,
        sigma_monotone=sig_mono,
        gamma_monotone=gam_mono,
        b_constant=_get_bool(body, "b_constant", False) if "b_constant" in body else None,
        declared_holder=holder,
    )


def build_solve_config(cfg: RunConfig, base: SolveConfig | None = None) -> SolveConfig:
    body = cfg.section("sim")
    if base is None:
        sc = SolveConfig(
            horizon=_get_float(body, "horizon"),
            epsilon=_get_float(body, "epsilon"),
            euler_step=_get_float(body, "euler_step", 1e-3),
            seed=_get_int(body, "seed", 0),
            checkpoint_times=_get_floats(body, "checkpoints", ()),
            small_jump_refinement=_get_bool(body, "refinement", False),
        )
    else:
        sc = base
        if "horizon" in body:
            sc = replace(sc, horizon=_get_float(body, "horizon"))
        if "epsilon" in body:
            sc = replace(sc, epsilon=_get_float(body, "epsilon"))
        if "euler_step" in body:
            sc = replace(sc, euler_step=_get_float(body, "euler_step"))
        if "seed" in body:
            sc = replace(sc, seed=_get_int(body, "seed"))
        if "checkpoints" in body:
            sc = replace(sc, checkpoint_times=_get_floats(body, "checkpoints"))
        if "refinement" in body:
            sc = replace(sc, small_jump_refinement=_get_bool(body, "refinement", False))
    if "blowup_guard" in body:
        sc = replace(sc, blowup_guard=_get_float(body, "blowup_guard"))
    if "u_bound" in body or "u_bound_growth" in body:
        sc = replace(sc, u_bound_policy=UBoundPolicy(
            initial=_get_float(body, "u_bound", 0.0) or None,
            growth=_get_float(body, "u_bound_growth", 4.0),
        ))
    return sc


def sim_value(cfg: RunConfig, key: str, default=None):
    body = cfg.section("sim")
    if key in ("x0", "x0_tilde"):
        return _get_float(body, key, default)
    if key == "n_paths":
        return _get_int(body, key, default)
    raise KeyError(key)
