"""Numba glue: jitted scalar helpers and source compilation with a pure-Python fallback.

Solver kernels and compiled coefficient functions must never raise from a hot
loop, so division, pow, exp and log are routed through helpers with IEEE
nan/inf semantics on both the jitted and the fallback path.
"""

from __future__ import annotations

import math

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False


def kernel_jit(fn):
    """JIT a solver kernel (nogil so path batches parallelize), or return it unchanged."""
    if HAVE_NUMBA:
        return numba.njit(cache=False, nogil=True)(fn)
    return fn


def _py_sign(a: float) -> float:
    return float((a > 0.0) - (a < 0.0))


def _py_div(a: float, b: float) -> float:
    if b != 0.0:
        return a / b
    if a != a or a == 0.0:
        return math.nan
    return math.copysign(math.inf, a) * math.copysign(1.0, b)


def _py_pow(a: float, b: float) -> float:
    try:
        return math.pow(a, b)
    except ValueError:
        return math.nan
    except OverflowError:
        return math.inf


def _py_exp(a: float) -> float:
    try:
        return math.exp(a)
    except OverflowError:
        return math.inf


def _py_log(a: float) -> float:
    if a > 0.0:
        return math.log(a)
    return -math.inf if a == 0.0 else math.nan


if HAVE_NUMBA:
    _nb_inline = numba.njit(inline="always", error_model="numpy")

    @_nb_inline
    def _nb_sign(a):
        return float((a > 0.0) - (a < 0.0))

    @_nb_inline
    def _nb_div(a, b):
        return a / b

    @_nb_inline
    def _nb_pow(a, b):
        return a ** b

    @_nb_inline
    def _nb_exp(a):
        return math.exp(a)

    @_nb_inline
    def _nb_log(a):
        return math.log(a)

    _HELPERS = {"_sign": _nb_sign, "_div": _nb_div, "_pow": _nb_pow, "_exp": _nb_exp, "_log": _nb_log}
else:
    _HELPERS = {"_sign": _py_sign, "_div": _py_div, "_pow": _py_pow, "_exp": _py_exp, "_log": _py_log}


def jit_compile_source(src: str, name: str):
    """Exec generated source with the helper namespace; njit the result when available.

    The returned callable is usable both from Python and from inside jitted
    kernels (as a dispatcher argument).
    """
    namespace = {"math": math, **_HELPERS}
    exec(compile(src, f"<stablesde:{name}>", "exec"), namespace)
    fn = namespace[name]
    fn.__stablesde_source__ = src
    if HAVE_NUMBA:
        # inline="always" folds coefficient evaluation into the kernel loops,
        # removing dispatcher call overhead from the per-event hot path
        jfn = numba.njit(nogil=True, error_model="numpy", inline="always")(fn)
        jfn.__stablesde_source__ = src
        return jfn
    return fn
