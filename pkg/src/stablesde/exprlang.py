"""A small total expression language for drift/diffusion coefficients.

Grammar (loosest to tightest binding):

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative, binds over unary minus
    atom   := NUMBER | 'x' | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Built-ins: abs, sign, min, max, clamp(v,lo,hi), exp, log, pow(a,b).
Evaluation is total on finite inputs except division by zero, log outside
(0,inf) and pow with negative base and non-integer exponent, which raise
EvalError rather than returning NaN.

``compile_fn`` emits a plain ``x -> float`` function for solver inner loops;
there the partial cases degrade to IEEE nan/inf (the solvers' overflow guard
catches them) instead of raising, so hot loops stay exception-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import EvalError, ExprSyntaxError, UnknownIdentifier
from ._jit import jit_compile_source

_FUNCTIONS = {
    "abs": 1,
    "sign": 1,
    "min": 2,
    "max": 2,
    "clamp": 3,
    "exp": 1,
    "log": 1,
    "pow": 2,
}


@dataclass(frozen=True)
class Expr:
    span: tuple = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Num(Expr):
    value: float = 0.0


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr = None


@dataclass(frozen=True)
class BinOp(Expr):
    op: str = "+"
    left: Expr = None
    right: Expr = None


@dataclass(frozen=True)
class Call(Expr):
    name: str = ""
    args: tuple = ()


# ---------------------------------------------------------------------------
# tokenizer / parser
# ---------------------------------------------------------------------------

_OPS = set("+-*/^(),")


def _tokenize(text: str):
    tokens = []  # (kind, value, offset)
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            try:
                val = float(lit)
            except ValueError:
                raise ExprSyntaxError(f"bad number literal '{lit}'", i, ("number",))
            tokens.append(("num", val, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character '{ch}'", i, ("operator", "number", "name"))
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.peek()
        if tok[0] != kind:
            raise ExprSyntaxError(f"expected '{kind}', found '{tok[1] or 'end of input'}'", tok[2], (kind,))
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"trailing input '{tok[1]}'", tok[2], ("end of input",))
        return e

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op, _, off = self.advance()
            rhs = self.term()
            node = BinOp((node.span[0], rhs.span[1]), op, node, rhs)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op, _, off = self.advance()
            rhs = self.unary()
            node = BinOp((node.span[0], rhs.span[1]), op, node, rhs)
        return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok[0] == "-":
            self.advance()
            inner = self.unary()
            return Neg((tok[2], inner.span[1]), inner)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            exponent = self.unary()  # right-associative; allows 2^-3
            return BinOp((base.span[0], exponent.span[1]), "^", base, exponent)
        return base

    def atom(self) -> Expr:
        tok = self.peek()
        kind, value, off = tok
        if kind == "num":
            self.advance()
            return Num((off, off + 1), float(value))
        if kind == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "name":
            self.advance()
            if value == "x":
                return Var((off, off + 1))
            if self.peek()[0] != "(":
                raise UnknownIdentifier(value, off)
            if value not in _FUNCTIONS:
                raise UnknownIdentifier(value, off)
            self.expect("(")
            args = [self.expr()]
            while self.peek()[0] == ",":
                self.advance()
                args.append(self.expr())
            close = self.expect(")")
            arity = _FUNCTIONS[value]
            if len(args) != arity:
                raise ExprSyntaxError(
                    f"{value} expects {arity} argument(s), got {len(args)}", off, (f"{arity} arguments",)
                )
            return Call((off, close[2] + 1), value, tuple(args))
        raise ExprSyntaxError(
            f"expected an expression, found '{value or 'end of input'}'", off,
            ("number", "x", "function", "("),
        )


def parse(text: str) -> Expr:
    """Parse an expression string; diagnostics carry the byte offset."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# printing (round-trips through parse to a structurally identical tree)
# ---------------------------------------------------------------------------

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_source(expr: Expr) -> str:
    def render(e: Expr, parent_prec: int, right_side: bool) -> str:
        if isinstance(e, Num):
            return repr(e.value)
        if isinstance(e, Var):
            return "x"
        if isinstance(e, Neg):
            inner = render(e.operand, _PRECEDENCE["neg"], False)
            s = f"-{inner}"
            return f"({s})" if parent_prec > _PRECEDENCE["neg"] else s
        if isinstance(e, Call):
            return f"{e.name}({', '.join(render(a, 0, False) for a in e.args)})"
        if isinstance(e, BinOp):
            prec = _PRECEDENCE[e.op]
            if e.op == "^":
                left = render(e.left, prec + 1, False)
                right = render(e.right, prec, True)
            else:
                left = render(e.left, prec, False)
                right = render(e.right, prec + 1, True)
            s = f"{left} {e.op} {right}"
            return f"({s})" if parent_prec > prec or (parent_prec == prec and right_side) else s
        raise TypeError(f"not an Expr node: {e!r}")

    return render(expr, 0, False)


# ---------------------------------------------------------------------------
# checked evaluation
# ---------------------------------------------------------------------------

def _loc(expr: Expr, source: str | None) -> str:
    if source is None:
        return ""
    a, b = expr.span
    return source[a:b] if 0 <= a < b <= len(source) else ""


def evaluate(expr: Expr, x: float, _source: str | None = None) -> float:
    """Evaluate at a finite x; raises EvalError on partial built-ins, never returns NaN."""
    result = _eval(expr, float(x), _source)
    if math.isnan(result):
        raise EvalError("nan result", _loc(expr, _source))
    return result


def _eval(e: Expr, x: float, src) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, Neg):
        return -_eval(e.operand, x, src)
    if isinstance(e, BinOp):
        a = _eval(e.left, x, src)
        b = _eval(e.right, x, src)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if b == 0.0:
                raise EvalError("division by zero", _loc(e, src))
            return a / b
        return _checked_pow(a, b, e, src)
    if isinstance(e, Call):
        args = [_eval(a, x, src) for a in e.args]
        name = e.name
        if name == "abs":
            return abs(args[0])
        if name == "sign":
            return float((args[0] > 0.0) - (args[0] < 0.0))
        if name == "min":
            return min(args)
        if name == "max":
            return max(args)
        if name == "clamp":
            v, lo, hi = args
            return min(max(v, lo), hi)
        if name == "exp":
            try:
                return math.exp(args[0])
            except OverflowError:
                return math.inf
        if name == "log":
            if args[0] <= 0.0:
                raise EvalError("log domain", _loc(e, src))
            return math.log(args[0])
        if name == "pow":
            return _checked_pow(args[0], args[1], e, src)
    raise TypeError(f"not an Expr node: {e!r}")


def _checked_pow(a: float, b: float, e: Expr, src) -> float:
    if a < 0.0 and b != math.floor(b):
        # surfaces modeling mistakes; write sign(x)*abs(x)^p instead
        raise EvalError("pow with negative base and non-integer exponent", _loc(e, src))
    if a == 0.0 and b < 0.0:
        raise EvalError("division by zero", _loc(e, src))
    try:
        return math.pow(a, b)
    except OverflowError:
        return math.inf


# ---------------------------------------------------------------------------
# codegen for solver inner loops
# ---------------------------------------------------------------------------

def _codegen(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Neg):
        return f"(-{_codegen(e.operand)})"
    if isinstance(e, BinOp):
        a, b = _codegen(e.left), _codegen(e.right)
        if e.op == "/":
            return f"_div({a}, {b})"
        if e.op == "^":
            return f"_pow({a}, {b})"
        return f"({a} {e.op} {b})"
    if isinstance(e, Call):
        args = ", ".join(_codegen(a) for a in e.args)
        if e.name == "abs":
            return f"abs({args})"
        if e.name in ("min", "max"):
            return f"{e.name}({args})"
        if e.name == "clamp":
            v, lo, hi = (_codegen(a) for a in e.args)
            return f"min(max({v}, {lo}), {hi})"
        if e.name == "sign":
            return f"_sign({args})"
        if e.name == "exp":
            return f"_exp({args})"
        if e.name == "log":
            return f"_log({args})"
        if e.name == "pow":
            return f"_pow({args})"
    raise TypeError(f"not an Expr node: {e!r}")


def compile_fn(expr: Expr):
    """Compile to a fast scalar function (jitted when numba is available).

    Partial cases return IEEE nan/inf instead of raising; callers in solver
    loops rely on their own finiteness guards.
    """
    src = f"def _coeff(x):\n    return {_codegen(expr)}\n"
    return jit_compile_source(src, "_coeff")


def derive_signed_power(expr: Expr, power: float):
    """Evaluator for sign(e(x)) * |e(x)|^power; exactly zero where e vanishes."""
    src = (
        "def _signed_pow(x):\n"
        f"    s = {_codegen(expr)}\n"
        "    if s == 0.0:\n"
        "        return 0.0\n"
        f"    m = abs(s) ** {power!r}\n"
        "    return m if s > 0.0 else -m\n"
    )
    return jit_compile_source(src, "_signed_pow")


def derive_gamma(sigma: Expr, alpha: float):
    """Evaluator for sign(sigma(x)) * |sigma(x)|^alpha; exactly zero where sigma is."""
    if not (0.0 < alpha < 2.0) or alpha == 1.0:
        raise ValueError(f"alpha must lie in (0,2) without 1, got {alpha}")
    return derive_signed_power(sigma, alpha)


# ---------------------------------------------------------------------------
# regularity diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HolderEstimate:
    index: float                  # +inf convention when f is constant on the sample
    constant: float
    degenerate: bool
    contradicts_declared: bool | None


def empirical_holder_estimate(f, interval, n_pairs: int, seed=0, declared_index=None) -> HolderEstimate:
    """Fit a Hoelder index from |f(x)-f(y)| against |x-y| over random pairs.

    Pairs mix independent uniforms with pairs contracted toward anchor points
    (the endpoints, the midpoint and 0 when inside), so power-law kinks at an
    anchor drive the small-gap envelope.  The fitted exponent is the slope of
    the log-log upper envelope over gap bins: a lower-bound-style diagnostic,
    not a proof of regularity.
    """
    import numpy as np

    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if n_pairs < 1000:
        raise ValueError(f"need at least 1000 pairs, got {n_pairs}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    n_half = n_pairs // 2
    xs = rng.uniform(lo, hi, n_half)
    ys = rng.uniform(lo, hi, n_half)
    anchors = [lo, hi, 0.5 * (lo + hi)]
    if lo < 0.0 < hi:
        anchors.append(0.0)
    base = rng.uniform(lo, hi, n_pairs - n_half)
    which = rng.integers(0, len(anchors), n_pairs - n_half)
    shrink = np.exp(rng.uniform(np.log(1e-8), 0.0, n_pairs - n_half))
    anchor_vals = np.array(anchors)[which]
    contracted = anchor_vals + (base - anchor_vals) * shrink
    xs = np.concatenate([xs, base])
    ys = np.concatenate([ys, contracted])

    dists = np.abs(xs - ys)
    keep = dists > 0.0
    xs, ys, dists = xs[keep], ys[keep], dists[keep]
    diffs = np.abs(np.array([f(float(a)) for a in xs]) - np.array([f(float(b)) for b in ys]))
    pos = diffs > 0.0
    if not pos.any():
        return HolderEstimate(math.inf, 0.0, True, None if declared_index is None else False)
    dists, diffs = dists[pos], diffs[pos]
    order = np.argsort(dists)
    dists = dists[order]
    diffs = diffs[order]
    # empirical modulus of continuity: running max of |df| over gaps <= d
    modulus = np.maximum.accumulate(diffs)
    # fit log-modulus against log-gap on geometric scales
    d_lo = max(np.quantile(dists, 0.02), 1e-12)
    d_hi = dists[-1]
    if d_hi <= d_lo * 4.0:
        return HolderEstimate(math.inf, 0.0, True, None if declared_index is None else False)
    scales = np.geomspace(d_lo, d_hi, 16)
    idx = np.searchsorted(dists, scales, side="right") - 1
    ok = idx >= 0
    lx = np.log(scales[ok])
    ly = np.log(modulus[idx[ok]])
    slope = float(np.polyfit(lx, ly, 1)[0])
    index = slope
    constant = float(np.max(diffs / dists ** min(index, 1.0)))
    flag = None
    if declared_index is not None:
        flag = index < declared_index - 0.1
    return HolderEstimate(index, constant, False, flag)
