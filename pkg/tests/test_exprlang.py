import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stablesde.errors import EvalError, ExprSyntaxError, UnknownIdentifier
from stablesde.exprlang import (
    BinOp,
    Call,
    Neg,
    Num,
    Var,
    compile_fn,
    derive_gamma,
    empirical_holder_estimate,
    evaluate,
    parse,
    to_source,
)


def ev(text, x):
    return evaluate(parse(text), x, text)


def test_arithmetic_examples():
    # note: at x=0 the min() branch is 0, so the value is 1; at x=1 it is 2
    assert ev("1+min(abs(x)^0.666667,5)", 0.0) == 1.0
    assert ev("1+min(abs(x)^0.666667,5)", 1.0) == 2.0
    assert ev("sign(x)*abs(x)^0.25", -16.0) == -2.0
    assert ev("2^3^2", 0.0) == 512.0  # right associativity
    assert ev("-2^2", 0.0) == -4.0    # ^ binds over unary minus
    assert ev("2^-3", 0.0) == 0.125
    assert ev("clamp(x,-1,1)", 3.0) == 1.0
    assert ev("abs(x)", -2.5) == 2.5
    assert ev("max(x, 2*x)", -3.0) == -3.0
    assert ev("exp(0)+log(1)", 7.0) == 1.0
    assert ev("pow(2, 10)", 0.0) == 1024.0
    assert ev("x- -2", 5.0) == 7.0


def test_eval_errors():
    with pytest.raises(EvalError):
        ev("x/x", 0.0)
    with pytest.raises(EvalError):
        ev("log(x)", -1.0)
    with pytest.raises(EvalError):
        ev("log(x)", 0.0)
    with pytest.raises(EvalError):
        ev("x^0.5", -2.0)  # negative base, fractional exponent
    with pytest.raises(EvalError):
        ev("pow(x, 1.5)", -1.0)
    assert ev("x^2", -3.0) == 9.0  # integer exponents on negatives are fine
    assert ev("exp(x)", 1e6) == math.inf  # overflow saturates, not an error


def test_syntax_errors_carry_offsets():
    with pytest.raises(ExprSyntaxError) as err:
        parse("1+*2")
    assert err.value.offset == 2
    with pytest.raises(ExprSyntaxError):
        parse("min(x)")  # wrong arity
    with pytest.raises(ExprSyntaxError):
        parse("(1+2")
    with pytest.raises(UnknownIdentifier):
        parse("frob(x)")
    with pytest.raises(UnknownIdentifier):
        parse("y+1")
    with pytest.raises(ExprSyntaxError):
        parse("1+2)")


def _expr_strategy():
    leaves = st.one_of(
        st.floats(0.0, 10.0).map(lambda v: Num(value=float(v))),
        st.just(Var()),
    )

    def extend(children):
        return st.one_of(
            children.map(lambda e: Neg(operand=e)),
            st.tuples(st.sampled_from("+-*/"), children, children).map(
                lambda t: BinOp(op=t[0], left=t[1], right=t[2])
            ),
            st.tuples(children, children).map(lambda t: Call(name="min", args=t)),
            children.map(lambda e: Call(name="abs", args=(e,))),
        )

    return st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=120, deadline=None)
@given(_expr_strategy())
def test_print_parse_round_trip(expr):
    assert parse(to_source(expr)) == expr


@settings(max_examples=60, deadline=None)
@given(_expr_strategy(), st.floats(-50.0, 50.0))
def test_evaluate_deterministic_and_matches_compiled(expr, x):
    try:
        a = evaluate(expr, x)
    except EvalError:
        return
    b = evaluate(expr, x)
    assert a == b
    c = compile_fn(expr)(x)
    assert c == pytest.approx(a, rel=1e-15, abs=1e-300) or (math.isinf(a) and math.isinf(c))


def test_compiled_matches_checked_on_scenario_coefficients():
    for text in ("1+min(abs(x)^(2/3),5)", "1.5-0.5*clamp(sign(x)*abs(x)^0.25,-1,1)", "-x",
                 "1+0.1*min(abs(x),10)"):
        expr = parse(text)
        fn = compile_fn(expr)
        for x in (-11.0, -2.0, -0.5, 0.0, 0.3, 1.0, 7.0, 123.0):
            assert fn(x) == pytest.approx(evaluate(expr, x), rel=1e-14)


def test_derive_gamma_examples():
    g = derive_gamma(parse("2"), 0.75)
    assert g(0.123) == pytest.approx(1.681792830507429, rel=1e-14)  # 2^(3/4)
    g0 = derive_gamma(parse("0"), 0.75)
    assert g0(5.0) == 0.0
    gm = derive_gamma(parse("-1"), 1.5)
    assert gm(2.0) == -1.0
    with pytest.raises(ValueError):
        derive_gamma(parse("x"), 1.0)


def test_derive_gamma_sign_property():
    import numpy as np

    expr = parse("x*min(abs(x),2)-0.3")
    sigma = compile_fn(expr)
    gamma = derive_gamma(expr, 0.8)
    rng = np.random.default_rng(7)
    for x in rng.uniform(-10, 10, 10_000):
        s, g = sigma(float(x)), gamma(float(x))
        assert (g > 0) == (s > 0) and (g < 0) == (s < 0)
        assert (g == 0.0) == (s == 0.0)


def test_empirical_holder_estimates():
    e1 = empirical_holder_estimate(lambda x: x, (0.0, 1.0), 4000, seed=11)
    assert e1.index == pytest.approx(1.0, abs=0.05)
    e2 = empirical_holder_estimate(lambda x: math.sqrt(abs(x)), (-1.0, 1.0), 4000, seed=11)
    assert e2.index == pytest.approx(0.5, abs=0.05)
    assert e2.constant > 0
    e3 = empirical_holder_estimate(lambda x: 42.0, (0.0, 1.0), 2000, seed=11)
    assert e3.degenerate and e3.index == math.inf
    flagged = empirical_holder_estimate(
        lambda x: math.sqrt(abs(x)), (-1.0, 1.0), 4000, seed=11, declared_index=0.9
    )
    assert flagged.contradicts_declared
    ok = empirical_holder_estimate(
        lambda x: math.sqrt(abs(x)), (-1.0, 1.0), 4000, seed=11, declared_index=0.5
    )
    assert not ok.contradicts_declared
    with pytest.raises(ValueError):
        empirical_holder_estimate(lambda x: x, (0.0, 1.0), 100, seed=11)
