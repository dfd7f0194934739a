"""Tests for expression parsing and second-order jets."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tangent_lifts.errors import (
    ExpressionDomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
    VariableIndexError,
)
from tangent_lifts.expr_dsl import (
    Add,
    Call,
    Mul,
    Neg,
    Num,
    Pow,
    Var,
    eval_jet2,
    evaluate,
    parse,
    parse_inequality,
    tokenize,
)

LEAVES = ["x0", "x1", "x2", "1.5", "0.25", "x0*x1"]
UNARY = [
    "sin({})",
    "cos({})",
    "exp(0.3*{})",
    "sqrt(1 + ({})^2)",
    "log(2 + sin({}))",
    "tanh({})",
    "({})^2",
    "-({})",
]
BINARY = ["({} + {})", "({} - {})", "({} * {})", "({}) / (2 + cos({}))"]


def random_expression(rng, depth: int) -> str:
    if depth == 0 or rng.random() < 0.25:
        return LEAVES[rng.integers(len(LEAVES))]
    if rng.random() < 0.45:
        return UNARY[rng.integers(len(UNARY))].format(random_expression(rng, depth - 1))
    template = BINARY[rng.integers(len(BINARY))]
    return template.format(random_expression(rng, depth - 1), random_expression(rng, depth - 1))


def fd_grad(e, x, h=1e-5):
    grad = np.empty(len(x))
    for b in range(len(x)):
        step = np.zeros(len(x))
        step[b] = h
        grad[b] = (evaluate(e, x + step) - evaluate(e, x - step)) / (2 * h)
    return grad


def fd_hess(e, x, h=1e-5):
    hess = np.empty((len(x), len(x)))
    for c in range(len(x)):
        step = np.zeros(len(x))
        step[c] = h
        hess[:, c] = (eval_jet2(e, x + step).grad - eval_jet2(e, x - step).grad) / (2 * h)
    return hess


class TestParse:
    def test_precedence(self):
        assert parse("x0*x0 + 1", 2) == Add(Mul(Var(0), Var(0)), Num(1.0))
        assert parse("sin(x1)^2", 2) == Pow(Call("sin", Var(1)), Num(2.0))

    def test_power_binds_tighter_than_unary_minus(self):
        assert parse("-x0^2", 1) == Neg(Pow(Var(0), Num(2.0)))
        assert evaluate(parse("-x0^2", 1), [3.0]) == -9.0

    def test_power_is_right_associative(self):
        assert evaluate(parse("2^3^2", 1), [0.0]) == 512.0
        assert evaluate(parse("2^-1", 1), [0.0]) == 0.5

    def test_minus_is_left_associative(self):
        assert evaluate(parse("10 - 4 - 3", 1), [0.0]) == 3.0
        assert evaluate(parse("12 / 3 / 2", 1), [0.0]) == 2.0

    def test_exponent_literals(self):
        assert evaluate(parse("1e-6 + 2.5E2", 1), [0.0]) == pytest.approx(250.000001)

    def test_unary_plus_and_minus_inside_sums(self):
        assert evaluate(parse("1 + -0.5*x0", 1), [2.0]) == 0.0
        assert evaluate(parse("+x0", 1), [2.0]) == 2.0

    def test_variable_index_out_of_range(self):
        with pytest.raises(VariableIndexError, match="out of range"):
            parse("x3", 2)

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError, match="'foo'"):
            parse("foo(x0)", 2)
        with pytest.raises(UnknownIdentifierError):
            parse("M*x0", 2)

    def test_syntax_errors_carry_byte_offset(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse("x0 + * x1", 2)
        assert info.value.offset == 5

        # the non-breaking space takes two bytes
        with pytest.raises(ExpressionSyntaxError) as info:
            parse("x0\u00a0+ )", 2)
        assert info.value.offset == 6

    def test_empty_and_unbalanced(self):
        with pytest.raises(ExpressionSyntaxError):
            parse("   ", 2)
        with pytest.raises(ExpressionSyntaxError, match="Expected '\\)'"):
            parse("sin(x0", 2)
        with pytest.raises(ExpressionSyntaxError):
            parse("x0 x1", 2)

    def test_parameters_and_constants(self):
        e = parse("2*M/x1", 2, {"M": 1.5})
        assert evaluate(e, [0.0, 3.0]) == 1.0
        assert e.to_text() == "((2.0 * M) / x1)"
        assert evaluate(parse("pi/2", 1), [0.0]) == math.pi / 2

    def test_round_trip_is_structural(self, rng):
        for _ in range(50):
            text = random_expression(rng, 4)
            e = parse(text, 3)
            assert parse(e.to_text(), 3) == e

    def test_tokenize_comparators(self):
        kinds = [t.kind for t in tokenize("x0 >= 1")]
        assert kinds == ["ident", "cmp", "num", "end"]


class TestJets:
    def test_square(self):
        j = eval_jet2(parse("x0*x0", 1), [3.0])
        assert j.value == 9.0
        assert j.grad.tolist() == [6.0]
        assert j.hess.tolist() == [[2.0]]

    def test_sine_at_quarter_turn(self):
        j = eval_jet2(parse("sin(x1)", 2), [0.0, math.pi / 2])
        assert j.value == pytest.approx(1.0)
        assert j.grad[1] == pytest.approx(0.0, abs=1e-15)
        assert j.hess[1, 1] == pytest.approx(-1.0)

    def test_monomial_against_finite_differences(self):
        e = parse("x0^2*x1", 2)
        x = np.array([2.0, 5.0])
        j = eval_jet2(e, x)
        assert j.value == 20.0
        assert np.allclose(j.grad, [20.0, 4.0])
        assert np.allclose(j.hess, [[10.0, 4.0], [4.0, 0.0]])
        assert np.allclose(fd_grad(e, x), j.grad, atol=1e-6)
        assert np.allclose(fd_hess(e, x), j.hess, atol=1e-6)

    def test_integer_power_of_negative_base(self):
        j = eval_jet2(parse("x0^3", 1), [-2.0])
        assert j.value == -8.0
        assert j.grad.tolist() == [12.0]
        assert j.hess.tolist() == [[-12.0]]

    def test_hessian_is_exactly_symmetric(self, rng):
        for _ in range(50):
            e = parse(random_expression(rng, 4), 3)
            j = eval_jet2(e, rng.uniform(-1, 1, 3))
            assert np.array_equal(j.hess, j.hess.T)

    def test_random_expressions_against_finite_differences(self, rng):
        for _ in range(200):
            e = parse(random_expression(rng, 4), 3)
            x = rng.uniform(-1, 1, 3)
            j = eval_jet2(e, x)
            scale_g = np.maximum(1.0, np.abs(j.grad))
            scale_h = np.maximum(1.0, np.abs(j.hess))
            assert np.all(np.abs(fd_grad(e, x) - j.grad) <= 1e-5 * scale_g), e.to_text()
            assert np.all(np.abs(fd_hess(e, x) - j.hess) <= 1e-5 * scale_h), e.to_text()

    def test_value_only_evaluation_matches_jet(self, rng):
        for _ in range(50):
            e = parse(random_expression(rng, 4), 3)
            x = rng.uniform(-1, 1, 3)
            assert evaluate(e, x) == pytest.approx(eval_jet2(e, x).value, rel=1e-14, abs=1e-14)


class TestDomainErrors:
    def test_log_of_non_positive(self):
        with pytest.raises(ExpressionDomainError, match="log"):
            eval_jet2(parse("log(x0)", 1), [0.0])

    def test_sqrt_of_negative(self):
        with pytest.raises(ExpressionDomainError):
            eval_jet2(parse("sqrt(x0)", 1), [-1.0])

    def test_division_by_zero(self):
        with pytest.raises(ExpressionDomainError, match="Division by zero"):
            eval_jet2(parse("1/x0", 1), [0.0])
        with pytest.raises(ExpressionDomainError):
            evaluate(parse("1/x0", 1), [0.0])

    def test_fractional_power_of_negative_base(self):
        with pytest.raises(ExpressionDomainError, match="non-positive base"):
            eval_jet2(parse("x0^0.5", 1), [-1.0])


class TestInequalities:
    def test_holds(self):
        r = parse_inequality("x1 > 2*M*(1 + 1e-6)", 2, {"M": 1.0})
        assert r.holds([0.0, 3.0])
        assert not r.holds([0.0, 2.0])

    def test_domain_error_means_not_admitted(self):
        assert not parse_inequality("log(x0) > 0", 1).holds([-1.0])

    def test_exactly_one_comparison(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_inequality("x0 + 1", 1)
        with pytest.raises(ExpressionSyntaxError):
            parse_inequality("0 < x0 < 1", 1)


finite = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)


@given(finite, finite, finite)
@settings(max_examples=100, derandomize=True, deadline=None)
def test_sum_and_product_rules_hold_at_the_jet_level(a, b, c):
    x = np.array([a, b, c])
    f, g = parse("sin(x0)*x1", 3), parse("exp(0.5*x2) + x0^2", 3)
    jf, jg = eval_jet2(f, x), eval_jet2(g, x)

    total = eval_jet2(Add(f, g), x)
    assert np.allclose(total.grad, jf.grad + jg.grad, rtol=1e-14, atol=1e-14)
    assert np.allclose(total.hess, jf.hess + jg.hess, rtol=1e-14, atol=1e-14)

    product = eval_jet2(Mul(f, g), x)
    cross = np.outer(jf.grad, jg.grad)
    assert np.allclose(product.grad, jf.value * jg.grad + jg.value * jf.grad, rtol=1e-13, atol=1e-13)
    assert np.allclose(
        product.hess,
        jf.value * jg.hess + jg.value * jf.hess + cross + cross.T,
        rtol=1e-13,
        atol=1e-13,
    )
