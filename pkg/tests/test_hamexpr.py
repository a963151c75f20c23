import math

import numpy as np
import pytest

from cmech import hamexpr
from cmech.errors import EvaluationError, ExpressionParseError, UnboundParameterError
from cmech.hamexpr import (
    Add, Const, Cos, Div, Exp, Mul, Neg, Param, ParamSet, Pow, Sin, Sub, Var,
    compile_expression, differentiate, eval_at, fold, parse, render, simplify,
)
from cmech.verification import random_smooth_expression


def ev(text, q=0.0, p=0.0, t=0.0, **params):
    return eval_at(parse(text), q, p, t, params)


class TestParse:
    def test_harmonic_hamiltonian(self):
        e = parse("p^2/(2*m) + k*q^2/2")
        assert e == Add(
            Div(Pow(Var("p"), 2), Mul(Const(2.0), Param("m"))),
            Div(Mul(Param("k"), Pow(Var("q"), 2)), Const(2.0)),
        )

    def test_imaginary_top_factor(self):
        e = parse("i*(alpha0)*(p^2/(2*m)+k*q^2/2)")
        assert isinstance(e, Mul)
        assert e.left == Mul(Const(1j), Param("alpha0"))

    def test_atomic_variable(self):
        assert parse("q") == Var("q")

    def test_precedence_and_right_assoc_power(self):
        assert ev("2+3*4") == 14.0
        assert ev("2*3^2") == 18.0
        assert ev("2^3^2") == 512.0  # right-associative
        assert ev("(2^3)^2") == 64.0

    def test_unary_minus_binds_looser_than_power(self):
        assert parse("-q^2") == Neg(Pow(Var("q"), 2))
        assert ev("-2^2") == -4.0

    def test_unary_minus_binds_tighter_than_addition(self):
        assert ev("1 - -2") == 3.0
        assert parse("-q + p") == Add(Neg(Var("q")), Var("p"))

    def test_scientific_notation(self):
        assert ev("1.5e-3") == 1.5e-3
        assert ev("2E2") == 200.0

    def test_rational_exponent(self):
        e = parse("q^(1/2)")
        assert isinstance(e, Pow)
        assert e.exponent.numerator == 1 and e.exponent.denominator == 2
        assert ev("4^(1/2)") == 2.0

    def test_negative_exponent(self):
        assert ev("2^-2") == 0.25

    def test_syntax_error_carries_position(self):
        with pytest.raises(ExpressionParseError) as err:
            parse("q + : p")
        assert err.value.position == 4

    def test_unknown_function(self):
        with pytest.raises(ExpressionParseError, match="unknown function"):
            parse("sinh(q)")

    def test_unbalanced_parenthesis(self):
        with pytest.raises(ExpressionParseError):
            parse("(q + p")

    def test_trailing_garbage(self):
        with pytest.raises(ExpressionParseError):
            parse("q p")

    def test_nonconstant_exponent_rejected(self):
        with pytest.raises(ExpressionParseError, match="exponent"):
            parse("q^p")


class TestEval:
    def test_harmonic_value(self):
        assert ev("p^2/2 + q^2/2", q=1.0, p=0.0) == 0.5

    def test_imaginary_unit(self):
        assert ev("i*q", q=2.0) == 2j

    def test_exp_at_zero(self):
        assert ev("exp(t)", t=0.0) == 1.0

    def test_unbound_parameter(self):
        with pytest.raises(UnboundParameterError, match="gamma"):
            ev("gamma*q", q=1.0)

    def test_division_by_zero(self):
        with pytest.raises(EvaluationError, match="division by zero"):
            ev("1/q", q=0.0)

    def test_rational_power_of_negative_real(self):
        with pytest.raises(EvaluationError, match="negative real"):
            ev("q^(1/2)", q=-1.0)

    def test_zero_to_negative_power(self):
        with pytest.raises(EvaluationError):
            ev("q^-1", q=0.0)

    def test_eval_is_pure(self):
        e = parse("sin(q)*exp(0.3*p) + k*t^3")
        params = {"k": 1.7}
        a = eval_at(e, 0.3, -1.2, 0.9, params)
        b = eval_at(e, 0.3, -1.2, 0.9, params)
        assert a == b

    def test_compiled_matches_reference_bitwise(self):
        rng = np.random.default_rng(42)
        params = {"a": 1.3, "b": 0.7}
        for _ in range(50):
            e = random_smooth_expression(rng)
            f = compile_expression(e)
            q, p, t = rng.uniform(-1.5, 1.5, 3)
            assert f(q, p, t, params) == eval_at(e, q, p, t, params)


class TestDifferentiate:
    def test_power_rule(self):
        d = simplify(differentiate(parse("k*q^2/2"), "q"))
        assert d == simplify(parse("k*q"))

    def test_momentum_power_rule(self):
        d = simplify(differentiate(parse("p^2/(2*m)"), "p"))
        assert d == simplify(parse("p/m"))

    def test_product_rule(self):
        d = simplify(differentiate(parse("sin(q)*p"), "q"))
        assert d == simplify(parse("cos(q)*p"))

    def test_parameter_is_constant(self):
        assert simplify(differentiate(parse("k"), "q")) == Const(0.0)

    def test_rejects_unknown_variable(self):
        with pytest.raises(ValueError):
            differentiate(parse("q"), "x")

    def test_against_finite_differences(self):
        # derivative-then-evaluate vs central difference, 100 random cases
        rng = np.random.default_rng(1234)
        params = {"a": 1.3, "b": 0.7}
        step = 1e-5
        for _ in range(100):
            e = random_smooth_expression(rng)
            q, p, t = rng.uniform(-1.5, 1.5, 3)
            for var in ("q", "p", "t"):
                exact = eval_at(differentiate(e, var), q, p, t, params)
                args = {"q": q, "p": p, "t": t}
                hi, lo = dict(args), dict(args)
                hi[var] += step
                lo[var] -= step
                fd = (
                    eval_at(e, hi["q"], hi["p"], hi["t"], params)
                    - eval_at(e, lo["q"], lo["p"], lo["t"], params)
                ) / (2 * step)
                assert abs(exact - fd) <= 1e-6 * max(1.0, abs(exact), abs(fd))


class TestSimplify:
    @pytest.mark.parametrize(
        "source,expected",
        [
            ("0*q + p", "p"),
            ("q^1", "q"),
            ("2*q + 3*q", "5*q"),
            ("q - q", "0"),
            ("1*q*1", "q"),
            ("q*m/(m*q)", "1"),
            ("q^2*q^-2", "1"),
        ],
    )
    def test_identities(self, source, expected):
        assert simplify(parse(source)) == simplify(parse(expected))

    def test_preserves_value_on_random_points(self):
        rng = np.random.default_rng(77)
        params = {"a": 1.3, "b": 0.7}
        for _ in range(100):
            e = random_smooth_expression(rng)
            s = simplify(e)
            q, p, t = rng.uniform(-1.5, 1.5, 3)
            v0 = eval_at(e, q, p, t, params)
            v1 = eval_at(s, q, p, t, params)
            assert abs(v0 - v1) <= 1e-12 * max(1.0, abs(v0))

    def test_idempotent(self):
        rng = np.random.default_rng(99)
        for _ in range(50):
            e = random_smooth_expression(rng)
            s = simplify(e)
            assert simplify(s) == s


def _random_ast(rng, depth=0):
    """ASTs for the parse/render round trip, including complex constants."""
    if depth >= 3 or rng.integers(0, 10) <= 2:
        choice = rng.integers(0, 4)
        if choice == 0:
            return Var(("q", "p", "t")[rng.integers(0, 3)])
        if choice == 1:
            return Param(("m", "k", "kappa0", "gamma")[rng.integers(0, 4)])
        if choice == 2:
            return Const(complex(rng.uniform(-3, 3)))
        return Const(complex(rng.uniform(-3, 3), rng.uniform(-3, 3)))
    roll = rng.integers(0, 8)
    sub = lambda: _random_ast(rng, depth + 1)
    if roll == 0:
        return Add(sub(), sub())
    if roll == 1:
        return Sub(sub(), sub())
    if roll == 2:
        return Mul(sub(), sub())
    if roll == 3:
        return Div(sub(), sub())
    if roll == 4:
        return Neg(sub())
    if roll == 5:
        from fractions import Fraction

        if rng.integers(0, 3) == 0:
            # rational powers are only defined for nonnegative real bases
            base = Const(complex(rng.uniform(0.5, 3.0)))
            return Pow(base, Fraction(int(rng.integers(1, 4)), int(rng.integers(2, 4))))
        return Pow(sub(), Fraction(int(rng.integers(-3, 4))))
    return (Sin, Cos, Exp)[rng.integers(0, 3)](sub())


class TestRoundTrip:
    def test_parse_render_identity_up_to_folding(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            e = _random_ast(rng)
            text = render(e)
            back = parse(text)
            assert fold(back) == fold(e), text

    def test_canonical_after_simplify(self):
        rng = np.random.default_rng(2025)
        for _ in range(100):
            e = random_smooth_expression(rng)
            assert simplify(parse(render(e))) == simplify(e)

    def test_structural_equality_decidable(self):
        a = parse("p^2/(2*m) + k*q^2/2")
        b = parse("p^2/(2*m) + k*q^2/2")
        c = parse("p^2/(2*m) + k*q^2/3")
        assert a == b
        assert hash(a) == hash(b)
        assert a != c


class TestParamSet:
    def test_defaults(self):
        ps = ParamSet()
        assert ps["kappa0"] == 1.0 and ps["m"] == 1.0 and ps["hbar"] == 1.0

    def test_derived_omega(self):
        ps = ParamSet(k=4.0, m=1.0)
        assert ps.omega == 2.0
        assert ps["omega"] == 2.0
        assert ParamSet(k=4.0, omega=7.0)["omega"] == 7.0  # explicit wins

    @pytest.mark.parametrize(
        "bad", [{"kappa0": 0.0}, {"m": -1.0}, {"hbar": 0.0}, {"k": -0.5}, {"n": 0}, {"n": 1.5}]
    )
    def test_validation(self, bad):
        with pytest.raises(ValueError):
            ParamSet(**bad)

    def test_unbound_lookup(self):
        with pytest.raises(UnboundParameterError):
            ParamSet()["alpha0"]

    def test_with_values_is_functional(self):
        base = ParamSet()
        other = base.with_values(k=9.0)
        assert base["k"] == 1.0 and other["k"] == 9.0

    def test_snapshot_materializes_omega(self):
        d = ParamSet(k=4.0).snapshot()
        assert d["omega"] == 2.0
