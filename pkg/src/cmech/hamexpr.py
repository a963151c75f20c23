"""Expression front end: parsing, symbolic differentiation, complex evaluation.

Expressions are immutable trees over the phase variables ``q``, ``p``, ``t``,
named parameters, and the imaginary unit ``i``.  The phase variables are
always real; constants may be complex, so evaluation returns complex values.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

from .errors import EvaluationError, ExpressionParseError, UnboundParameterError

VARIABLES = ("q", "p", "t")
FUNCTIONS = ("sin", "cos", "exp")


# ---------------------------------------------------------------------------
# AST node types
# ---------------------------------------------------------------------------

class Expression:
    """Base class; all nodes are frozen, hashable, structurally comparable."""

    __slots__ = ()

    def __add__(self, other):
        return Add(self, _coerce(other))

    def __radd__(self, other):
        return Add(_coerce(other), self)

    def __sub__(self, other):
        return Sub(self, _coerce(other))

    def __rsub__(self, other):
        return Sub(_coerce(other), self)

    def __mul__(self, other):
        return Mul(self, _coerce(other))

    def __rmul__(self, other):
        return Mul(_coerce(other), self)

    def __truediv__(self, other):
        return Div(self, _coerce(other))

    def __rtruediv__(self, other):
        return Div(_coerce(other), self)

    def __pow__(self, other):
        return Pow(self, other)

    def __neg__(self):
        return Neg(self)

    def __str__(self):
        return render(self)


def _coerce(value) -> Expression:
    if isinstance(value, Expression):
        return value
    if isinstance(value, (int, float, complex)):
        return Const(complex(value))
    raise TypeError(f"cannot use {type(value).__name__} in an expression")


@dataclass(frozen=True, eq=True)
class Const(Expression):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True, eq=True)
class Var(Expression):
    name: str

    def __post_init__(self):
        if self.name not in VARIABLES:
            raise ValueError(f"unknown variable {self.name!r}; use one of {VARIABLES}")


@dataclass(frozen=True, eq=True)
class Param(Expression):
    name: str


@dataclass(frozen=True, eq=True)
class Neg(Expression):
    arg: Expression


@dataclass(frozen=True, eq=True)
class Add(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Sub(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Mul(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Div(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, eq=True)
class Pow(Expression):
    base: Expression
    exponent: Fraction

    def __post_init__(self):
        object.__setattr__(self, "exponent", Fraction(self.exponent))


@dataclass(frozen=True, eq=True)
class Sin(Expression):
    arg: Expression


@dataclass(frozen=True, eq=True)
class Cos(Expression):
    arg: Expression


@dataclass(frozen=True, eq=True)
class Exp(Expression):
    arg: Expression


ZERO = Const(0.0)
ONE = Const(1.0)
IMAG = Const(1j)

_UNARY = (Neg, Sin, Cos, Exp)
_BINARY = (Add, Sub, Mul, Div)


def children(e: Expression) -> tuple[Expression, ...]:
    if isinstance(e, _UNARY):
        return (e.arg,)
    if isinstance(e, _BINARY):
        return (e.left, e.right)
    if isinstance(e, Pow):
        return (e.base,)
    return ()


# ---------------------------------------------------------------------------
# Tokenizer / parser (precedence climbing)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str  # num | ident | op | end
    text: str
    pos: int
    value: float = 0.0


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    idx = 0
    n = len(source)
    while idx < n:
        c = source[idx]
        if c.isspace():
            idx += 1
            continue
        if c.isdigit() or (c == "." and idx + 1 < n and source[idx + 1].isdigit()):
            start = idx
            while idx < n and (source[idx].isdigit() or source[idx] == "."):
                idx += 1
            if idx < n and source[idx] in "eE":
                mark = idx
                idx += 1
                if idx < n and source[idx] in "+-":
                    idx += 1
                if idx < n and source[idx].isdigit():
                    while idx < n and source[idx].isdigit():
                        idx += 1
                else:
                    idx = mark  # trailing 'e' is not an exponent
            text = source[start:idx]
            try:
                value = float(text)
            except ValueError:
                raise ExpressionParseError(f"bad number literal {text!r}", start) from None
            tokens.append(_Token("num", text, start, value))
            continue
        if c.isalpha() or c == "_":
            start = idx
            while idx < n and (source[idx].isalnum() or source[idx] == "_"):
                idx += 1
            tokens.append(_Token("ident", source[start:idx], start))
            continue
        if c in "+-*/^()":
            tokens.append(_Token("op", c, idx))
            idx += 1
            continue
        raise ExpressionParseError(f"unexpected character {c!r}", idx)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    """Precedence climbing over the token list.

    Binding powers: + - (10) < unary minus (15) < * / (20) < ^ (30).
    ``^`` is right-associative and its exponent must fold to a rational.
    """

    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.idx = 0

    def peek(self) -> _Token:
        return self.tokens[self.idx]

    def advance(self) -> _Token:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.advance()
        if tok.kind != "op" or tok.text != text:
            raise ExpressionParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return tok

    def parse(self) -> Expression:
        e = self.expr(0)
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionParseError(f"unexpected trailing input {tok.text!r}", tok.pos)
        return e

    def expr(self, min_bp: int) -> Expression:
        left = self.unary()
        while True:
            tok = self.peek()
            if tok.kind != "op" or tok.text not in "+-*/":
                return left
            bp = 10 if tok.text in "+-" else 20
            if bp < min_bp:
                return left
            self.advance()
            right = self.expr(bp + 1)  # left-associative
            if tok.text == "+":
                left = Add(left, right)
            elif tok.text == "-":
                left = Sub(left, right)
            elif tok.text == "*":
                left = Mul(left, right)
            else:
                left = Div(left, right)

    def unary(self) -> Expression:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            # binds tighter than +/- but looser than * / ^
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            exponent = self.unary()  # right-associative via recursion in unary->power
            return Pow(base, self._as_rational(exponent, tok.pos))
        return base

    @staticmethod
    def _as_rational(e: Expression, pos: int) -> Fraction:
        def walk(node) -> Fraction:
            if isinstance(node, Const):
                if node.value.imag != 0.0:
                    raise ExpressionParseError("exponent must be real", pos)
                return Fraction(node.value.real)
            if isinstance(node, Neg):
                return -walk(node.arg)
            if isinstance(node, Add):
                return walk(node.left) + walk(node.right)
            if isinstance(node, Sub):
                return walk(node.left) - walk(node.right)
            if isinstance(node, Mul):
                return walk(node.left) * walk(node.right)
            if isinstance(node, Div):
                den = walk(node.right)
                if den == 0:
                    raise ExpressionParseError("zero denominator in exponent", pos)
                return walk(node.left) / den
            if isinstance(node, Pow):
                base = walk(node.base)
                if node.exponent.denominator == 1:
                    return base ** node.exponent.numerator
            raise ExpressionParseError("exponent must be an integer or rational constant", pos)

        return walk(e)

    def atom(self) -> Expression:
        tok = self.advance()
        if tok.kind == "num":
            return Const(complex(tok.value))
        if tok.kind == "ident":
            name = tok.text
            if name == "i":
                return IMAG
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "(":
                if name not in FUNCTIONS:
                    raise ExpressionParseError(f"unknown function {name!r}", tok.pos)
                self.advance()
                arg = self.expr(0)
                self.expect(")")
                return {"sin": Sin, "cos": Cos, "exp": Exp}[name](arg)
            if name in VARIABLES:
                return Var(name)
            return Param(name)
        if tok.kind == "op" and tok.text == "(":
            e = self.expr(0)
            self.expect(")")
            return e
        raise ExpressionParseError(f"expected a value, found {tok.text or 'end of input'!r}", tok.pos)


def parse(source: str) -> Expression:
    """Parse expression source text into an AST."""
    return _Parser(_tokenize(source)).parse()


# ---------------------------------------------------------------------------
# Rendering (inverse of parse, up to constant folding)
# ---------------------------------------------------------------------------

_PREC = {Add: 10, Sub: 10, Neg: 15, Mul: 20, Div: 20, Pow: 30}
_ATOM_PREC = 100


def _prec(e: Expression) -> int:
    return _PREC.get(type(e), _ATOM_PREC)


def _fmt_real(x: float) -> str:
    return repr(x)


def _render_const(value: complex) -> str:
    re, im = value.real, value.imag
    if im == 0.0:
        return _fmt_real(re) if re >= 0 else f"({_fmt_real(re)})"
    if re == 0.0:
        if im == 1.0:
            return "i"
        return f"({_fmt_real(im)}*i)"
    sign = "+" if im >= 0 else "-"
    return f"({_fmt_real(re)}{sign}{_fmt_real(abs(im))}*i)"


def _render_exponent(r: Fraction) -> str:
    if r.denominator == 1 and r >= 0:
        return str(r.numerator)
    if r.denominator == 1:
        return f"({r.numerator})"
    return f"({r.numerator}/{r.denominator})"


def render(e: Expression) -> str:
    """Emit source text; ``parse(render(e))`` folds back to ``fold(e)``."""
    if isinstance(e, Const):
        return _render_const(e.value)
    if isinstance(e, Var) or isinstance(e, Param):
        return e.name
    if isinstance(e, Neg):
        inner = render(e.arg)
        # products bind tighter than the rendered unary minus: keep the
        # operand grouped so the reparse does not reassociate
        if _prec(e.arg) <= _PREC[Mul] or isinstance(e.arg, Neg):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, (Sin, Cos, Exp)):
        name = type(e).__name__.lower()
        return f"{name}({render(e.arg)})"
    if isinstance(e, Pow):
        base = render(e.base)
        if _prec(e.base) <= _PREC[Pow]:
            base = f"({base})"
        return f"{base}^{_render_exponent(e.exponent)}"
    if isinstance(e, Add) and isinstance(e.right, Neg):
        # render a + (-x) as a subtraction; canonical under simplify()
        e = Sub(e.left, e.right.arg)
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    mine = _prec(e)
    left = render(e.left)
    if _prec(e.left) < mine:
        left = f"({left})"
    right = render(e.right)
    # parenthesize right children of equal precedence so the reparse
    # reproduces the tree shape, not just the value
    if _prec(e.right) <= mine:
        right = f"({right})"
    return f"{left} {op} {right}"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _pow_value(base, exponent: Fraction):
    if exponent.denominator == 1:
        n = exponent.numerator
        if n == 0:
            return 1.0
        inv = n < 0
        n = abs(n)
        acc = base
        for _ in range(n - 1):
            acc = acc * base
        if inv:
            if acc == 0:
                raise EvaluationError("zero raised to a negative power")
            return 1.0 / acc
        return acc
    # rational path: defined for non-negative real bases only
    if isinstance(base, complex):
        if base.imag != 0.0:
            raise EvaluationError("rational power of a non-real value")
        base = base.real
    if base < 0.0:
        raise EvaluationError("rational power of a negative real")
    return base ** (exponent.numerator / exponent.denominator)


def compile_expression(e: Expression) -> Callable[[float, float, float, Mapping[str, float]], complex]:
    """Compile to a closure ``f(q, p, t, params) -> number``.

    The closure performs exactly the operations of :func:`eval_at`, in the
    same order, so the two agree bit for bit.
    """
    if isinstance(e, Const):
        v = e.value
        if v.imag == 0.0:
            r = v.real
            return lambda q, p, t, d: r
        return lambda q, p, t, d: v
    if isinstance(e, Var):
        if e.name == "q":
            return lambda q, p, t, d: q
        if e.name == "p":
            return lambda q, p, t, d: p
        return lambda q, p, t, d: t
    if isinstance(e, Param):
        name = e.name

        def look(q, p, t, d, name=name):
            try:
                return d[name]
            except KeyError:
                raise UnboundParameterError(name) from None

        return look
    if isinstance(e, Neg):
        f = compile_expression(e.arg)
        return lambda q, p, t, d: -f(q, p, t, d)
    if isinstance(e, Add):
        fa, fb = compile_expression(e.left), compile_expression(e.right)
        return lambda q, p, t, d: fa(q, p, t, d) + fb(q, p, t, d)
    if isinstance(e, Sub):
        fa, fb = compile_expression(e.left), compile_expression(e.right)
        return lambda q, p, t, d: fa(q, p, t, d) - fb(q, p, t, d)
    if isinstance(e, Mul):
        fa, fb = compile_expression(e.left), compile_expression(e.right)
        return lambda q, p, t, d: fa(q, p, t, d) * fb(q, p, t, d)
    if isinstance(e, Div):
        fa, fb = compile_expression(e.left), compile_expression(e.right)

        def div(q, p, t, d):
            den = fb(q, p, t, d)
            if den == 0:
                raise EvaluationError("division by zero")
            return fa(q, p, t, d) / den

        return div
    if isinstance(e, Pow):
        f = compile_expression(e.base)
        r = e.exponent
        return lambda q, p, t, d: _pow_value(f(q, p, t, d), r)
    if isinstance(e, Sin):
        f = compile_expression(e.arg)
        return lambda q, p, t, d: _sin(f(q, p, t, d))
    if isinstance(e, Cos):
        f = compile_expression(e.arg)
        return lambda q, p, t, d: _cos(f(q, p, t, d))
    if isinstance(e, Exp):
        f = compile_expression(e.arg)
        return lambda q, p, t, d: _exp(f(q, p, t, d))
    raise TypeError(f"cannot compile {type(e).__name__}")


def _sin(x):
    if isinstance(x, complex):
        import cmath
        return cmath.sin(x)
    return math.sin(x)


def _cos(x):
    if isinstance(x, complex):
        import cmath
        return cmath.cos(x)
    return math.cos(x)


def _exp(x):
    if isinstance(x, complex):
        import cmath
        return cmath.exp(x)
    return math.exp(x)


def eval_at(e: Expression, q: float, p: float, t: float, params: Mapping[str, float]) -> complex:
    """Reference tree-walking evaluator."""
    if isinstance(e, Const):
        v = e.value
        return v.real if v.imag == 0.0 else v
    if isinstance(e, Var):
        return {"q": q, "p": p, "t": t}[e.name]
    if isinstance(e, Param):
        try:
            return params[e.name]
        except KeyError:
            raise UnboundParameterError(e.name) from None
    if isinstance(e, Neg):
        return -eval_at(e.arg, q, p, t, params)
    if isinstance(e, Add):
        return eval_at(e.left, q, p, t, params) + eval_at(e.right, q, p, t, params)
    if isinstance(e, Sub):
        return eval_at(e.left, q, p, t, params) - eval_at(e.right, q, p, t, params)
    if isinstance(e, Mul):
        return eval_at(e.left, q, p, t, params) * eval_at(e.right, q, p, t, params)
    if isinstance(e, Div):
        den = eval_at(e.right, q, p, t, params)
        if den == 0:
            raise EvaluationError("division by zero")
        return eval_at(e.left, q, p, t, params) / den
    if isinstance(e, Pow):
        return _pow_value(eval_at(e.base, q, p, t, params), e.exponent)
    if isinstance(e, Sin):
        return _sin(eval_at(e.arg, q, p, t, params))
    if isinstance(e, Cos):
        return _cos(eval_at(e.arg, q, p, t, params))
    if isinstance(e, Exp):
        return _exp(eval_at(e.arg, q, p, t, params))
    raise TypeError(f"cannot evaluate {type(e).__name__}")


def evaluate(e: Expression, state, params: Mapping[str, float]) -> complex:
    """Evaluate at a phase-space state (anything with .q, .p, .t attributes)."""
    return complex(eval_at(e, state.q, state.p, state.t, params))


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------

def differentiate(e: Expression, var: str) -> Expression:
    """Exact symbolic partial derivative with respect to ``q``, ``p`` or ``t``."""
    if var not in VARIABLES:
        raise ValueError(f"can only differentiate with respect to {VARIABLES}")
    return _diff(e, var)


def _diff(e: Expression, v: str) -> Expression:
    if isinstance(e, (Const, Param)):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Neg):
        return Neg(_diff(e.arg, v))
    if isinstance(e, Add):
        return Add(_diff(e.left, v), _diff(e.right, v))
    if isinstance(e, Sub):
        return Sub(_diff(e.left, v), _diff(e.right, v))
    if isinstance(e, Mul):
        return Add(Mul(_diff(e.left, v), e.right), Mul(e.left, _diff(e.right, v)))
    if isinstance(e, Div):
        num = Sub(Mul(_diff(e.left, v), e.right), Mul(e.left, _diff(e.right, v)))
        return Div(num, Pow(e.right, Fraction(2)))
    if isinstance(e, Pow):
        r = e.exponent
        if r == 0:
            return ZERO
        coeff = Const(complex(r.numerator / r.denominator))
        return Mul(Mul(coeff, Pow(e.base, r - 1)), _diff(e.base, v))
    if isinstance(e, Sin):
        return Mul(Cos(e.arg), _diff(e.arg, v))
    if isinstance(e, Cos):
        return Neg(Mul(Sin(e.arg), _diff(e.arg, v)))
    if isinstance(e, Exp):
        return Mul(Exp(e.arg), _diff(e.arg, v))
    raise TypeError(f"cannot differentiate {type(e).__name__}")


# ---------------------------------------------------------------------------
# Structural conjugation and real/imaginary parts
# ---------------------------------------------------------------------------

def conjugate(e: Expression) -> Expression:
    """Structural complex conjugate.

    Valid because the phase variables are real and sin/cos/exp commute with
    conjugation; only constants need their imaginary parts flipped.
    """
    if isinstance(e, Const):
        return Const(e.value.conjugate())
    if isinstance(e, (Var, Param)):
        return e
    if isinstance(e, Neg):
        return Neg(conjugate(e.arg))
    if isinstance(e, Add):
        return Add(conjugate(e.left), conjugate(e.right))
    if isinstance(e, Sub):
        return Sub(conjugate(e.left), conjugate(e.right))
    if isinstance(e, Mul):
        return Mul(conjugate(e.left), conjugate(e.right))
    if isinstance(e, Div):
        return Div(conjugate(e.left), conjugate(e.right))
    if isinstance(e, Pow):
        return Pow(conjugate(e.base), e.exponent)
    if isinstance(e, Sin):
        return Sin(conjugate(e.arg))
    if isinstance(e, Cos):
        return Cos(conjugate(e.arg))
    if isinstance(e, Exp):
        return Exp(conjugate(e.arg))
    raise TypeError(f"cannot conjugate {type(e).__name__}")


def real_part(e: Expression) -> Expression:
    """(e + conj e)/2 as an expression; exact for real phase variables."""
    return simplify(Mul(Const(0.5), Add(e, conjugate(e))))


def imag_part(e: Expression) -> Expression:
    """(e - conj e)/(2i) as an expression; exact for real phase variables."""
    return simplify(Mul(Const(-0.5j), Sub(e, conjugate(e))))


# ---------------------------------------------------------------------------
# Constant folding and simplification
# ---------------------------------------------------------------------------

def fold(e: Expression) -> Expression:
    """Fold constant subtrees; no reordering, value-preserving."""
    if isinstance(e, (Const, Var, Param)):
        return e
    if isinstance(e, Neg):
        a = fold(e.arg)
        return Const(-a.value) if isinstance(a, Const) else Neg(a)
    if isinstance(e, Pow):
        b = fold(e.base)
        if isinstance(b, Const):
            return Const(complex(_pow_value(b.value, e.exponent)))
        return Pow(b, e.exponent)
    if isinstance(e, (Sin, Cos, Exp)):
        a = fold(e.arg)
        if isinstance(a, Const):
            fn = {Sin: _sin, Cos: _cos, Exp: _exp}[type(e)]
            return Const(complex(fn(a.value)))
        return type(e)(a)
    a, b = fold(e.left), fold(e.right)
    if isinstance(e, Add) and isinstance(b, Neg):
        # mirror of the renderer's a + (-x) == a - x normalization
        return Sub(a, b.arg)
    if isinstance(a, Const) and isinstance(b, Const):
        if isinstance(e, Add):
            return Const(a.value + b.value)
        if isinstance(e, Sub):
            return Const(a.value - b.value)
        if isinstance(e, Mul):
            return Const(a.value * b.value)
        if b.value == 0:
            raise EvaluationError("division by zero in constant folding")
        return Const(a.value / b.value)
    return type(e)(a, b)


def _flatten_sum(e: Expression, sign: complex, out: list):
    if isinstance(e, Add):
        _flatten_sum(e.left, sign, out)
        _flatten_sum(e.right, sign, out)
    elif isinstance(e, Sub):
        _flatten_sum(e.left, sign, out)
        _flatten_sum(e.right, -sign, out)
    elif isinstance(e, Neg):
        _flatten_sum(e.arg, -sign, out)
    else:
        out.append((sign, e))


class _Monomial:
    """coeff * prod(base^exponent); the canonical product form.

    Any expression decomposes into one of these: non-product nodes (sums,
    functions) become atomic bases, so structurally equal factors cancel
    between numerator and denominator.
    """

    __slots__ = ("coeff", "powers")

    def __init__(self, coeff: complex, powers: dict):
        self.coeff = coeff
        self.powers = powers  # render(base) -> [base, Fraction]

    def mul_power(self, base: Expression, exponent: Fraction):
        key = render(base)
        if key in self.powers:
            self.powers[key][1] += exponent
            if self.powers[key][1] == 0:
                del self.powers[key]
        else:
            self.powers[key] = [base, exponent]

    def key(self) -> str:
        return "*".join(f"{k}^{self.powers[k][1]}" for k in sorted(self.powers))

    def rebuild(self) -> Expression:
        num: list[Expression] = []
        den: list[Expression] = []
        for k in sorted(self.powers):
            base, exponent = self.powers[k]
            if exponent > 0:
                num.append(base if exponent == 1 else Pow(base, exponent))
            else:
                den.append(base if exponent == -1 else Pow(base, -exponent))
        numerator: Expression | None = None
        for f in num:
            numerator = f if numerator is None else Mul(numerator, f)
        if numerator is None:
            numerator = Const(self.coeff)
        elif self.coeff == -1:
            numerator = Neg(numerator)
        elif self.coeff != 1:
            numerator = Mul(Const(self.coeff), numerator)
        if not den:
            return numerator
        denominator: Expression | None = None
        for f in den:
            denominator = f if denominator is None else Mul(denominator, f)
        return Div(numerator, denominator)


def _as_monomial(e: Expression, power: Fraction = Fraction(1)) -> _Monomial | None:
    """Decompose into coeff * prod(base^exp); atoms may be whole subtrees."""
    if isinstance(e, Const):
        value = e.value
        if power != 1:
            if power.denominator != 1 and (value.imag != 0.0 or value.real < 0):
                return None
            value = complex(_pow_value(value, power))
        return _Monomial(value, {})
    if isinstance(e, Neg):
        if power.denominator != 1:
            return None
        inner = _as_monomial(e.arg, power)
        if inner is None:
            return None
        inner.coeff = inner.coeff if power.numerator % 2 == 0 else -inner.coeff
        return inner
    if isinstance(e, Mul):
        a = _as_monomial(e.left, power)
        b = _as_monomial(e.right, power)
        if a is None or b is None:
            return None
        a.coeff *= b.coeff
        for base, exponent in b.powers.values():
            a.mul_power(base, exponent)
        return a
    if isinstance(e, Div):
        a = _as_monomial(e.left, power)
        b = _as_monomial(e.right, -power)
        if a is None or b is None:
            return None
        if b.coeff == 0:
            raise EvaluationError("division by zero in simplification")
        a.coeff *= b.coeff
        for base, exponent in b.powers.values():
            a.mul_power(base, exponent)
        return a
    if isinstance(e, Pow):
        return _as_monomial(e.base, power * e.exponent)
    mono = _Monomial(1.0 + 0.0j, {})
    mono.mul_power(e, power)
    return mono


def simplify(e: Expression) -> Expression:
    """Value-preserving cleanup: constant folding, 0/1 identities, like-term
    collection, and cancellation of structurally equal product factors."""
    return _simplify(e)


def _product_normal_form(e: Expression) -> Expression:
    mono = _as_monomial(e)
    if mono is None:
        return e
    if mono.coeff == 0:
        return ZERO
    return mono.rebuild()


def _simplify(e: Expression) -> Expression:
    if isinstance(e, (Const, Var, Param)):
        return e
    if isinstance(e, Neg):
        a = _simplify(e.arg)
        if isinstance(a, Const):
            return Const(-a.value)
        if isinstance(a, Neg):
            return a.arg
        return _product_normal_form(Neg(a))
    if isinstance(e, Pow):
        if e.exponent == 0:
            return ONE
        b = _simplify(e.base)
        if e.exponent == 1:
            return b
        if isinstance(b, Const):
            return Const(complex(_pow_value(b.value, e.exponent)))
        return _product_normal_form(Pow(b, e.exponent))
    if isinstance(e, (Sin, Cos, Exp)):
        a = _simplify(e.arg)
        if isinstance(a, Const):
            fn = {Sin: _sin, Cos: _cos, Exp: _exp}[type(e)]
            return Const(complex(fn(a.value)))
        return type(e)(a)
    if isinstance(e, (Mul, Div)):
        node = type(e)(_simplify(e.left), _simplify(e.right))
        return _product_normal_form(node)
    if isinstance(e, (Add, Sub)):
        raw: list = []
        _flatten_sum(e, 1.0 + 0.0j, raw)
        groups: dict[str, _Monomial] = {}
        order: list[str] = []
        const_total = 0.0 + 0.0j
        for sign, term in raw:
            term = _simplify(term)
            mono = _as_monomial(term) or _Monomial(1.0 + 0.0j, {render(term): [term, Fraction(1)]})
            mono.coeff *= sign
            if not mono.powers:
                const_total += mono.coeff
                continue
            key = mono.key()
            if key in groups:
                groups[key].coeff += mono.coeff
            else:
                groups[key] = mono
                order.append(key)
        terms = [groups[k].rebuild() for k in sorted(order) if groups[k].coeff != 0]
        if const_total != 0 or not terms:
            terms.append(Const(const_total))
        total = terms[0]
        for term in terms[1:]:
            total = Add(total, term)
        return total
    raise TypeError(f"cannot simplify {type(e).__name__}")


# ---------------------------------------------------------------------------
# Parameter sets
# ---------------------------------------------------------------------------

_DEFAULTS = {"kappa0": 1.0, "m": 1.0, "k": 1.0, "hbar": 1.0}


class ParamSet(Mapping):
    """Immutable name -> value mapping with physics defaults.

    Reserved names: kappa0, m, k, alpha0, beta0, n, hbar.  ``omega`` is
    derived as sqrt(k/m) unless bound explicitly.  Defaults:
    kappa0 = m = k = hbar = 1.
    """

    __slots__ = ("_values",)

    def __init__(self, values: Mapping[str, float] | None = None, **kwargs):
        merged = dict(_DEFAULTS)
        if values:
            merged.update(values)
        merged.update(kwargs)
        for name, value in merged.items():
            if name == "n":
                if value != int(value) or int(value) < 1:
                    raise ValueError(f"n must be a positive integer, got {value}")
                merged[name] = int(value)
                continue
            value = float(value)
            if not math.isfinite(value):
                raise ValueError(f"parameter {name!r} must be finite, got {value}")
            merged[name] = value
        for name in ("kappa0", "m", "hbar"):
            if name in merged and merged[name] <= 0:
                raise ValueError(f"{name} must be positive, got {merged[name]}")
        if "k" in merged and merged["k"] < 0:
            raise ValueError(f"k must be nonnegative, got {merged['k']}")
        object.__setattr__(self, "_values", merged)

    def __getitem__(self, name: str) -> float:
        try:
            return self._values[name]
        except KeyError:
            if name == "omega" and "k" in self._values and "m" in self._values:
                return math.sqrt(self._values["k"] / self._values["m"])
            raise UnboundParameterError(name) from None

    def __contains__(self, name) -> bool:
        return name in self._values or (name == "omega" and "k" in self._values and "m" in self._values)

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in sorted(self._values.items()))
        return f"ParamSet({inner})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ParamSet) and self._values == other._values

    def __hash__(self):
        return hash(tuple(sorted(self._values.items())))

    @property
    def omega(self) -> float:
        return self["omega"]

    def with_values(self, values: Mapping[str, float] | None = None, **kwargs) -> "ParamSet":
        merged = dict(self._values)
        if values:
            merged.update(values)
        merged.update(kwargs)
        return ParamSet(merged)

    def snapshot(self) -> dict[str, float]:
        """Plain dict for evaluation hot paths, with omega materialized."""
        d = dict(self._values)
        if "omega" not in d and "k" in d and "m" in d:
            d["omega"] = math.sqrt(d["k"] / d["m"])
        return d
