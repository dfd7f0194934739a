"""Closed-form scalar expressions of the coordinates with exact second-order jets.

Grammar (EBNF, see docs/EXPRESSION_GRAMMAR.md):

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = ("-" | "+") unary | power ;
    power   = atom [ "^" unary ] ;
    atom    = number | variable | parameter | "pi"
            | function "(" expr ")" | "(" expr ")" ;
    variable = "x" digit { digit } ;

Usage:
    e = parse("x0^2*x1", 2)
    j = eval_jet2(e, [2.0, 5.0])  # j.value == 20, j.grad == (20, 4)
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from kybra_simple_logging import get_logger

from .errors import (
    ExpressionDomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
    VariableIndexError,
)

logger = get_logger(__name__)

MAX_INTEGER_EXPONENT = 64


class Jet2:
    """Value, gradient and Hessian of a scalar function at a point.

    The Hessian is built symmetric by every operation; it is never
    symmetrized after the fact.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad: np.ndarray, hess: np.ndarray):
        self.value = float(value)
        self.grad = grad
        self.hess = hess

    @property
    def dimension(self) -> int:
        return self.grad.shape[0]

    @classmethod
    def constant(cls, value: float, n: int) -> "Jet2":
        return cls(value, np.zeros(n), np.zeros((n, n)))

    @classmethod
    def variable(cls, index: int, value: float, n: int) -> "Jet2":
        grad = np.zeros(n)
        grad[index] = 1.0
        return cls(value, grad, np.zeros((n, n)))

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    def __sub__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value - other.value, self.grad - other.grad, self.hess - other.hess)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.hess)

    def __mul__(self, other: "Jet2") -> "Jet2":
        cross = np.outer(self.grad, other.grad)
        return Jet2(
            self.value * other.value,
            self.value * other.grad + other.value * self.grad,
            self.value * other.hess + other.value * self.hess + (cross + cross.T),
        )

    def scale(self, factor: float) -> "Jet2":
        return Jet2(factor * self.value, factor * self.grad, factor * self.hess)

    def chain(self, f0: float, f1: float, f2: float) -> "Jet2":
        """Compose with a scalar function given its value and first two derivatives."""
        return Jet2(f0, f1 * self.grad, f1 * self.hess + f2 * np.outer(self.grad, self.grad))

    def reciprocal(self) -> "Jet2":
        if self.value == 0.0:
            raise ExpressionDomainError("Division by zero")
        inv = 1.0 / self.value
        return self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other: "Jet2") -> "Jet2":
        return self * other.reciprocal()

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, grad={self.grad.tolist()!r}, hess={self.hess.tolist()!r})"


def _require_positive(name: str, v: float) -> None:
    if v <= 0.0:
        raise ExpressionDomainError(f"{name} of non-positive argument {v!r}")


def _tan_rule(v: float) -> Tuple[float, float, float]:
    if math.cos(v) == 0.0:
        raise ExpressionDomainError(f"tan undefined at {v!r}")
    t = math.tan(v)
    sec2 = 1.0 + t * t
    return t, sec2, 2.0 * t * sec2


def _log_rule(v: float) -> Tuple[float, float, float]:
    _require_positive("log", v)
    return math.log(v), 1.0 / v, -1.0 / (v * v)


def _sqrt_rule(v: float) -> Tuple[float, float, float]:
    _require_positive("sqrt", v)
    s = math.sqrt(v)
    return s, 0.5 / s, -0.25 / (s * v)


def _tanh_rule(v: float) -> Tuple[float, float, float]:
    t = math.tanh(v)
    d = 1.0 - t * t
    return t, d, -2.0 * t * d


def _exp_rule(v: float) -> Tuple[float, float, float]:
    try:
        e = math.exp(v)
    except OverflowError:
        raise ExpressionDomainError(f"exp overflow at {v!r}")
    return e, e, e


# name -> (value, first derivative, second derivative)
FUNCTIONS: Dict[str, Callable[[float], Tuple[float, float, float]]] = {
    "sin": lambda v: (math.sin(v), math.cos(v), -math.sin(v)),
    "cos": lambda v: (math.cos(v), -math.sin(v), -math.cos(v)),
    "tan": _tan_rule,
    "exp": _exp_rule,
    "log": _log_rule,
    "sqrt": _sqrt_rule,
    "sinh": lambda v: (math.sinh(v), math.cosh(v), math.sinh(v)),
    "cosh": lambda v: (math.cosh(v), math.sinh(v), math.cosh(v)),
    "tanh": _tanh_rule,
}

CONSTANTS: Dict[str, float] = {"pi": math.pi}


class Expression:
    """Base class of the expression syntax tree. Nodes are immutable."""

    def jet(self, x: np.ndarray) -> Jet2:
        raise NotImplementedError

    def value(self, x: Sequence[float]) -> float:
        raise NotImplementedError

    def to_text(self) -> str:
        raise NotImplementedError

    def variables(self) -> frozenset:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class Num(Expression):
    number: float

    def jet(self, x):
        return Jet2.constant(self.number, len(x))

    def value(self, x):
        return self.number

    def to_text(self):
        return repr(float(self.number))

    def variables(self):
        return frozenset()


@dataclass(frozen=True)
class Var(Expression):
    index: int

    def jet(self, x):
        return Jet2.variable(self.index, x[self.index], len(x))

    def value(self, x):
        return float(x[self.index])

    def to_text(self):
        return f"x{self.index}"

    def variables(self):
        return frozenset([self.index])


@dataclass(frozen=True)
class Param(Expression):
    """Named constant: a manifold parameter such as M, or pi."""

    name: str
    number: float

    def jet(self, x):
        return Jet2.constant(self.number, len(x))

    def value(self, x):
        return self.number

    def to_text(self):
        return self.name

    def variables(self):
        return frozenset()


@dataclass(frozen=True)
class Neg(Expression):
    operand: Expression

    def jet(self, x):
        return -self.operand.jet(x)

    def value(self, x):
        return -self.operand.value(x)

    def to_text(self):
        return f"(-{self.operand.to_text()})"

    def variables(self):
        return self.operand.variables()


@dataclass(frozen=True)
class Binary(Expression):
    left: Expression
    right: Expression
    symbol: str = field(default="?", init=False, repr=False)

    def to_text(self):
        return f"({self.left.to_text()} {self.symbol} {self.right.to_text()})"

    def variables(self):
        return self.left.variables() | self.right.variables()


@dataclass(frozen=True)
class Add(Binary):
    symbol: str = field(default="+", init=False, repr=False)

    def jet(self, x):
        return self.left.jet(x) + self.right.jet(x)

    def value(self, x):
        return self.left.value(x) + self.right.value(x)


@dataclass(frozen=True)
class Sub(Binary):
    symbol: str = field(default="-", init=False, repr=False)

    def jet(self, x):
        return self.left.jet(x) - self.right.jet(x)

    def value(self, x):
        return self.left.value(x) - self.right.value(x)


@dataclass(frozen=True)
class Mul(Binary):
    symbol: str = field(default="*", init=False, repr=False)

    def jet(self, x):
        return self.left.jet(x) * self.right.jet(x)

    def value(self, x):
        return self.left.value(x) * self.right.value(x)


@dataclass(frozen=True)
class Div(Binary):
    symbol: str = field(default="/", init=False, repr=False)

    def jet(self, x):
        return self.left.jet(x) / self.right.jet(x)

    def value(self, x):
        denominator = self.right.value(x)
        if denominator == 0.0:
            raise ExpressionDomainError("Division by zero")
        return self.left.value(x) / denominator


def _integer_power(base: Jet2, exponent: int) -> Jet2:
    if exponent == 0:
        return Jet2.constant(1.0, base.dimension)
    result = base
    for _ in range(abs(exponent) - 1):
        result = result * base
    return result.reciprocal() if exponent < 0 else result


@dataclass(frozen=True)
class Pow(Binary):
    symbol: str = field(default="^", init=False, repr=False)

    def _constant_exponent(self) -> Optional[float]:
        if self.right.variables():
            return None
        return self.right.value(())

    def jet(self, x):
        base = self.left.jet(x)
        c = self._constant_exponent()
        if c is not None and float(c).is_integer() and abs(c) <= MAX_INTEGER_EXPONENT:
            return _integer_power(base, int(c))
        a = base.value
        if a <= 0.0:
            raise ExpressionDomainError(f"Non-integer power of non-positive base {a!r}")
        if c is not None:
            return base.chain(a**c, c * a ** (c - 1.0), c * (c - 1.0) * a ** (c - 2.0))
        log_base = base.chain(math.log(a), 1.0 / a, -1.0 / (a * a))
        exponent = self.right.jet(x) * log_base
        return exponent.chain(*_exp_rule(exponent.value))

    def value(self, x):
        a = self.left.value(x)
        c = self.right.value(x)
        if float(c).is_integer() and abs(c) <= MAX_INTEGER_EXPONENT:
            if a == 0.0 and c < 0:
                raise ExpressionDomainError("Division by zero")
            return a ** int(c)
        if a <= 0.0:
            raise ExpressionDomainError(f"Non-integer power of non-positive base {a!r}")
        return a**c


@dataclass(frozen=True)
class Call(Expression):
    name: str
    arg: Expression

    def jet(self, x):
        inner = self.arg.jet(x)
        return inner.chain(*FUNCTIONS[self.name](inner.value))

    def value(self, x):
        return FUNCTIONS[self.name](self.arg.value(x))[0]

    def to_text(self):
        return f"{self.name}({self.arg.to_text()})"

    def variables(self):
        return self.arg.variables()


# ---------------------------------------------------------------- tokenizer

_OPERATORS = "+-*/^(),"
_COMPARATORS = (">=", "<=", ">", "<")


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    offset: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    i = 0
    offset = 0  # byte offset of text[i]
    while i < len(text):
        c = text[i]
        if c.isspace():
            offset += len(c.encode("utf-8"))
            i += 1
            continue
        start, start_offset = i, offset
        if c.isdigit() or (c == "." and i + 1 < len(text) and text[i + 1].isdigit()):
            while i < len(text) and (text[i].isdigit() or text[i] == "."):
                i += 1
            if i < len(text) and text[i] in "eE":
                j = i + 1
                if j < len(text) and text[j] in "+-":
                    j += 1
                if j < len(text) and text[j].isdigit():
                    i = j
                    while i < len(text) and text[i].isdigit():
                        i += 1
            literal = text[start:i]
            try:
                float(literal)
            except ValueError:
                raise ExpressionSyntaxError(f"Malformed number '{literal}'", start_offset)
            tokens.append(Token("num", literal, start_offset))
        elif c.isascii() and (c.isalpha() or c == "_"):
            while i < len(text) and text[i].isascii() and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(Token("ident", text[start:i], start_offset))
        elif text.startswith(_COMPARATORS, i):
            op = next(op for op in _COMPARATORS if text.startswith(op, i))
            i += len(op)
            tokens.append(Token("cmp", op, start_offset))
        elif c in _OPERATORS:
            i += 1
            tokens.append(Token("op", c, start_offset))
        else:
            raise ExpressionSyntaxError(f"Unexpected character {c!r}", start_offset)
        offset = start_offset + len(text[start:i].encode("utf-8"))
    tokens.append(Token("end", "", offset))
    return tokens


# ------------------------------------------------------------------- parser


class _Parser:
    """Recursive descent parser over a token list."""

    def __init__(self, text: str, dimension: int, parameters: Mapping[str, float]):
        self.tokens = tokenize(text)
        self.pos = 0
        self.dimension = dimension
        self.parameters = parameters

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def accept(self, text: str) -> bool:
        token = self.peek()
        if token.kind == "op" and token.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            token = self.peek()
            found = token.text or "end of input"
            raise ExpressionSyntaxError(f"Expected '{text}' but found '{found}'", token.offset)

    def expr(self) -> Expression:
        node = self.term()
        while True:
            if self.accept("+"):
                node = Add(node, self.term())
            elif self.accept("-"):
                node = Sub(node, self.term())
            else:
                return node

    def term(self) -> Expression:
        node = self.unary()
        while True:
            if self.accept("*"):
                node = Mul(node, self.unary())
            elif self.accept("/"):
                node = Div(node, self.unary())
            else:
                return node

    def unary(self) -> Expression:
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.accept("^"):
            return Pow(base, self.unary())
        return base

    def atom(self) -> Expression:
        token = self.advance()
        if token.kind == "num":
            return Num(float(token.text))
        if token.kind == "ident":
            return self.identifier(token)
        if token.kind == "op" and token.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = token.text or "end of input"
        raise ExpressionSyntaxError(f"Unexpected '{found}'", token.offset)

    def identifier(self, token: Token) -> Expression:
        name = token.text
        if name in FUNCTIONS:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Call(name, arg)
        if name[0] == "x" and name[1:].isdigit():
            index = int(name[1:])
            if index >= self.dimension:
                raise VariableIndexError(
                    f"Variable index {index} out of range for dimension {self.dimension}"
                )
            return Var(index)
        if name in self.parameters:
            return Param(name, float(self.parameters[name]))
        if name in CONSTANTS:
            return Param(name, CONSTANTS[name])
        raise UnknownIdentifierError(f"Unknown identifier '{name}' at offset {token.offset}")

    def finish(self, node: Expression) -> Expression:
        token = self.peek()
        if token.kind != "end":
            raise ExpressionSyntaxError(f"Unexpected '{token.text}'", token.offset)
        return node


def parse(text: str, dimension: int, parameters: Optional[Mapping[str, float]] = None) -> Expression:
    """Parse expression text over the coordinates x0..x(dimension-1).

    Raises:
        ExpressionSyntaxError: Malformed text (carries the byte offset)
        UnknownIdentifierError: Name that is neither a function, a variable,
            a parameter nor a constant
        VariableIndexError: Variable index >= dimension
    """
    if not text or not text.strip():
        raise ExpressionSyntaxError("Empty expression", 0)
    parser = _Parser(text, dimension, parameters or {})
    return parser.finish(parser.expr())


def eval_jet2(e: Expression, x: Sequence[float]) -> Jet2:
    """Value, gradient and Hessian of e at x, exact to roundoff.

    Raises:
        ExpressionDomainError: x outside the real domain of e
    """
    return e.jet(np.asarray(x, dtype=float))


def evaluate(e: Expression, x: Sequence[float]) -> float:
    return e.value(x)


class Inequality:
    """A strict or non-strict comparison between two expressions."""

    _TESTS = {
        ">": lambda a, b: a > b,
        ">=": lambda a, b: a >= b,
        "<": lambda a, b: a < b,
        "<=": lambda a, b: a <= b,
    }

    def __init__(self, left: Expression, op: str, right: Expression):
        self.left = left
        self.op = op
        self.right = right

    def holds(self, x: Sequence[float]) -> bool:
        try:
            return self._TESTS[self.op](self.left.value(x), self.right.value(x))
        except ExpressionDomainError:
            return False

    def to_text(self) -> str:
        return f"{self.left.to_text()} {self.op} {self.right.to_text()}"

    def __str__(self) -> str:
        return self.to_text()


def parse_inequality(
    text: str, dimension: int, parameters: Optional[Mapping[str, float]] = None
) -> Inequality:
    """Parse 'lhs OP rhs' with OP one of >, >=, <, <=."""
    comparisons = [t for t in tokenize(text) if t.kind == "cmp"]
    if len(comparisons) != 1:
        offset = comparisons[1].offset if comparisons else 0
        raise ExpressionSyntaxError("Expected exactly one comparison operator", offset)
    cmp = comparisons[0]
    # offsets are bytes; slice on the encoded form
    raw = text.encode("utf-8")
    lhs = raw[: cmp.offset].decode("utf-8")
    rhs = raw[cmp.offset + len(cmp.text) :].decode("utf-8")
    logger.debug(f"Parsed inequality '{lhs.strip()}' {cmp.text} '{rhs.strip()}'")
    return Inequality(parse(lhs, dimension, parameters), cmp.text, parse(rhs, dimension, parameters))
