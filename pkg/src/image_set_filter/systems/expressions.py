"""
Expression language for model dynamics and measurements.

Grammar (lowest to highest binding):

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("+" | "-") unary | power
    power   := primary ("^" unary)?          right-associative
    primary := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

Names are state variables x1, x2, ..., noise variables w1, w2, ..., the
constant pi and the one-argument functions listed in FUNCTIONS. `log` is the
natural logarithm. Evaluation is vectorized over samples and reports domain
errors through a validity mask instead of propagating NaN.
"""

import logging
import math
import re
from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import (
    ArityError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)

logger = logging.getLogger(__name__)

VARIABLE_PATTERN = re.compile(r"^([xw])([1-9][0-9]*)$")
CONSTANTS: dict[str, float] = {"pi": math.pi}


def _positive(z: np.ndarray) -> np.ndarray:
    return z > 0.0


def _nonnegative(z: np.ndarray) -> np.ndarray:
    return z >= 0.0


def _anywhere(z: np.ndarray) -> np.ndarray:
    return np.ones(z.shape, dtype=bool)


# name -> (implementation, domain predicate, safe substitute outside the domain)
FUNCTIONS: dict[str, tuple[Callable[[np.ndarray], np.ndarray], Callable, float]] = {
    "sin": (np.sin, _anywhere, 0.0),
    "cos": (np.cos, _anywhere, 0.0),
    "tan": (np.tan, _anywhere, 0.0),
    "exp": (np.exp, _anywhere, 0.0),
    "log": (np.log, _positive, 1.0),
    "log10": (np.log10, _positive, 1.0),
    "abs": (np.abs, _anywhere, 0.0),
    "sqrt": (np.sqrt, _nonnegative, 0.0),
}


# === Tokens ===


@dataclass(frozen=True)
class Token:
    kind: str  # "number", "name", "op", "end"
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),])"
    r"|(?P<newline>\n)"
    r"|(?P<space>[ \t\r]+)"
)


def tokenize(text: str) -> list[Token]:
    """
    Split expression text into tokens with 1-based line and column.

    Raises:
        ExpressionSyntaxError: On a character outside the grammar
    """
    tokens = []
    line, line_start, position = 1, 0, 0
    while position < len(text):
        match = _TOKEN_RE.match(text, position)
        column = position - line_start + 1
        if match is None:
            raise ExpressionSyntaxError(
                f"Unexpected character {text[position]!r}", line, column
            )
        kind = match.lastgroup or ""
        if kind == "newline":
            line += 1
            line_start = match.end()
        elif kind != "space":
            tokens.append(Token(kind, match.group(), line, column))
        position = match.end()
    tokens.append(Token("end", "", line, len(text) - line_start + 1))
    return tokens


# === AST ===


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Variable:
    kind: str  # "x" or "w"
    index: int  # 1-based

    @property
    def name(self) -> str:
        return f"{self.kind}{self.index}"


@dataclass(frozen=True)
class UnaryOp:
    op: str
    operand: "Expression"


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    function: str
    argument: "Expression"


Expression = Number | Variable | UnaryOp | BinaryOp | Call


def to_text(node: Expression) -> str:
    """Fully parenthesized text that parses back to the same tree."""
    match node:
        case Number(value):
            return repr(float(value))
        case Variable():
            return node.name
        case UnaryOp(op, operand):
            return f"({op}{to_text(operand)})"
        case BinaryOp(op, left, right):
            return f"({to_text(left)} {op} {to_text(right)})"
        case Call(function, argument):
            return f"{function}({to_text(argument)})"
    raise TypeError(f"Not an expression node: {node!r}")


def walk(node: Expression) -> Iterator[Expression]:
    """Pre-order traversal."""
    yield node
    match node:
        case UnaryOp(_, operand):
            yield from walk(operand)
        case BinaryOp(_, left, right):
            yield from walk(left)
            yield from walk(right)
        case Call(_, argument):
            yield from walk(argument)


def variables(node: Expression) -> set[Variable]:
    return {n for n in walk(node) if isinstance(n, Variable)}


# === Parser ===

_PRIMARY_START = frozenset({"number", "name", "'('", "'+'", "'-'"})


class Parser:
    """Precedence-climbing parser over a token list."""

    _BINARY = {"+": 1, "-": 1, "*": 2, "/": 2}

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def error(self, message: str, expected: frozenset[str]) -> ExpressionSyntaxError:
        token = self.current
        found = "end of input" if token.kind == "end" else repr(token.text)
        return ExpressionSyntaxError(
            f"{message}: found {found}", token.line, token.column, expected
        )

    def expect(self, text: str) -> Token:
        if self.current.kind != "op" or self.current.text != text:
            raise self.error(f"Expected '{text}'", frozenset({f"'{text}'"}))
        return self.advance()

    def parse(self) -> Expression:
        node = self.expression(1)
        if self.current.kind != "end":
            expected = frozenset({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"})
            raise self.error("Unexpected token", expected)
        return node

    def expression(self, min_precedence: int) -> Expression:
        left = self.unary()
        while True:
            token = self.current
            precedence = self._BINARY.get(token.text) if token.kind == "op" else None
            if precedence is None or precedence < min_precedence:
                return left
            self.advance()
            right = self.expression(precedence + 1)
            left = BinaryOp(token.text, left, right)

    def unary(self) -> Expression:
        token = self.current
        if token.kind == "op" and token.text in "+-":
            self.advance()
            return UnaryOp(token.text, self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.primary()
        if self.current.kind == "op" and self.current.text == "^":
            self.advance()
            return BinaryOp("^", base, self.unary())
        return base

    def primary(self) -> Expression:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Number(float(token.text))
        if token.kind == "op" and token.text == "(":
            self.advance()
            node = self.expression(1)
            self.expect(")")
            return node
        if token.kind == "name":
            return self.name()
        raise self.error("Expected an operand", _PRIMARY_START)

    def name(self) -> Expression:
        token = self.advance()
        text = token.text
        is_call = self.current.kind == "op" and self.current.text == "("
        if text in FUNCTIONS:
            if not is_call:
                raise self.error(
                    f"Function '{text}' needs an argument", frozenset({"'('"})
                )
            self.advance()
            argument = self.expression(1)
            if self.current.kind == "op" and self.current.text == ",":
                raise ArityError(
                    f"Function '{text}' takes exactly one argument",
                    self.current.line,
                    self.current.column,
                )
            self.expect(")")
            return Call(text, argument)
        if is_call:
            raise UnknownIdentifierError(
                f"Unknown function '{text}'",
                token.line,
                token.column,
                frozenset(FUNCTIONS),
            )
        if text in CONSTANTS:
            return Number(CONSTANTS[text])
        match = VARIABLE_PATTERN.match(text)
        if match is None:
            raise UnknownIdentifierError(
                f"Unknown identifier '{text}'",
                token.line,
                token.column,
                frozenset({"x<k>", "w<k>", *CONSTANTS}),
            )
        return Variable(match.group(1), int(match.group(2)))


def parse_expression(text: str) -> Expression:
    """
    Parse expression text into an AST.

    Raises:
        ExpressionSyntaxError: On malformed input, with line, column and the
            set of tokens that would have been accepted
        UnknownIdentifierError: On an unknown variable, constant or function
        ArityError: On a function call with more than one argument
    """
    return Parser(tokenize(text)).parse()


# === Evaluation ===


@dataclass
class Evaluation:
    """Values of an expression over a batch with the samples that were valid."""

    values: np.ndarray
    valid: np.ndarray
    culprit: Expression | None = field(default=None)

    @property
    def ok(self) -> bool:
        return bool(np.all(self.valid))


def _integer_exponent(node: Expression) -> int | None:
    sign = 1
    while isinstance(node, UnaryOp):
        sign = -sign if node.op == "-" else sign
        node = node.operand
    if isinstance(node, Number) and float(node.value).is_integer():
        return sign * int(node.value)
    return None


def _repeated_power(base: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    result = np.ones_like(base)
    for _ in range(abs(k)):
        result = result * base
    if k >= 0:
        return result, np.ones(base.shape, dtype=bool)
    valid = result != 0.0
    return 1.0 / np.where(valid, result, 1.0), valid


class _Evaluator:
    def __init__(self, env: Mapping[str, np.ndarray], size: int):
        self.env = env
        self.size = size
        self.culprit: Expression | None = None

    def blame(self, node: Expression, fresh: np.ndarray) -> None:
        if self.culprit is None and np.any(fresh):
            self.culprit = node

    def run(self, node: Expression) -> tuple[np.ndarray, np.ndarray]:
        match node:
            case Number(value):
                return np.full(self.size, float(value)), np.ones(self.size, dtype=bool)
            case Variable():
                values = np.asarray(self.env[node.name], dtype=float)
                return values, np.ones(self.size, dtype=bool)
            case UnaryOp(op, operand):
                values, valid = self.run(operand)
                return (-values if op == "-" else values), valid
            case Call(function, argument):
                values, valid = self.run(argument)
                implementation, domain, substitute = FUNCTIONS[function]
                inside = domain(values)
                result = implementation(np.where(inside, values, substitute))
                ok = valid & inside & np.isfinite(result)
                self.blame(node, valid & ~ok)
                return result, ok
            case BinaryOp(op, left, right):
                return self.binary(node, op, left, right)
        raise TypeError(f"Not an expression node: {node!r}")

    def binary(
        self, node: BinaryOp, op: str, left: Expression, right: Expression
    ) -> tuple[np.ndarray, np.ndarray]:
        a, valid_a = self.run(left)
        if op == "^" and (k := _integer_exponent(right)) is not None:
            result, inside = _repeated_power(a, k)
            valid = valid_a
        else:
            b, valid_b = self.run(right)
            valid = valid_a & valid_b
            if op == "+":
                result, inside = a + b, np.ones(self.size, dtype=bool)
            elif op == "-":
                result, inside = a - b, np.ones(self.size, dtype=bool)
            elif op == "*":
                result, inside = a * b, np.ones(self.size, dtype=bool)
            elif op == "/":
                inside = b != 0.0
                result = a / np.where(inside, b, 1.0)
            else:
                inside = (a > 0.0) | ((a == 0.0) & (b > 0.0))
                result = np.power(np.where(inside, a, 1.0), b)
        ok = valid & inside & np.isfinite(result)
        self.blame(node, valid & ~ok)
        return result, ok


def evaluate(node: Expression, env: Mapping[str, np.ndarray], size: int) -> Evaluation:
    """
    Evaluate an expression for a batch of samples.

    Args:
        node: Expression tree
        env: Variable name -> (size,) array of values
        size: Batch size

    Returns:
        Evaluation whose `culprit` is the first sub-expression that left its
        domain (logarithm of a nonpositive number, division by zero, overflow)
    """
    evaluator = _Evaluator(env, size)
    with np.errstate(all="ignore"):
        values, valid = evaluator.run(node)
    values = np.where(valid, values, np.nan)
    return Evaluation(values=values, valid=valid, culprit=evaluator.culprit)
