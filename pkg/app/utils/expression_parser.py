"""
Small arithmetic expression language used by custom projections and planar maps.

Grammar (usual precedence, power is right associative):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom (('^' | '**') unary)?
    atom   := NUMBER | CONSTANT | VARIABLE | FUNCTION '(' expr ')' | '(' expr ')'

Expressions are built as sympy trees so they can be differentiated exactly and
printed back in a canonical form that re-parses to the same tree.
"""

import re
from functools import lru_cache
from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple

import numpy as np
import sympy
from sympy.printing.str import StrPrinter

from app.core.errors import ExpressionParseError, OutOfDomainError

FUNCTIONS: Dict[str, Callable] = {
    "sin": sympy.sin,
    "cos": sympy.cos,
    "tan": sympy.tan,
    "asin": sympy.asin,
    "acos": sympy.acos,
    "atan": sympy.atan,
    "ln": sympy.log,
    "log": sympy.log,
    "sqrt": sympy.sqrt,
    "exp": sympy.exp,
}

CONSTANTS = {
    "pi": sympy.pi,
    "e": sympy.E,
}

_TOKEN_RE = re.compile(
    r"""
    (?P<NUMBER>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
    |(?P<NAME>[A-Za-z_][A-Za-z_0-9]*)
    |(?P<POW>\*\*|\^)
    |(?P<OP>[-+*/()])
    |(?P<SKIP>\s+)
    |(?P<MISMATCH>.)
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str
    text: str
    position: int


def tokenize(text: str, offset: int = 0) -> List[Token]:
    tokens = []
    for match in _TOKEN_RE.finditer(text):
        kind = match.lastgroup
        if kind == "SKIP":
            continue
        if kind == "MISMATCH":
            raise ExpressionParseError(f"Unexpected character {match.group()!r}", offset + match.start(), text)
        tokens.append(Token(kind, match.group(), offset + match.start()))
    tokens.append(Token("END", "", offset + len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str], offset: int):
        self.text = text
        self.symbols = {name: sympy.Symbol(name, real=True) for name in variables}
        self.tokens = tokenize(text, offset)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def error(self, message: str, token: Token = None):
        token = token or self.current
        raise ExpressionParseError(message, token.position, self.text)

    def expect(self, text: str) -> Token:
        if self.current.text != text:
            found = "end of input" if self.current.kind == "END" else repr(self.current.text)
            self.error(f"Expected {text!r}, found {found}")
        return self.advance()

    def parse(self):
        if self.current.kind == "END":
            self.error("Empty expression")
        expr = self.expr()
        if self.current.kind != "END":
            self.error(f"Unexpected token {self.current.text!r}")
        return expr

    def expr(self):
        value = self.term()
        while self.current.kind == "OP" and self.current.text in "+-":
            operator = self.advance().text
            rhs = self.term()
            value = value + rhs if operator == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.current.kind == "OP" and self.current.text in "*/":
            operator = self.advance().text
            rhs = self.unary()
            value = value * rhs if operator == "*" else value / rhs
        return value

    def unary(self):
        if self.current.kind == "OP" and self.current.text in "+-":
            operator = self.advance().text
            operand = self.unary()
            return -operand if operator == "-" else operand
        return self.power()

    def power(self):
        base = self.atom()
        if self.current.kind == "POW":
            self.advance()
            return base ** self.unary()
        return base

    def atom(self):
        token = self.current

        if token.kind == "NUMBER":
            self.advance()
            if re.fullmatch(r"\d+", token.text):
                return sympy.Integer(int(token.text))
            return sympy.Float(float(token.text))

        if token.kind == "NAME":
            self.advance()
            name = token.text
            if self.current.text == "(":
                if name not in FUNCTIONS:
                    self.error(f"Unknown function {name!r}", token)
                self.advance()
                argument = self.expr()
                self.expect(")")
                return FUNCTIONS[name](argument)
            if name in self.symbols:
                return self.symbols[name]
            if name in CONSTANTS:
                return CONSTANTS[name]
            self.error(f"Unknown identifier {name!r}", token)

        if token.text == "(":
            self.advance()
            value = self.expr()
            self.expect(")")
            return value

        if token.kind == "END":
            self.error("Unexpected end of input")
        self.error(f"Unexpected token {token.text!r}")


def parse_expression(text: str, variables: Sequence[str], offset: int = 0):
    """Parse text into a sympy expression over the given variable names."""
    expr = _Parser(text, variables, offset).parse()
    if expr.has(sympy.zoo, sympy.nan, sympy.oo, -sympy.oo):
        raise ExpressionParseError("Expression is undefined everywhere", offset, text)
    return expr


def parse_assignments(
    text: str,
    targets: Sequence[str],
    variables: Sequence[str],
) -> Dict[str, sympy.Expr]:
    """Parse 'x = ...; y = ...' (';' or newline separated) into one tree per target."""
    results: Dict[str, sympy.Expr] = {}

    for match in re.finditer(r"[^;\n]+", text):
        statement = match.group()
        if not statement.strip():
            continue

        start = match.start()
        if "=" not in statement:
            raise ExpressionParseError("Expected 'name = expression'", start + len(statement) - len(statement.lstrip()), text)

        name_part, expr_part = statement.split("=", 1)
        name = name_part.strip()
        name_offset = start + len(name_part) - len(name_part.lstrip())
        if name not in targets:
            raise ExpressionParseError(
                f"Unknown assignment target {name!r}; expected one of {', '.join(targets)}", name_offset, text
            )
        if name in results:
            raise ExpressionParseError(f"Duplicate assignment to {name!r}", name_offset, text)

        expr_offset = start + len(name_part) + 1
        results[name] = parse_expression(expr_part, variables, offset=expr_offset)

    missing = [name for name in targets if name not in results]
    if missing:
        raise ExpressionParseError(f"Missing assignment for {', '.join(missing)}", len(text), text)
    return results


class ExpressionPrinter(StrPrinter):
    """Prints trees in the expression language itself, with exact float literals."""

    def _print_Float(self, expr):
        return repr(float(expr))

    def _print_log(self, expr):
        return "ln(%s)" % self._print(expr.args[0])

    def _print_Exp1(self, expr):
        return "e"


def format_expression(expr) -> str:
    return ExpressionPrinter().doprint(expr)


class CompiledExpression:
    """Numeric value and exact partial derivatives of one parsed expression."""

    def __init__(self, expr, variables: Tuple[str, ...]):
        self.expr = expr
        self.variables = variables
        symbols = [sympy.Symbol(name, real=True) for name in variables]
        self.text = format_expression(expr)
        self._value = sympy.lambdify(symbols, expr, modules="numpy")
        self._partials = [sympy.lambdify(symbols, sympy.diff(expr, symbol), modules="numpy") for symbol in symbols]

    def _call(self, function, args: Sequence[float]) -> float:
        with np.errstate(all="ignore"):
            value = function(*args)
        value = complex(value) if isinstance(value, complex) else value
        if isinstance(value, complex) or not np.isfinite(value):
            bound = ", ".join(f"{name}={arg!r}" for name, arg in zip(self.variables, args))
            raise OutOfDomainError(f"Expression '{self.text}' is undefined at {bound}")
        return float(value)

    def value(self, *args: float) -> float:
        return self._call(self._value, args)

    def partial(self, index: int, *args: float) -> float:
        return self._call(self._partials[index], args)


@lru_cache(maxsize=256)
def compile_expression(text: str, variables: Tuple[str, ...]) -> CompiledExpression:
    return CompiledExpression(parse_expression(text, variables), variables)
