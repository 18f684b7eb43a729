"""Expression DSL for scalar fields over chart coordinates.

Metric entries, distribution components and conformal factors are all plain
text expressions in the chart coordinates, parsed once into an immutable AST
and evaluated at points as :class:`~tensionlab.jets.Jet2` values.

Grammar (see README for the full EBNF)::

    expr    := product (("+" | "-") product)*
    product := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?          # right associative
    atom    := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.  There is
no implicit multiplication.  The callable function set is fixed: exp, log,
sin, cos, sqrt (one argument) and pow (two arguments).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .jets import Jet2, JetDomainError, constant, jcos, jexp, jlog, jpow, jsin, jsqrt, seed

__all__ = [
    "Ast",
    "ScalarField",
    "ExprSyntaxError",
    "EvalDomainError",
    "parse",
    "evaluate",
    "to_source",
]

FUNCTIONS = {"exp": 1, "log": 1, "sin": 1, "cos": 1, "sqrt": 1, "pow": 2}

DEFAULT_COORDINATES = ("x", "y", "z", "w")


class ExprSyntaxError(ValueError):
    """Parse-time error with a character position into the source."""

    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} (at position {pos})")


class EvalDomainError(ArithmeticError):
    """A jet domain error, annotated with the subexpression that caused it."""

    def __init__(self, cause: JetDomainError, snippet: str, span: tuple[int, int]):
        self.cause = cause
        self.snippet = snippet
        self.span = span
        super().__init__(f"{cause} in {snippet!r}")


@dataclass(frozen=True)
class Ast:
    """Expression node.  kind is one of num, var, neg, bin, call.

    ``name`` holds the variable name, operator symbol or function name;
    ``args`` the children; ``span`` the source character range.
    """

    kind: str
    span: tuple[int, int]
    value: float = 0.0
    name: str = ""
    args: tuple["Ast", ...] = ()


@dataclass(frozen=True)
class ScalarField:
    """A parsed expression together with its coordinate declaration."""

    source: str
    ast: Ast
    coordinates: tuple[str, ...]

    def evaluate(self, x) -> Jet2:
        return evaluate(self, x)

    def value(self, x) -> float:
        return evaluate(self, x).value


# -- tokenizer --------------------------------------------------------------

_OPERATORS = set("+-*/^(),")


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPERATORS:
            tokens.append(("op", c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            start = i
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == ".":
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            if i < n and source[i] in "eE":
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j < n and source[j].isdigit():
                    i = j
                    while i < n and source[i].isdigit():
                        i += 1
            tokens.append(("num", source[start:i], start))
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            tokens.append(("ident", source[start:i], start))
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


# -- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, source: str, coordinates: tuple[str, ...]):
        self.source = source
        self.coordinates = coordinates
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, value, pos = self.peek()
        if kind == "op" and value == text:
            return self.advance()
        shown = value or "end of input"
        raise ExprSyntaxError(f"expected {text!r}, found {shown!r}", pos)

    def parse(self) -> Ast:
        node = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {value!r}", pos)
        return node

    def expr(self) -> Ast:
        node = self.product()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            _, op, _ = self.advance()
            rhs = self.product()
            node = Ast("bin", (node.span[0], rhs.span[1]), name=op, args=(node, rhs))
        return node

    def product(self) -> Ast:
        node = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            _, op, _ = self.advance()
            rhs = self.unary()
            node = Ast("bin", (node.span[0], rhs.span[1]), name=op, args=(node, rhs))
        return node

    def unary(self) -> Ast:
        kind, value, pos = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            operand = self.unary()
            return Ast("neg", (pos, operand.span[1]), args=(operand,))
        return self.power()

    def power(self) -> Ast:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.advance()
            exponent = self.unary()
            return Ast("bin", (base.span[0], exponent.span[1]), name="^", args=(base, exponent))
        return base

    def atom(self) -> Ast:
        kind, value, pos = self.advance()
        if kind == "num":
            return Ast("num", (pos, pos + len(value)), value=float(value))
        if kind == "ident":
            if self.peek()[:2] == ("op", "("):
                if value not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {value!r}", pos)
                self.advance()
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.advance()
                    args.append(self.expr())
                closing = self.expect(")")
                if len(args) != FUNCTIONS[value]:
                    raise ExprSyntaxError(
                        f"{value} takes {FUNCTIONS[value]} argument(s), got {len(args)}", pos
                    )
                return Ast("call", (pos, closing[2] + 1), name=value, args=tuple(args))
            if value in self.coordinates:
                return Ast("var", (pos, pos + len(value)), name=value)
            raise ExprSyntaxError(f"unknown identifier {value!r}", pos)
        if kind == "op" and value == "(":
            node = self.expr()
            closing = self.expect(")")
            return Ast(
                node.kind, (pos, closing[2] + 1), value=node.value, name=node.name, args=node.args
            )
        shown = value or "end of input"
        raise ExprSyntaxError(f"unexpected token {shown!r}", pos)


def parse(source: str, coordinates=DEFAULT_COORDINATES) -> ScalarField:
    """Parse an expression over the given coordinate names."""
    coordinates = tuple(coordinates)
    ast = _Parser(source, coordinates).parse()
    return ScalarField(source, ast, coordinates)


# -- evaluation ---------------------------------------------------------------

_BIN_FUNCS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
    "^": jpow,
}

_CALL_FUNCS = {"exp": jexp, "log": jlog, "sin": jsin, "cos": jcos, "sqrt": jsqrt}


def evaluate(f: ScalarField, x) -> Jet2:
    """Evaluate the field at a chart point, returning a full second-order jet
    with derivatives in all declared coordinates."""
    n = len(f.coordinates)
    env = {name: seed(x, i) for i, name in enumerate(f.coordinates)}
    return _eval(f.ast, env, n, f.source)


def _eval(node: Ast, env: dict, n: int, source: str) -> Jet2:
    try:
        if node.kind == "num":
            return constant(node.value, n)
        if node.kind == "var":
            return env[node.name]
        if node.kind == "neg":
            return -_eval(node.args[0], env, n, source)
        if node.kind == "bin":
            a = _eval(node.args[0], env, n, source)
            b = _eval(node.args[1], env, n, source)
            return _BIN_FUNCS[node.name](a, b)
        if node.kind == "call":
            if node.name == "pow":
                a = _eval(node.args[0], env, n, source)
                b = _eval(node.args[1], env, n, source)
                return jpow(a, b)
            a = _eval(node.args[0], env, n, source)
            return _CALL_FUNCS[node.name](a)
    except JetDomainError as err:
        snippet = source[node.span[0] : node.span[1]]
        raise EvalDomainError(err, snippet, node.span) from err
    raise AssertionError(f"bad node kind {node.kind!r}")


def to_source(node: Ast) -> str:
    """Print an AST back to parseable text (fully parenthesized)."""
    if node.kind == "num":
        return repr(node.value)
    if node.kind == "var":
        return node.name
    if node.kind == "neg":
        return f"(-{to_source(node.args[0])})"
    if node.kind == "bin":
        return f"({to_source(node.args[0])}{node.name}{to_source(node.args[1])})"
    if node.kind == "call":
        return f"{node.name}({','.join(to_source(a) for a in node.args)})"
    raise AssertionError(f"bad node kind {node.kind!r}")
