"""Minimal arithmetic expression language for defining nonlinear systems.

Expressions are written over the variables ``x1..xn``, ``y1..ym`` and
``eps``, the unary functions ``sin``, ``cos``, ``exp``, ``tanh``, ``neg``
and the operators ``+ - * / ^`` (power restricted to non-negative integer
literal exponents so that differentiation stays closed-form).  Parsing is
single-token-lookahead recursive descent; every node remembers its byte
offset in the source so errors can point at it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ExprSyntaxError, IndexOutOfRange, NonFinite, UnknownIdentifier

__all__ = [
    "ExprAst", "Const", "Var", "Call", "BinOp", "Pow", "EvalEnv",
    "parse", "evaluate", "differentiate", "to_source",
]

_FUNCTIONS = ("sin", "cos", "exp", "tanh", "neg")


@dataclass(frozen=True)
class ExprAst:
    # source position, for error reporting only; ignored by equality so
    # that reparsing pretty-printed output compares structurally identical
    offset: int = field(compare=False)


@dataclass(frozen=True)
class Const(ExprAst):
    value: float


@dataclass(frozen=True)
class Var(ExprAst):
    kind: str          # "x", "y" or "eps"
    index: int         # 0-based; unused for eps


@dataclass(frozen=True)
class Call(ExprAst):
    fn: str
    arg: ExprAst


@dataclass(frozen=True)
class BinOp(ExprAst):
    op: str            # "+", "-", "*", "/"
    left: ExprAst
    right: ExprAst


@dataclass(frozen=True)
class Pow(ExprAst):
    base: ExprAst
    exponent: int      # non-negative integer literal


@dataclass(frozen=True)
class EvalEnv:
    """Point at which an expression is evaluated."""
    x: tuple
    y: tuple
    eps: float

    @classmethod
    def of(cls, x, y, eps):
        return cls(tuple(float(v) for v in x), tuple(float(v) for v in y), float(eps))


# --- tokenizer --------------------------------------------------------------

_OPS = set("+-*/^(),")


def _tokenize(source: str):
    """Yield (kind, text, offset) triples; kind in {num, ident, op, end}."""
    tokens = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPS:
            tokens.append(("op", c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                float(text)
            except ValueError:
                raise ExprSyntaxError(i, "a number") from None
            tokens.append(("num", text, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(("ident", source[i:j], i))
            i = j
            continue
        raise ExprSyntaxError(i, f"a token (found {c!r})")
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens, n: int, m: int):
        self.tokens = tokens
        self.pos = 0
        self.n = n
        self.m = m

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ExprSyntaxError(off, f"'{op}'")
        return self.advance()

    # grammar, low to high precedence:
    #   additive -> multiplicative (('+'|'-') multiplicative)*
    #   multiplicative -> unary (('*'|'/') unary)*
    #   unary -> '-' unary | power
    #   power -> atom ('^' non-negative-int)?
    #   atom -> number | variable | fn '(' additive ')' | '(' additive ')'

    def additive(self) -> ExprAst:
        node = self.multiplicative()
        while True:
            kind, text, off = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(node.offset, text, node, self.multiplicative())
            else:
                return node

    def multiplicative(self) -> ExprAst:
        node = self.unary()
        while True:
            kind, text, off = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(node.offset, text, node, self.unary())
            else:
                return node

    def unary(self) -> ExprAst:
        kind, text, off = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Call(off, "neg", self.unary())
        return self.power()

    def power(self) -> ExprAst:
        base = self.atom()
        kind, text, off = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            kind, text, off = self.peek()
            if kind != "num" or not text.isdigit():
                raise ExprSyntaxError(off, "a non-negative integer exponent")
            self.advance()
            return Pow(base.offset, base, int(text))
        return base

    def atom(self) -> ExprAst:
        kind, text, off = self.advance()
        if kind == "num":
            return Const(off, float(text))
        if kind == "ident":
            return self._identifier(text, off)
        if kind == "op" and text == "(":
            node = self.additive()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(off, "a number, variable, function call or '('")

    def _identifier(self, name: str, off: int) -> ExprAst:
        if name in _FUNCTIONS:
            self.expect_op("(")
            arg = self.additive()
            self.expect_op(")")
            return Call(off, name, arg)
        if name == "eps":
            return Var(off, "eps", 0)
        if name[0] in "xy" and name[1:].isdigit():
            index = int(name[1:])
            limit = self.n if name[0] == "x" else self.m
            if not 1 <= index <= limit:
                raise IndexOutOfRange(name, off, limit)
            return Var(off, name[0], index - 1)
        raise UnknownIdentifier(name, off)


def parse(source: str, n: int, m: int) -> ExprAst:
    """Parse ``source`` into an AST over x1..xn, y1..ym, eps."""
    if not source or not source.strip():
        raise ExprSyntaxError(0, "a non-empty expression")
    parser = _Parser(_tokenize(source), n, m)
    node = parser.additive()
    kind, text, off = parser.peek()
    if kind != "end":
        raise ExprSyntaxError(off, "end of input")
    return node


# --- evaluation -------------------------------------------------------------

def _check_finite(value: float, offset: int) -> float:
    if not math.isfinite(value):
        raise NonFinite(offset)
    return value


def evaluate(ast: ExprAst, env: EvalEnv) -> float:
    """IEEE-double evaluation; raises NonFinite at the first offending node."""
    if isinstance(ast, Const):
        return ast.value
    if isinstance(ast, Var):
        if ast.kind == "eps":
            return env.eps
        return (env.x if ast.kind == "x" else env.y)[ast.index]
    if isinstance(ast, Call):
        a = evaluate(ast.arg, env)
        if ast.fn == "neg":
            return -a
        try:
            return _check_finite(getattr(math, ast.fn)(a), ast.offset)
        except (OverflowError, ValueError):
            raise NonFinite(ast.offset) from None
    if isinstance(ast, Pow):
        try:
            return _check_finite(evaluate(ast.base, env) ** ast.exponent, ast.offset)
        except OverflowError:
            raise NonFinite(ast.offset) from None
    assert isinstance(ast, BinOp)
    a = evaluate(ast.left, env)
    b = evaluate(ast.right, env)
    if ast.op == "+":
        out = a + b
    elif ast.op == "-":
        out = a - b
    elif ast.op == "*":
        out = a * b
    else:
        if b == 0.0:
            out = math.nan if a == 0.0 else math.inf * math.copysign(1.0, a) * math.copysign(1.0, b)
        else:
            out = a / b
    return _check_finite(out, ast.offset)


# --- differentiation --------------------------------------------------------

def _const(value: float) -> Const:
    return Const(-1, float(value))


def _is_const(node: ExprAst, value=None) -> bool:
    return isinstance(node, Const) and (value is None or node.value == value)


def _add(a: ExprAst, b: ExprAst) -> ExprAst:
    if _is_const(a) and _is_const(b):
        return _const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return BinOp(a.offset, "+", a, b)


def _sub(a: ExprAst, b: ExprAst) -> ExprAst:
    if _is_const(a) and _is_const(b):
        return _const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return _neg(b)
    return BinOp(a.offset, "-", a, b)


def _mul(a: ExprAst, b: ExprAst) -> ExprAst:
    if _is_const(a) and _is_const(b):
        return _const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return BinOp(a.offset, "*", a, b)


def _div(a: ExprAst, b: ExprAst) -> ExprAst:
    if _is_const(a, 0.0):
        return _const(0.0)
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        return _const(a.value / b.value)
    return BinOp(a.offset, "/", a, b)


def _neg(a: ExprAst) -> ExprAst:
    if _is_const(a):
        return _const(-a.value)
    return Call(a.offset, "neg", a)


def _pow(base: ExprAst, k: int) -> ExprAst:
    if k == 0:
        return _const(1.0)
    if k == 1:
        return base
    if _is_const(base):
        return _const(base.value ** k)
    return Pow(base.offset, base, k)


def differentiate(ast: ExprAst, kind: str, index: int = 0) -> ExprAst:
    """Exact symbolic derivative of ``ast`` with respect to one variable.

    ``kind`` is "x", "y" or "eps"; ``index`` is 0-based.  Simplification is
    limited to constant folding and 0/1 elimination.
    """
    if isinstance(ast, Const):
        return _const(0.0)
    if isinstance(ast, Var):
        hit = ast.kind == kind and (kind == "eps" or ast.index == index)
        return _const(1.0 if hit else 0.0)
    if isinstance(ast, Pow):
        du = differentiate(ast.base, kind, index)
        return _mul(_mul(_const(ast.exponent), _pow(ast.base, ast.exponent - 1)), du)
    if isinstance(ast, Call):
        du = differentiate(ast.arg, kind, index)
        if ast.fn == "neg":
            return _neg(du)
        if ast.fn == "sin":
            return _mul(Call(ast.offset, "cos", ast.arg), du)
        if ast.fn == "cos":
            return _neg(_mul(Call(ast.offset, "sin", ast.arg), du))
        if ast.fn == "exp":
            return _mul(Call(ast.offset, "exp", ast.arg), du)
        # tanh' = 1 - tanh^2
        t = Call(ast.offset, "tanh", ast.arg)
        return _mul(_sub(_const(1.0), _pow(t, 2)), du)
    assert isinstance(ast, BinOp)
    da = differentiate(ast.left, kind, index)
    db = differentiate(ast.right, kind, index)
    if ast.op == "+":
        return _add(da, db)
    if ast.op == "-":
        return _sub(da, db)
    if ast.op == "*":
        return _add(_mul(da, ast.right), _mul(ast.left, db))
    # quotient rule
    num = _sub(_mul(da, ast.right), _mul(ast.left, db))
    return _div(num, _pow(ast.right, 2))


# --- pretty printer ---------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "pow": 4, "atom": 5}


def _render(node: ExprAst) -> tuple[str, int]:
    if isinstance(node, Const):
        if node.value < 0:
            return f"-{_fmt(-node.value)}", _PREC["neg"]
        return _fmt(node.value), _PREC["atom"]
    if isinstance(node, Var):
        if node.kind == "eps":
            return "eps", _PREC["atom"]
        return f"{node.kind}{node.index + 1}", _PREC["atom"]
    if isinstance(node, Call):
        if node.fn == "neg":
            text, prec = _render(node.arg)
            if prec < _PREC["neg"]:
                text = f"({text})"
            return f"-{text}", _PREC["neg"]
        text, _ = _render(node.arg)
        return f"{node.fn}({text})", _PREC["atom"]
    if isinstance(node, Pow):
        text, prec = _render(node.base)
        if prec < _PREC["atom"]:
            text = f"({text})"
        return f"{text}^{node.exponent}", _PREC["pow"]
    assert isinstance(node, BinOp)
    my = _PREC[node.op]
    left, lp = _render(node.left)
    right, rp = _render(node.right)
    if lp < my:
        left = f"({left})"
    # -, / are left associative: parenthesize right side at equal precedence
    if rp < my or (rp == my and node.op in "-/"):
        right = f"({right})"
    return f"{left} {node.op} {right}", my


def _fmt(value: float) -> str:
    return repr(value) if value != int(value) else str(int(value))


def to_source(ast: ExprAst) -> str:
    """Render an AST back to parseable source text."""
    return _render(ast)[0]
