"""A small expression language for config-defined coefficient entries.

Grammar (precedence low to high, ``^`` is right associative)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | 't' | 'z' | 'pi' | 'e'
             | 'x' '[' INT ']' '(' expr ')'      segment probe, 1-based component
             | NAME '(' expr (',' expr)* ')'     min max abs exp log sqrt clip
             | '(' expr ')'

The argument of a probe ``x[i](theta)`` must be a constant expression with
``-r0 <= theta <= 0``; it is folded at parse time.

Each expression defines one scalar entry. Evaluation broadcasts over the
probe's batch shape.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from ..errors import ExprSyntaxError, ThetaOutOfRange, UnknownSymbol


# -- AST ----------------------------------------------------------------------
@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "t" or "z"


@dataclass(frozen=True)
class Probe:
    index: int  # 1-based component
    theta: float


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, Var, Probe, Neg, BinOp, Call]

FUNCTIONS: dict[str, tuple[int, int | None, Callable]] = {
    "min": (2, None, lambda *a: _reduce(np.minimum, a)),
    "max": (2, None, lambda *a: _reduce(np.maximum, a)),
    "abs": (1, 1, np.abs),
    "exp": (1, 1, np.exp),
    "log": (1, 1, np.log),
    "sqrt": (1, 1, np.sqrt),
    "clip": (3, 3, np.clip),
}
CONSTANTS = {"pi": math.pi, "e": math.e}
_BINARY = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide, "^": np.power}


def _reduce(f, args):
    out = args[0]
    for a in args[1:]:
        out = f(out, a)
    return out


@dataclass(frozen=True)
class Context:
    d: int = 1
    r0: float = 0.0
    allow_mark: bool = False


@dataclass(frozen=True)
class CoefficientExpr:
    """A parsed expression together with the context it was checked against."""

    ast: Node
    context: Context
    text: str = ""

    def __str__(self) -> str:
        return to_text(self.ast)

    def compile(self) -> Callable:
        return compile_ast(self.ast)


# -- tokenizer ----------------------------------------------------------------
_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),\[\]]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        mt = _TOKEN.match(text, pos)
        if mt is None or mt.end() == pos:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = mt.lastgroup
        tokens.append((kind, mt.group(kind), mt.start(kind)))
        pos = mt.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, ctx: Context):
        self.text = text
        self.ctx = ctx
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, v, pos = self.tok
        if v != value or kind == "end":
            what = "end of input" if kind == "end" else repr(v)
            raise ExprSyntaxError(f"expected {value!r}, found {what}", pos)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, v, pos = self.tok
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {v!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        if self.tok[0] == "op" and self.tok[1] == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        node = self.primary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            node = BinOp("^", node, self.unary())
        return node

    def primary(self) -> Node:
        kind, v, pos = self.tok
        if kind == "num":
            self.advance()
            return Num(float(v))
        if kind == "op" and v == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            self.advance()
            if v == "x":
                return self.probe(pos)
            if v in FUNCTIONS:
                return self.call(v, pos)
            if v == "t":
                return Var("t")
            if v == "z":
                if not self.ctx.allow_mark:
                    raise UnknownSymbol(f"mark symbol 'z' is only allowed in jump coefficients (position {pos})")
                return Var("z")
            if v in CONSTANTS:
                return Num(CONSTANTS[v])
            raise UnknownSymbol(f"unknown symbol {v!r} at position {pos}")
        what = "end of input" if kind == "end" else repr(v)
        raise ExprSyntaxError(f"unexpected {what}", pos)

    def probe(self, pos: int) -> Node:
        self.expect("[")
        kind, v, ipos = self.tok
        if kind != "num" or not v.isdigit():
            raise ExprSyntaxError("expected an integer component index", ipos)
        self.advance()
        index = int(v)
        if not 1 <= index <= self.ctx.d:
            raise UnknownSymbol(f"component x[{index}] does not exist for d={self.ctx.d}")
        self.expect("]")
        self.expect("(")
        tpos = self.tok[2]
        arg = self.expr()
        self.expect(")")
        if _has_free(arg):
            raise ExprSyntaxError("probe argument must be a constant", tpos)
        theta = float(compile_ast(arg)(0.0, None, 0.0))
        tol = 1e-12 * max(1.0, self.ctx.r0)
        if not (-self.ctx.r0 - tol <= theta <= tol):
            raise ThetaOutOfRange(f"theta={theta} outside [-{self.ctx.r0}, 0]")
        return Probe(index, min(max(theta, -self.ctx.r0), 0.0) if theta != 0 else 0.0)

    def call(self, name: str, pos: int) -> Node:
        lo, hi, _ = FUNCTIONS[name]
        self.expect("(")
        args = [self.expr()]
        while self.tok[0] == "op" and self.tok[1] == ",":
            self.advance()
            args.append(self.expr())
        end = self.tok[2]
        self.expect(")")
        if len(args) < lo or (hi is not None and len(args) > hi):
            raise ExprSyntaxError(f"{name} takes {lo if hi == lo else f'at least {lo}'} arguments", end)
        return Call(name, tuple(args))


def _has_free(node: Node) -> bool:
    if isinstance(node, (Var, Probe)):
        return True
    if isinstance(node, Neg):
        return _has_free(node.operand)
    if isinstance(node, BinOp):
        return _has_free(node.left) or _has_free(node.right)
    if isinstance(node, Call):
        return any(_has_free(a) for a in node.args)
    return False


def parse_expr(text: str, d: int = 1, r0: float = 0.0, allow_mark: bool = False) -> CoefficientExpr:
    """Parse ``text`` into a :class:`CoefficientExpr`.

    Raises :class:`ExprSyntaxError` (with ``position``), :class:`UnknownSymbol`
    or :class:`ThetaOutOfRange`.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    ctx = Context(d, float(r0), allow_mark)
    return CoefficientExpr(_Parser(text, ctx).parse(), ctx, text)


# -- printer ------------------------------------------------------------------
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def to_text(node: Node) -> str:
    """Print an AST so that parsing the text gives back an equal AST."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Probe):
        return f"x[{node.index}]({node.theta!r})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_text(a) for a in node.args)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        return f"-({inner})" if _prec(node.operand) < 3 else f"-{inner}"
    p = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        if _prec(node.left) <= 4:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


# -- evaluation ---------------------------------------------------------------
def compile_ast(node: Node) -> Callable:
    """Turn an AST into ``f(t, x, z) -> array`` (scalar or probe batch shape).

    ``x`` may provide a ``_cache`` dict keyed by theta; see :func:`entry_evaluator`.
    """
    if isinstance(node, Num):
        v = node.value
        return lambda t, x, z: v
    if isinstance(node, Var):
        if node.name == "t":
            return lambda t, x, z: t
        return lambda t, x, z: z
    if isinstance(node, Probe):
        i, theta = node.index - 1, node.theta

        def probe(t, x, z):
            return x(theta)[..., i]

        return probe
    if isinstance(node, Neg):
        f = compile_ast(node.operand)
        return lambda t, x, z: np.negative(f(t, x, z))
    if isinstance(node, BinOp):
        op = _BINARY[node.op]
        fl, fr = compile_ast(node.left), compile_ast(node.right)
        return lambda t, x, z: op(fl(t, x, z), fr(t, x, z))
    if isinstance(node, Call):
        fn = FUNCTIONS[node.name][2]
        fs = [compile_ast(a) for a in node.args]
        return lambda t, x, z: fn(*(f(t, x, z) for f in fs))
    raise TypeError(f"not an AST node: {node!r}")


class _CachedProbe:
    """Memoises ``x(theta)`` across the entries of one coefficient evaluation."""

    __slots__ = ("x", "cache")

    def __init__(self, x):
        self.x = x
        self.cache: dict = {}

    @property
    def batch_shape(self):
        return self.x.batch_shape

    def __call__(self, theta):
        v = self.cache.get(theta)
        if v is None:
            v = self.cache[theta] = np.asarray(self.x(theta), dtype=float)
        return v


def entry_evaluator(exprs, shape: tuple[int, ...]) -> Callable:
    """Stack compiled scalar entries into an array-valued coefficient.

    ``exprs`` is a nested list of :class:`CoefficientExpr` with outer shape
    ``shape`` (``(d,)`` or ``(d, m)``); the result maps ``(t, x, z)`` to
    ``x.batch_shape + shape``.
    """
    flat = list(np.asarray(exprs, dtype=object).reshape(-1))
    if len(flat) != int(np.prod(shape)):
        raise ValueError(f"expected {int(np.prod(shape))} entries for shape {shape}, got {len(flat)}")
    funcs = [e.compile() for e in flat]

    def evaluate(t, x, z=0.0):
        px = _CachedProbe(x)
        bshape = x.batch_shape
        out = np.empty(bshape + (len(funcs),))
        with np.errstate(all="ignore"):
            for k, f in enumerate(funcs):
                out[..., k] = f(t, px, z)
        return out.reshape(bshape + shape)

    return evaluate
