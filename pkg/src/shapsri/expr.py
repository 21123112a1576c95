"""A tiny expression language for model functions f: R^n -> R.

Grammar (lowest to highest precedence)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" exponent)*
    exponent:= "-" exponent | primary
    primary := NUMBER | "pi" | "x<k>" | FUNC "(" expr ")" | "(" expr ")"

All binary operators are left-associative, so ``2^3^2`` is ``(2^3)^2``.
Feature references are 1-based: ``x1`` is the first column.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs")

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_FEATURE = re.compile(r"x([1-9][0-9]*)")


class ModelParseError(ValueError):
    """Base class for everything that can go wrong while parsing a model."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class ExprSyntaxError(ModelParseError):
    pass


class FeatureIndexError(ModelParseError):
    pass


class UnknownIdentifierError(ModelParseError):
    pass


class ModelDomainError(ArithmeticError):
    """Raised when a node is evaluated outside its mathematical domain.

    ``row`` is the index of the first offending row in the evaluated batch
    (0 for a single point).
    """

    def __init__(self, node, reason, row=0):
        self.node = node
        self.reason = reason
        self.row = row
        super().__init__(f"{reason} in `{to_text(node)}` (row {row})")


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float
    offset: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Pi:
    offset: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Feature:
    index: int  # 1-based
    offset: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    offset: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    offset: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"
    offset: int = field(default=-1, compare=False)


Node = Union[Const, Pi, Feature, Neg, BinOp, Call]


@dataclass(frozen=True)
class ModelExpr:
    """A parsed model together with the feature count it was declared for."""

    root: Node
    n_features: int
    text: str = field(default="", compare=False)

    def __call__(self, X):
        return evaluate_batch(self, X)

    def __str__(self):
        return to_text(self.root)

    def features_used(self):
        """Return the sorted 1-based feature indices referenced by the model."""
        found = set()
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Feature):
                found.add(node.index)
            elif isinstance(node, Neg):
                stack.append(node.operand)
            elif isinstance(node, Call):
                stack.append(node.arg)
            elif isinstance(node, BinOp):
                stack.extend((node.left, node.right))
        return sorted(found)


# -- tokenizer ---------------------------------------------------------------

@dataclass
class _Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    offset: int


def _tokenize(text):
    data = text.encode("utf-8")
    tokens = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        # byte offsets differ from str indices only after non-ASCII input
        boff = len(text[:pos].encode("utf-8"))
        if ch.isspace():
            pos += 1
            continue
        if ch in "+-*/^()":
            tokens.append(_Token("op", ch, boff))
            pos += 1
            continue
        m = _NUMBER.match(text, pos)
        if m:
            tokens.append(_Token("num", m.group(), boff))
            pos = m.end()
            continue
        m = _IDENT.match(text, pos)
        if m:
            tokens.append(_Token("ident", m.group(), boff))
            pos = m.end()
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", boff)
    tokens.append(_Token("end", "", len(data)))
    return tokens


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, text, n_features):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.n_features = n_features

    @property
    def tok(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text):
        tok = self.tok
        if tok.kind != "op" or tok.text != text:
            found = tok.text or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {found!r}", tok.offset)
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected token {self.tok.text!r}", self.tok.offset)
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance()
            node = BinOp(op.text, node, self.term(), op.offset)
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance()
            node = BinOp(op.text, node, self.unary(), op.offset)
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            op = self.advance()
            return Neg(self.unary(), op.offset)
        return self.power()

    def power(self):
        node = self.primary()
        while self.tok.kind == "op" and self.tok.text == "^":
            op = self.advance()
            node = BinOp("^", node, self.exponent(), op.offset)
        return node

    def exponent(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            op = self.advance()
            return Neg(self.exponent(), op.offset)
        return self.primary()

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Const(float(tok.text), tok.offset)
        if tok.kind == "ident":
            self.advance()
            if tok.text == "pi":
                return Pi(tok.offset)
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg, tok.offset)
            m = _FEATURE.fullmatch(tok.text)
            if m:
                k = int(m.group(1))
                if k > self.n_features:
                    raise FeatureIndexError(
                        f"feature x{k} out of range for {self.n_features} feature(s)",
                        tok.offset,
                    )
                return Feature(k, tok.offset)
            raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.offset)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", tok.offset)


def parse_model(text, n_features):
    """Parse ``text`` into a :class:`ModelExpr` over ``n_features`` features.

    >>> parse_model("x1 + x2", 2).root
    BinOp(op='+', left=Feature(index=1), right=Feature(index=2))
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if int(n_features) < 1:
        raise ValueError(f"n_features must be >= 1, got {n_features}")
    root = _Parser(text, int(n_features)).parse()
    return ModelExpr(root, int(n_features), text)


# -- pretty printing ---------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_UNARY_PREC = 3
_ATOM_PREC = 5


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _UNARY_PREC
    return _ATOM_PREC


def _const_text(value):
    if value < 0 or not math.isfinite(value):
        raise ValueError(f"constant {value!r} has no literal form")
    return repr(float(value))


def to_text(node):
    """Render a node with the minimum parentheses needed to reparse it."""
    if isinstance(node, ModelExpr):
        node = node.root
    if isinstance(node, Const):
        return _const_text(node.value)
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Feature):
        return f"x{node.index}"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        if _prec(node.operand) < _UNARY_PREC:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, BinOp):
        lp, rp = _prec(node.left), _prec(node.right)
        left, right = to_text(node.left), to_text(node.right)
        if node.op == "^":
            if lp < _PREC["^"]:
                left = f"({left})"
            # exponent slot takes a primary or a chain of negations of one
            if not _is_exponent_form(node.right):
                right = f"({right})"
        else:
            own = _PREC[node.op]
            if lp < own:
                left = f"({left})"
            if rp <= own:
                right = f"({right})"
        return f"{left} {node.op} {right}" if node.op in "+-" else f"{left}{node.op}{right}"
    raise TypeError(f"not an expression node: {node!r}")


def _is_exponent_form(node):
    while isinstance(node, Neg):
        node = node.operand
    return _prec(node) == _ATOM_PREC


# -- evaluation --------------------------------------------------------------

def _first_bad(mask):
    return int(np.flatnonzero(mask)[0])


def _eval(node, X):
    if isinstance(node, Const):
        return np.full(X.shape[0], node.value)
    if isinstance(node, Pi):
        return np.full(X.shape[0], math.pi)
    if isinstance(node, Feature):
        return X[:, node.index - 1]
    if isinstance(node, Neg):
        return -_eval(node.operand, X)
    if isinstance(node, Call):
        a = _eval(node.arg, X)
        if node.func == "log":
            bad = a <= 0
            if bad.any():
                raise ModelDomainError(node, "log of non-positive value", _first_bad(bad))
            return np.log(a)
        if node.func == "sqrt":
            bad = a < 0
            if bad.any():
                raise ModelDomainError(node, "sqrt of negative value", _first_bad(bad))
            return np.sqrt(a)
        return getattr(np, node.func)(a)
    if isinstance(node, BinOp):
        a = _eval(node.left, X)
        b = _eval(node.right, X)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            bad = b == 0
            if bad.any():
                raise ModelDomainError(node, "division by zero", _first_bad(bad))
            return a / b
        with np.errstate(invalid="ignore"):
            out = np.power(a, b)
        bad = np.isnan(out) & ~np.isnan(a) & ~np.isnan(b)
        if bad.any():
            raise ModelDomainError(node, "non-real power", _first_bad(bad))
        return out
    raise TypeError(f"not an expression node: {node!r}")


def evaluate_batch(model, X):
    """Evaluate ``model`` on every row of the 2-D array ``X``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(
            f"expected an array of shape (rows, {model.n_features}), got {X.shape}"
        )
    with np.errstate(over="ignore", divide="ignore"):
        out = _eval(model.root, X)
    return np.broadcast_to(out, (X.shape[0],)).astype(float, copy=True)


def evaluate(model, point):
    """Evaluate ``model`` at a single point of length ``n_features``."""
    point = np.asarray(point, dtype=float)
    if point.shape != (model.n_features,):
        raise ValueError(
            f"point must have length {model.n_features}, got shape {point.shape}"
        )
    return float(evaluate_batch(model, point[None, :])[0])
