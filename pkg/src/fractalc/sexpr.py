"""Tiny s-expression language for coefficient and solution profiles.

Expressions are written over the staircase coordinate ``s`` and named
constants, e.g. ``(- s (/ 1 (+ s c)))``.  Supported heads::

    + - * / pow exp ln sin cos tan abs

``parse`` returns nested tuples, ``compile_expr`` turns a tree into a numpy
callable, and ``diff`` differentiates symbolically with light constant folding.
"""

from __future__ import annotations

import math
from typing import Callable, Mapping, Union

import numpy as np

Expr = Union[float, str, tuple]

_UNARY = {
    "exp": np.exp,
    "ln": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "abs": np.abs,
}
_HEADS = {"+", "-", "*", "/", "pow", *_UNARY}


class SexprError(ValueError):
    pass


def _tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse(text: str) -> Expr:
    tokens = _tokenize(text)
    if not tokens:
        raise SexprError("empty expression")
    expr, pos = _read(tokens, 0)
    if pos != len(tokens):
        raise SexprError(f"trailing tokens in {text!r}")
    return expr


def _read(tokens: list[str], pos: int) -> tuple[Expr, int]:
    tok = tokens[pos]
    if tok == "(":
        pos += 1
        if pos >= len(tokens):
            raise SexprError("unbalanced '('")
        head = tokens[pos]
        if head not in _HEADS:
            raise SexprError(f"unknown operator {head!r}")
        pos += 1
        args = []
        while pos < len(tokens) and tokens[pos] != ")":
            arg, pos = _read(tokens, pos)
            args.append(arg)
        if pos >= len(tokens):
            raise SexprError("unbalanced '('")
        _check_arity(head, len(args))
        return (head, *args), pos + 1
    if tok == ")":
        raise SexprError("unexpected ')'")
    try:
        return float(tok), pos + 1
    except ValueError:
        return tok, pos + 1


def _check_arity(head: str, n: int) -> None:
    if head in _UNARY and n != 1:
        raise SexprError(f"{head} takes one argument, got {n}")
    if head in ("/", "pow") and n != 2:
        raise SexprError(f"{head} takes two arguments, got {n}")
    if head == "-" and n not in (1, 2):
        raise SexprError(f"- takes one or two arguments, got {n}")
    if head in ("+", "*") and n < 1:
        raise SexprError(f"{head} needs at least one argument")


def to_string(expr: Expr) -> str:
    if isinstance(expr, tuple):
        return "(" + " ".join([expr[0], *(to_string(a) for a in expr[1:])]) + ")"
    if isinstance(expr, float):
        return repr(int(expr)) if expr.is_integer() and abs(expr) < 1e15 else repr(expr)
    return expr


def free_symbols(expr: Expr) -> set[str]:
    if isinstance(expr, tuple):
        out: set[str] = set()
        for a in expr[1:]:
            out |= free_symbols(a)
        return out
    if isinstance(expr, str):
        return {expr}
    return set()


def substitute(expr: Expr, env: Mapping[str, float]) -> Expr:
    """Replace named constants by numbers (``s`` and ``w`` are left alone)."""
    if isinstance(expr, tuple):
        return (expr[0], *(substitute(a, env) for a in expr[1:]))
    if isinstance(expr, str) and expr in env:
        return float(env[expr])
    return expr


def compile_expr(expr: Expr, var: str = "s", env: Mapping[str, float] | None = None) -> Callable:
    env = dict(env or {})
    missing = free_symbols(expr) - {var} - set(env)
    if missing:
        raise SexprError(f"unbound symbols {sorted(missing)}")
    tree = substitute(expr, env)

    def build(node: Expr) -> Callable:
        if isinstance(node, float):
            return lambda x, _c=node: _c + 0.0 * x
        if isinstance(node, str):
            return lambda x: x
        head, *args = node
        fs = [build(a) for a in args]
        if head in _UNARY:
            op, f0 = _UNARY[head], fs[0]
            return lambda x: op(f0(x))
        if head == "+":
            return lambda x: sum(f(x) for f in fs)
        if head == "*":
            def prod(x):
                out = fs[0](x)
                for f in fs[1:]:
                    out = out * f(x)
                return out
            return prod
        if head == "-":
            if len(fs) == 1:
                return lambda x: -fs[0](x)
            return lambda x: fs[0](x) - fs[1](x)
        if head == "/":
            return lambda x: fs[0](x) / fs[1](x)
        if head == "pow":
            return lambda x: np.power(fs[0](x), fs[1](x))
        raise SexprError(head)  # pragma: no cover

    fn = build(tree)

    def call(x):
        with np.errstate(all="ignore"):
            out = fn(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    return call


def _is_num(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, float) and (value is None or e == value)


def _add(*terms: Expr) -> Expr:
    terms = tuple(t for t in terms if not _is_num(t, 0.0))
    if not terms:
        return 0.0
    if all(isinstance(t, float) for t in terms):
        return float(sum(terms))
    return terms[0] if len(terms) == 1 else ("+", *terms)


def _mul(*factors: Expr) -> Expr:
    if any(_is_num(f, 0.0) for f in factors):
        return 0.0
    factors = tuple(f for f in factors if not _is_num(f, 1.0))
    if not factors:
        return 1.0
    if all(isinstance(f, float) for f in factors):
        return float(math.prod(factors))
    return factors[0] if len(factors) == 1 else ("*", *factors)


def _neg(e: Expr) -> Expr:
    return -e if isinstance(e, float) else ("-", e)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    if isinstance(a, float) and isinstance(b, float):
        return a - b
    return ("-", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0.0):
        return 0.0
    if _is_num(b, 1.0):
        return a
    return ("/", a, b)


def diff(expr: Expr, var: str = "s") -> Expr:
    """Symbolic derivative of ``expr`` with respect to ``var``."""
    if isinstance(expr, float):
        return 0.0
    if isinstance(expr, str):
        return 1.0 if expr == var else 0.0
    head, *args = expr
    if var not in free_symbols(expr):
        return 0.0
    d = [diff(a, var) for a in args]
    if head == "+":
        return _add(*d)
    if head == "-":
        return _neg(d[0]) if len(args) == 1 else _sub(d[0], d[1])
    if head == "*":
        terms = []
        for i, di in enumerate(d):
            terms.append(_mul(*args[:i], di, *args[i + 1:]))
        return _add(*terms)
    if head == "/":
        u, v = args
        du, dv = d
        return _div(_sub(_mul(du, v), _mul(u, dv)), ("pow", v, 2.0))
    if head == "pow":
        u, p = args
        du, dp = d
        if _is_num(dp, 0.0):
            # power rule with a constant exponent
            lowered = p - 1.0 if isinstance(p, float) else ("-", p, 1.0)
            return _mul(p, ("pow", u, lowered), du)
        return _mul(expr, _add(_mul(dp, ("ln", u)), _div(_mul(p, du), u)))
    u, du = args[0], d[0]
    if head == "exp":
        return _mul(expr, du)
    if head == "ln":
        return _div(du, u)
    if head == "sin":
        return _mul(("cos", u), du)
    if head == "cos":
        return _neg(_mul(("sin", u), du))
    if head == "tan":
        return _mul(_add(1.0, ("pow", expr, 2.0)), du)
    if head == "abs":
        return _mul(_div(u, ("abs", u)), du)
    raise SexprError(head)  # pragma: no cover
