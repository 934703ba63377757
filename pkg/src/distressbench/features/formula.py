"""Restricted expression language for feature formulas.

Formulas are plain strings such as ``"(current_assets - inventories) / current_liabilities"``.
They are parsed once with :mod:`ast` and compiled into a closure over numpy
arrays. Semantics differ from Python in the ways the feature catalog needs:

* ``a / b`` is missing (NaN) when ``b`` is zero or either side is missing;
* ``log(x)`` is missing for ``x <= 0``;
* comparisons give 1.0/0.0, or NaN when an operand is missing;
* ``prev(x)`` is the prior-year value, ``growth(x)`` the relative change
  ``(x - prev(x)) / abs(prev(x))``;
* ``band(x, e1, e2, ...)`` is the number of edges ``<= x`` (an ordinal code);
* ``rel(expr)`` subtracts the sector-year mean of ``expr``.
"""

from __future__ import annotations

import ast
from typing import Callable, Protocol

import numpy as np


class FormulaContext(Protocol):
    def column(self, name: str) -> np.ndarray: ...

    def previous(self, name: str) -> np.ndarray: ...

    def sector_mean(self, key: str) -> np.ndarray: ...


Compiled = Callable[[FormulaContext], np.ndarray]

_FUNCTIONS = {"log", "abs", "prev", "growth", "band", "rel"}


class FormulaError(ValueError):
    pass


def safe_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    num, den = np.broadcast_arrays(np.asarray(num, dtype=float), np.asarray(den, dtype=float))
    out = np.full(num.shape, np.nan)
    ok = (den != 0) & np.isfinite(den) & np.isfinite(num)
    np.divide(num, den, out=out, where=ok)
    return out


def safe_log(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, np.nan)
    ok = np.isfinite(x) & (x > 0)
    np.log(x, out=out, where=ok)
    return out


def _compare(op: ast.cmpop, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if isinstance(op, ast.Lt):
        res = a < b
    elif isinstance(op, ast.Gt):
        res = a > b
    elif isinstance(op, ast.LtE):
        res = a <= b
    elif isinstance(op, ast.GtE):
        res = a >= b
    else:
        raise FormulaError(f"unsupported comparison {type(op).__name__}")
    out = res.astype(float)
    out[np.isnan(a) | np.isnan(b)] = np.nan
    return out


def referenced_names(formula: str) -> set[str]:
    """Bare variable names a formula reads (function names excluded)."""
    tree = ast.parse(formula, mode="eval")
    calls = {n.func.id for n in ast.walk(tree) if isinstance(n, ast.Call) and isinstance(n.func, ast.Name)}
    return {n.id for n in ast.walk(tree) if isinstance(n, ast.Name)} - calls


def compile_formula(formula: str, derived: dict[str, str] | None = None, key: str | None = None) -> Compiled:
    """Compile ``formula``; names found in ``derived`` expand to their own formulas.

    ``key`` identifies the feature for ``rel()`` lookups of sector-year means.
    """
    derived = derived or {}
    tree = ast.parse(formula, mode="eval")

    def build(node: ast.AST, in_prev: bool = False) -> Compiled:
        if isinstance(node, ast.Expression):
            return build(node.body, in_prev)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            value = float(node.value)
            return lambda ctx: np.float64(value)
        if isinstance(node, ast.Name):
            name = node.id
            if name in derived:
                return build(ast.parse(derived[name], mode="eval"), in_prev)
            if in_prev:
                return lambda ctx: ctx.previous(name)
            return lambda ctx: ctx.column(name)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            inner = build(node.operand, in_prev)
            return lambda ctx: -inner(ctx)
        if isinstance(node, ast.BinOp):
            left, right = build(node.left, in_prev), build(node.right, in_prev)
            if isinstance(node.op, ast.Add):
                return lambda ctx: left(ctx) + right(ctx)
            if isinstance(node.op, ast.Sub):
                return lambda ctx: left(ctx) - right(ctx)
            if isinstance(node.op, ast.Mult):
                return lambda ctx: left(ctx) * right(ctx)
            if isinstance(node.op, ast.Div):
                return lambda ctx: safe_divide(left(ctx), right(ctx))
            raise FormulaError(f"unsupported operator {type(node.op).__name__} in {formula!r}")
        if isinstance(node, ast.Compare):
            if len(node.ops) != 1:
                raise FormulaError(f"chained comparison in {formula!r}")
            left, right, op = build(node.left, in_prev), build(node.comparators[0], in_prev), node.ops[0]
            return lambda ctx: _compare(op, left(ctx), right(ctx))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCTIONS:
            fn, args = node.func.id, node.args
            if fn == "log":
                inner = build(args[0], in_prev)
                return lambda ctx: safe_log(inner(ctx))
            if fn == "abs":
                inner = build(args[0], in_prev)
                return lambda ctx: np.abs(inner(ctx))
            if fn == "prev":
                return build(args[0], in_prev=True)
            if fn == "growth":
                cur, old = build(args[0], in_prev), build(args[0], in_prev=True)
                return lambda ctx: safe_divide(cur(ctx) - old(ctx), np.abs(old(ctx)))
            if fn == "band":
                inner = build(args[0], in_prev)
                edges = np.array([float(ast.literal_eval(a)) for a in args[1:]])

                def banded(ctx, inner=inner, edges=edges):
                    x = np.asarray(inner(ctx), dtype=float)
                    out = (x[..., None] >= edges).sum(axis=-1).astype(float)
                    out[np.isnan(x)] = np.nan
                    return out

                return banded
            if fn == "rel":
                if key is None:
                    raise FormulaError("rel() needs a feature key")
                inner = build(args[0], in_prev)
                return lambda ctx: inner(ctx) - ctx.sector_mean(key)
        raise FormulaError(f"unsupported syntax {ast.dump(node)} in {formula!r}")

    return build(tree)


def strip_rel(formula: str) -> str:
    """The base expression inside a top-level ``rel(...)``."""
    tree = ast.parse(formula, mode="eval").body
    if not (isinstance(tree, ast.Call) and isinstance(tree.func, ast.Name) and tree.func.id == "rel"):
        raise FormulaError(f"{formula!r} is not a rel() formula")
    return ast.unparse(tree.args[0])
