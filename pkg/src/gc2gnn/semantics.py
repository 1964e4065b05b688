"""Brute-force model checker for GC2: the ground truth for every compiled model."""
from __future__ import annotations

import numpy as np

from .errors import ColorRangeError
from .formula import And, Col, ExistsGeq, Formula, Not, Or, Top, colors_used, postorder
from .graph import LabeledGraph


def _check_colors(f: Formula, g: LabeledGraph) -> None:
    bad = sorted(c for c in colors_used(f) if c > g.num_colors)
    if bad:
        raise ColorRangeError(f"formula mentions colors {bad} but the graph has {g.num_colors}")


def eval_table(f: Formula, g: LabeledGraph) -> dict:
    """Satisfaction vector (bool array over vertices) for every subformula of ``f``.

    Accepts sugared formulas too (``or`` / ``true``), so the desugaring can be
    checked against it.
    """
    _check_colors(f, g)
    colors = np.asarray(g.colors, dtype=np.int64)
    src, dst = g.edge_index()
    table: dict = {}
    for q in postorder(f):
        if isinstance(q, Col):
            val = colors == q.color
        elif isinstance(q, Top):
            val = np.ones(g.n, dtype=bool)
        elif isinstance(q, Not):
            val = ~table[q.child]
        elif isinstance(q, And):
            val = table[q.left] & table[q.right]
        elif isinstance(q, Or):
            val = table[q.left] | table[q.right]
        elif isinstance(q, ExistsGeq):
            counts = np.bincount(dst, weights=table[q.child][src], minlength=g.n)
            val = counts >= q.count
        else:
            raise TypeError(f"not a formula: {q!r}")
        table[q] = val
    return table


def eval_all(f: Formula, g: LabeledGraph) -> np.ndarray:
    """0/1 vector: entry ``v`` is 1 iff ``f`` holds at vertex ``v``."""
    return eval_table(f, g)[f].astype(np.int8)


def eval(f: Formula, g: LabeledGraph, v: int) -> int:  # noqa: A001 - mirrors the query notation Q(G, v)
    if not 0 <= v < g.n:
        raise IndexError(f"vertex {v} out of range for a graph with {g.n} vertices")
    return int(eval_all(f, g)[v])


def eval_naive(f: Formula, g: LabeledGraph, v: int) -> bool:
    """Direct recursive reading of the semantics; slow, used to cross-check :func:`eval_all`."""
    if isinstance(f, Col):
        return g.colors[v] == f.color
    if isinstance(f, Top):
        return True
    if isinstance(f, Not):
        return not eval_naive(f.child, g, v)
    if isinstance(f, And):
        return eval_naive(f.left, g, v) and eval_naive(f.right, g, v)
    if isinstance(f, Or):
        return eval_naive(f.left, g, v) or eval_naive(f.right, g, v)
    if isinstance(f, ExistsGeq):
        return sum(eval_naive(f.child, g, w) for w in g.adjacency[v]) >= f.count
    raise TypeError(f"not a formula: {f!r}")
