"""GC2 formulas in modal form.

Variables are implicit: ``ExistsGeq(n, phi)`` at a vertex ``x`` means "at
least ``n`` neighbours of ``x`` satisfy ``phi``".
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import FormulaError


@dataclass(frozen=True)
class Col:
    color: int

    def __post_init__(self):
        if not isinstance(self.color, int) or self.color < 1:
            raise FormulaError(f"color index must be a positive integer, got {self.color!r}")


@dataclass(frozen=True)
class Top:
    """Always-true sugar; expands to ``Col(1) or not Col(1)`` in :func:`desugar`."""


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class ExistsGeq:
    count: int
    child: "Formula"

    def __post_init__(self):
        if not isinstance(self.count, int) or self.count < 1:
            raise FormulaError(f"counting quantifier needs N >= 1, got {self.count!r}")


Formula = Union[Col, Top, Not, And, Or, ExistsGeq]


def children(f: Formula) -> tuple:
    if isinstance(f, (Col, Top)):
        return ()
    if isinstance(f, (Not, ExistsGeq)):
        return (f.child,)
    if isinstance(f, (And, Or)):
        return (f.left, f.right)
    raise TypeError(f"not a formula: {f!r}")


def depth(f: Formula) -> int:
    if isinstance(f, (Col, Top)):
        return 1
    return 1 + max(depth(c) for c in children(f))


def node_count(f: Formula) -> int:
    return 1 + sum(node_count(c) for c in children(f))


def colors_used(f: Formula) -> set[int]:
    if isinstance(f, Col):
        return {f.color}
    out: set[int] = set()
    for c in children(f):
        out |= colors_used(c)
    return out


def max_color(f: Formula) -> int:
    """Largest color index mentioned; ``Top`` counts as color 1."""
    used = colors_used(f)
    if _contains(f, Top):
        used.add(1)
    return max(used, default=1)


def _contains(f: Formula, kind) -> bool:
    return isinstance(f, kind) or any(_contains(c, kind) for c in children(f))


def is_desugared(f: Formula) -> bool:
    return not (_contains(f, Or) or _contains(f, Top))


def desugar(f: Formula) -> Formula:
    """Rewrite ``Or`` by De Morgan and expand ``Top``; the result uses only Col/Not/And/ExistsGeq."""
    if isinstance(f, Col):
        return f
    if isinstance(f, Top):
        return desugar(Or(Col(1), Not(Col(1))))
    if isinstance(f, Not):
        return Not(desugar(f.child))
    if isinstance(f, And):
        return And(desugar(f.left), desugar(f.right))
    if isinstance(f, Or):
        return Not(And(Not(desugar(f.left)), Not(desugar(f.right))))
    if isinstance(f, ExistsGeq):
        return ExistsGeq(f.count, desugar(f.child))
    raise TypeError(f"not a formula: {f!r}")


def postorder(f: Formula) -> list:
    """Distinct subformulas, children before parents, first occurrence wins."""
    seen: dict = {}
    stack: list = [(f, False)]
    while stack:
        node, expanded = stack.pop()
        if node in seen:
            continue
        if expanded:
            seen[node] = len(seen)
            continue
        stack.append((node, True))
        for c in reversed(children(node)):
            if c not in seen:
                stack.append((c, False))
    return list(seen)


class SubformulaList:
    """Enumeration ``(Q_1, ..., Q_d)`` of the subformulas of a query."""

    def __init__(self, items):
        self.items = tuple(items)
        self.index = {q: i for i, q in enumerate(self.items)}
        if len(self.index) != len(self.items):
            raise FormulaError("duplicate subformula in enumeration")

    def __len__(self):
        return len(self.items)

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]

    @property
    def root(self) -> Formula:
        return self.items[-1]

    def position(self, q: Formula) -> int:
        return self.index[q]

    def __repr__(self):
        return f"SubformulaList({list(self.items)!r})"


def subformulas(f: Formula) -> SubformulaList:
    if not is_desugared(f):
        raise FormulaError("subformulas() needs a desugared formula (no 'or' / 'true')")
    return SubformulaList(postorder(f))


class RgcClass(enum.Enum):
    OMEGA0 = "Omega0"
    OMEGA_PLUS = "OmegaPlus"
    OMEGA_NEGATED = "OmegaNegated"
    NOT_RGC2 = "NotRGC2"

    def __str__(self):
        return self.value


def _is_omega0(f: Formula) -> bool:
    if isinstance(f, Col):
        return True
    if isinstance(f, Not) and isinstance(f.child, Col):
        return True
    return isinstance(f, ExistsGeq) and isinstance(f.child, Col)


def _is_positive(f: Formula) -> bool:
    while True:
        if _is_omega0(f):
            return True
        if isinstance(f, ExistsGeq) and f.count == 1:
            f = f.child
            continue
        return False


def rgc2_classify(f: Formula) -> RgcClass:
    if _is_omega0(f):
        return RgcClass.OMEGA0
    if _is_positive(f):
        return RgcClass.OMEGA_PLUS
    if isinstance(f, Not) and _is_positive(f.child):
        return RgcClass.OMEGA_NEGATED
    return RgcClass.NOT_RGC2


def rgc2_obstruction(f: Formula):
    """The first subterm (top-down) that keeps ``f`` out of RGC2, or None."""
    if rgc2_classify(f) is not RgcClass.NOT_RGC2:
        return None
    node = f.child if isinstance(f, Not) else f
    while isinstance(node, ExistsGeq) and node.count == 1 and not _is_omega0(node):
        node = node.child
    return node
