"""Vertex-coloured simple graphs, the tree family T[k_1..k_m], and a text format.

Text format (UTF-8, ``#`` comments anywhere)::

    graph <n> <num_colors>
    v <id> <color>        # one line per vertex, all n required
    e <u> <v>             # u < v, each undirected edge once
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import GraphFormatError


@dataclass(frozen=True)
class LabeledGraph:
    """Colours are 1-based; ``adjacency[v]`` is the sorted neighbour tuple of ``v``."""

    num_colors: int
    colors: tuple
    adjacency: tuple

    @property
    def n(self) -> int:
        return len(self.colors)

    @classmethod
    def from_edges(cls, colors: Sequence[int], edges: Iterable[tuple[int, int]], num_colors: int | None = None):
        colors = tuple(int(c) for c in colors)
        nbrs: list[set] = [set() for _ in colors]
        for u, v in edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        if num_colors is None:
            num_colors = max(colors, default=1)
        return cls(num_colors, colors, tuple(tuple(sorted(s)) for s in nbrs))

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, ns in enumerate(self.adjacency) for v in ns if u < v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> tuple:
        return self.adjacency[v]

    def edge_index(self) -> tuple[np.ndarray, np.ndarray]:
        """Directed edge arrays ``(src, dst)`` with both orientations, grouped by ``dst``."""
        dst = np.repeat(np.arange(self.n), [len(a) for a in self.adjacency])
        src = np.fromiter((w for a in self.adjacency for w in a), dtype=np.int64, count=len(dst))
        return src, dst

    def relabel(self, perm: Sequence[int]) -> "LabeledGraph":
        """Graph with vertex ``v`` renamed ``perm[v]``."""
        colors = [0] * self.n
        for v, c in enumerate(self.colors):
            colors[perm[v]] = c
        edges = [(perm[u], perm[v]) for u, v in self.edges()]
        return LabeledGraph.from_edges(colors, edges, self.num_colors)

    def with_num_colors(self, num_colors: int) -> "LabeledGraph":
        return LabeledGraph(num_colors, self.colors, self.adjacency)


@dataclass(frozen=True)
class Violation:
    kind: str
    witness: tuple
    message: str = ""


def validate(g: LabeledGraph) -> list[Violation]:
    """Every broken invariant, each with a witness. Empty list means the graph is valid."""
    out = []
    if g.num_colors < 1:
        out.append(Violation("color count", (g.num_colors,), "need at least one color"))
    if len(g.adjacency) != len(g.colors):
        out.append(Violation("size", (len(g.colors), len(g.adjacency)), "colors and adjacency differ in length"))
        return out
    for v, c in enumerate(g.colors):
        if not 1 <= c <= g.num_colors:
            out.append(Violation("color range", (v,), f"vertex {v} has color {c} outside [1, {g.num_colors}]"))
    n = g.n
    for v, ns in enumerate(g.adjacency):
        if list(ns) != sorted(ns):
            out.append(Violation("unsorted", (v,), f"neighbour list of {v} is not sorted"))
        if len(set(ns)) != len(ns):
            out.append(Violation("duplicate", (v,), f"neighbour list of {v} has duplicates"))
        for w in ns:
            if not 0 <= w < n:
                out.append(Violation("vertex range", (v, w), f"neighbour {w} of {v} out of range"))
            elif w == v:
                out.append(Violation("loop", (v, v), f"loop at {v}"))
            elif v not in g.adjacency[w]:
                out.append(Violation("symmetry", (v, w), f"{w} in N({v}) but {v} not in N({w})"))
    return out


# --------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class TreeSpec:
    """Leaf counts ``(k_1, ..., k_m)`` below the children of the root."""

    k: tuple = field()

    def __post_init__(self):
        k = tuple(int(x) for x in self.k)
        if not k:
            raise ValueError("TreeSpec needs m >= 1")
        if any(x < 0 for x in k):
            raise ValueError("leaf counts must be non-negative")
        object.__setattr__(self, "k", k)

    @property
    def m(self) -> int:
        return len(self.k)


def gen_tree(spec, num_colors: int = 1) -> LabeledGraph:
    """T[k_1..k_m]: root 0, children 1..m, then the leaves of child 1, child 2, ...

    All vertices get color 1; ``num_colors`` only sets the palette size so the
    tree can be fed to models over more colors.
    """
    if not isinstance(spec, TreeSpec):
        spec = TreeSpec(tuple(spec))
    m = spec.m
    edges = [(0, j) for j in range(1, m + 1)]
    nxt = m + 1
    for j, kj in enumerate(spec.k, start=1):
        for _ in range(kj):
            edges.append((j, nxt))
            nxt += 1
    return LabeledGraph.from_edges([1] * nxt, edges, num_colors)


def gen_random(n: int, num_colors: int, p: float, seed: int) -> LabeledGraph:
    """Erdos-Renyi G(n, p) with uniform random colors; deterministic in ``seed``."""
    if n < 1 or num_colors < 1 or not 0 <= p <= 1:
        raise ValueError("need n >= 1, num_colors >= 1 and 0 <= p <= 1")
    rng = np.random.default_rng(seed)
    colors = rng.integers(1, num_colors + 1, size=n)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    edges = zip(iu[keep].tolist(), ju[keep].tolist())
    return LabeledGraph.from_edges(colors.tolist(), edges, num_colors)


def complete_graph(n: int, color: int = 1, num_colors: int = 1) -> LabeledGraph:
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    return LabeledGraph.from_edges([color] * n, edges, num_colors)


def disjoint_union(*graphs: LabeledGraph) -> tuple[LabeledGraph, list[int]]:
    """Union of ``graphs`` and the vertex offset of each part."""
    num_colors = max(g.num_colors for g in graphs)
    colors: list[int] = []
    edges = []
    offsets = []
    for g in graphs:
        off = len(colors)
        offsets.append(off)
        colors.extend(g.colors)
        edges.extend((u + off, v + off) for u, v in g.edges())
    return LabeledGraph.from_edges(colors, edges, num_colors), offsets


# --------------------------------------------------------------------------
# text format


def save(g: LabeledGraph) -> str:
    lines = [f"graph {g.n} {g.num_colors}"]
    lines += [f"v {v} {c}" for v, c in enumerate(g.colors)]
    lines += [f"e {u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def load(text: str) -> LabeledGraph:
    header = None
    colors: dict[int, int] = {}
    edges: set = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            nums = [int(x) for x in parts[1:]]
        except ValueError:
            raise GraphFormatError(f"non-integer field in {raw.strip()!r}", lineno) from None
        tag = parts[0]
        if header is None:
            if tag != "graph" or len(nums) != 2:
                raise GraphFormatError("expected header 'graph <n> <num_colors>'", lineno)
            n, num_colors = nums
            if n < 0 or num_colors < 1:
                raise GraphFormatError("header needs n >= 0 and num_colors >= 1", lineno)
            header = (n, num_colors)
            continue
        n, num_colors = header
        if tag == "v":
            if len(nums) != 2:
                raise GraphFormatError("expected 'v <id> <color>'", lineno)
            v, c = nums
            if not 0 <= v < n:
                raise GraphFormatError(f"vertex id {v} out of range [0, {n})", lineno)
            if v in colors:
                raise GraphFormatError(f"vertex {v} declared twice", lineno)
            if not 1 <= c <= num_colors:
                raise GraphFormatError(f"color {c} out of range [1, {num_colors}]", lineno)
            colors[v] = c
        elif tag == "e":
            if len(nums) != 2:
                raise GraphFormatError("expected 'e <u> <v>'", lineno)
            u, v = nums
            if u == v:
                raise GraphFormatError(f"loop edge at vertex {u}", lineno)
            for x in (u, v):
                if not 0 <= x < n:
                    raise GraphFormatError(f"vertex id {x} out of range [0, {n})", lineno)
            key = (min(u, v), max(u, v))
            if key in edges:
                raise GraphFormatError(f"duplicate edge {key}", lineno)
            edges.add(key)
        else:
            raise GraphFormatError(f"unknown record type {tag!r}", lineno)
    if header is None:
        raise GraphFormatError("missing 'graph' header")
    n, num_colors = header
    missing = [v for v in range(n) if v not in colors]
    if missing:
        raise GraphFormatError(f"missing vertex lines for ids {missing[:10]}")
    return LabeledGraph.from_edges([colors[v] for v in range(n)], sorted(edges), num_colors)


def load_file(path) -> LabeledGraph:
    return load(Path(path).read_text(encoding="utf-8"))


def save_file(g: LabeledGraph, path) -> None:
    Path(path).write_text(save(g), encoding="utf-8")
