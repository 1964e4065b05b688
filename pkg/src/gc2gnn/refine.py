"""Colour refinement (1-WL) and the refinement order between embeddings."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping

import numpy as np

from .graph import LabeledGraph, disjoint_union


@dataclass(frozen=True)
class RefinementTrace:
    """``rounds[t][v]`` is the class id of ``v`` after ``t`` rounds.

    Ids are dense and assigned by first appearance in vertex order, so two
    runs on the same graph give identical traces. ``stable_round`` is the
    first round whose partition equals the previous one (0 when the colour
    classes are already singletons), or None if the round budget ran out
    first.
    """

    rounds: tuple
    stable_round: int | None

    def at(self, t: int) -> tuple:
        """Classes after ``t`` rounds; past the computed rounds the partition no longer changes."""
        if t < 0:
            raise ValueError("round index must be non-negative")
        if t < len(self.rounds):
            return self.rounds[t]
        if self.stable_round is None:
            raise IndexError(f"round {t} was not computed and refinement had not stabilised")
        return self.rounds[-1]

    def num_classes(self, t: int) -> int:
        return len(set(self.at(t)))

    def partition(self, t: int) -> list[list[int]]:
        groups: dict = {}
        for v, c in enumerate(self.at(t)):
            groups.setdefault(c, []).append(v)
        return [groups[c] for c in sorted(groups)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "vertex", "class"])
        for t, row in enumerate(self.rounds):
            for v, c in enumerate(row):
                w.writerow([t, v, c])
        return buf.getvalue()


def _intern(keys) -> tuple:
    table: dict = {}
    return tuple(table.setdefault(k, len(table)) for k in keys)


def color_refine(g: LabeledGraph, rounds: int | None = None) -> RefinementTrace:
    """Refine until the partition stops changing, or for at most ``rounds`` rounds.

    Round ``t+1`` interns the signature (class at t, sorted neighbour classes at t).
    """
    current = _intern(g.colors)
    trace = [current]
    # a discrete partition cannot split further
    stable = 0 if len(set(current)) == g.n else None
    t = 0
    while (stable is None and t <= g.n) if rounds is None else t < rounds:
        sigs = [(current[v], tuple(sorted(current[w] for w in g.adjacency[v]))) for v in range(g.n)]
        nxt = _intern(sigs)
        t += 1
        trace.append(nxt)
        if stable is None and len(set(nxt)) == len(set(current)):
            stable = t
        current = nxt
    return RefinementTrace(tuple(trace), stable)


def joint_refine(graphs, rounds: int | None = None) -> tuple[RefinementTrace, list[int]]:
    """Refinement on the disjoint union, so class ids are comparable across graphs."""
    union, offsets = disjoint_union(*graphs)
    return color_refine(union, rounds), offsets


def check_refines(fine: Mapping[Hashable, Hashable], coarse: Mapping[Hashable, Hashable]):
    """None if every ``fine``-class sits inside one ``coarse``-class, else a witness.

    The witness is ``(key1, key2)`` with equal ``fine`` values and different
    ``coarse`` values.
    """
    if fine.keys() != coarse.keys():
        missing = set(fine) ^ set(coarse)
        raise KeyError(f"embeddings are defined on different keys, e.g. {sorted(map(repr, missing))[:3]}")
    seen: dict = {}
    for key, value in fine.items():
        rep = seen.setdefault(value, key)
        if coarse[key] != coarse[rep]:
            return rep, key
    return None


def _hashable_row(row) -> tuple:
    return tuple(row.tolist()) if isinstance(row, np.ndarray) else tuple(row)


def refinement_violation(graphs, embed: Callable, t: int):
    """Check that ``cr^t`` refines the embedding ``embed(graph) -> states`` across ``graphs``.

    Keys are ``(graph index, vertex)``. Returns None or a witness dict.
    """
    trace, offsets = joint_refine(graphs, rounds=t)
    classes = trace.at(t)
    fine, coarse = {}, {}
    for gi, (g, off) in enumerate(zip(graphs, offsets)):
        states = embed(g)
        for v in range(g.n):
            fine[(gi, v)] = classes[off + v]
            coarse[(gi, v)] = _hashable_row(states[v])
    bad = check_refines(fine, coarse)
    if bad is None:
        return None
    a, b = bad
    return {"t": t, "first": list(a), "second": list(b), "class": fine[a],
            "embedding_first": [str(x) for x in coarse[a]], "embedding_second": [str(x) for x in coarse[b]]}
