"""Random generators shared by the test modules (numpy RNG plus hypothesis strategies)."""
from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from gc2gnn.formula import And, Col, ExistsGeq, Not, Or, Top
from gc2gnn.graph import gen_random


def random_formula(rng: np.random.Generator, max_depth: int, num_colors: int, sugar: bool = False):
    """Random formula of depth at most ``max_depth`` (surface depth, Top counts 1)."""
    if max_depth <= 1 or rng.random() < 0.2:
        if sugar and rng.random() < 0.15:
            return Top()
        return Col(int(rng.integers(1, num_colors + 1)))
    kinds = ["not", "and", "exists"] + (["or"] if sugar else [])
    kind = kinds[int(rng.integers(len(kinds)))]
    sub = lambda: random_formula(rng, max_depth - 1, num_colors, sugar)  # noqa: E731
    if kind == "not":
        return Not(sub())
    if kind == "and":
        return And(sub(), sub())
    if kind == "or":
        return Or(sub(), sub())
    return ExistsGeq(int(rng.integers(1, 4)), sub())


def random_rgc2(rng: np.random.Generator, num_colors: int, max_chain: int = 4, max_k: int = 4):
    """Random RGC2 formula: an Omega0 base, up to ``max_chain - 1`` lifts, maybe a top negation."""
    c = Col(int(rng.integers(1, num_colors + 1)))
    base = [c, Not(c), ExistsGeq(int(rng.integers(1, max_k + 1)), c)][int(rng.integers(3))]
    f = base
    for _ in range(int(rng.integers(0, max_chain))):
        f = ExistsGeq(1, f)
    if rng.random() < 0.4:
        f = Not(f)
    return f


def random_graph(rng: np.random.Generator, max_n: int, num_colors: int):
    n = int(rng.integers(1, max_n + 1))
    p = float(rng.uniform(0.05, 0.7))
    return gen_random(n, num_colors, p, seed=int(rng.integers(2**31)))


def formulas(max_depth: int = 6, num_colors: int = 3, sugar: bool = True):
    """Hypothesis strategy for formulas."""
    leaves = st.integers(1, num_colors).map(Col)
    if sugar:
        leaves = leaves | st.just(Top())

    def extend(children):
        ops = [
            children.map(Not),
            st.tuples(children, children).map(lambda p: And(*p)),
            st.tuples(st.integers(1, 3), children).map(lambda p: ExistsGeq(*p)),
        ]
        if sugar:
            ops.append(st.tuples(children, children).map(lambda p: Or(*p)))
        return st.one_of(ops)

    return st.recursive(leaves, extend, max_leaves=max_depth * 2)


def graphs(max_n: int = 10, num_colors: int = 3):
    return st.builds(
        gen_random,
        st.integers(1, max_n),
        st.just(num_colors),
        st.floats(0.0, 1.0),
        st.integers(0, 2**31 - 1),
    )
