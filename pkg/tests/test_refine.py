import itertools

import numpy as np
import pytest

from gc2gnn.candidates import BUILDERS
from gc2gnn.gnn import run
from gc2gnn.graph import LabeledGraph, complete_graph, gen_tree
from gc2gnn.refine import check_refines, color_refine, joint_refine, refinement_violation

from helpers import random_graph


def test_tree_partition_example():
    trace = color_refine(gen_tree([1, 2]))
    assert trace.stable_round == 3
    assert trace.partition(3) == [[0], [1], [2], [3], [4, 5]]
    assert [trace.num_classes(t) for t in range(4)] == [1, 3, 5, 5]


def test_trivial_graphs():
    k5 = color_refine(complete_graph(5))
    assert all(len(set(r)) == 1 for r in k5.rounds)
    one = color_refine(LabeledGraph.from_edges([1], [], 1))
    assert one.stable_round == 0 and one.rounds == ((0,),)


def test_fixed_round_budget_and_clamping():
    g = gen_tree([1, 2])
    short = color_refine(g, rounds=1)
    assert len(short.rounds) == 2 and short.stable_round is None
    with pytest.raises(IndexError):
        short.at(5)
    long = color_refine(g, rounds=6)
    assert len(long.rounds) == 7 and long.stable_round == 3
    assert color_refine(g).at(10) == long.rounds[6]


def test_canonical_ids_first_appearance():
    g = LabeledGraph.from_edges([2, 1, 2], [(0, 1)], 2)
    trace = color_refine(g)
    assert trace.rounds[0] == (0, 1, 0)
    for row in trace.rounds:
        seen = []
        for c in row:
            if c not in seen:
                seen.append(c)
        assert seen == list(range(len(seen)))


def test_monotone_and_bounded():
    rng = np.random.default_rng(0)
    for _ in range(100):
        g = random_graph(rng, 15, 2)
        trace = color_refine(g)
        counts = [len(set(r)) for r in trace.rounds]
        assert counts == sorted(counts)
        assert trace.stable_round is not None and trace.stable_round <= g.n
        for prev, nxt in zip(trace.rounds, trace.rounds[1:]):
            # each new class lies inside one old class
            assert check_refines(dict(enumerate(nxt)), dict(enumerate(prev))) is None


def test_check_refines_examples():
    a = {("g", 0): 0, ("g", 1): 1, ("g", 2): 0}
    assert check_refines(a, a) is None
    const = {k: 0 for k in a}
    assert check_refines(const, a) == (("g", 0), ("g", 1))
    with pytest.raises(KeyError):
        check_refines(a, {("g", 0): 0})


def test_joint_refinement_consistent_with_separate_runs():
    rng = np.random.default_rng(4)
    for _ in range(40):
        g, h = random_graph(rng, 8, 2), random_graph(rng, 8, 2)
        trace, (og, oh) = joint_refine([g, h])
        t = trace.stable_round
        joint = trace.at(t)
        # vertices of one graph: joint equality iff separate equality
        sep = color_refine(g, rounds=t).at(t)
        for u, v in itertools.combinations(range(g.n), 2):
            assert (joint[og + u] == joint[og + v]) == (sep[u] == sep[v])


def test_root_classes_invariant_under_permutation():
    for m in range(1, 6):
        for k in itertools.combinations_with_replacement(range(3), m):
            perms = sorted(set(itertools.permutations(k)))
            trace, offsets = joint_refine([gen_tree(p) for p in perms], rounds=4)
            for t in range(5):
                assert len({trace.at(t)[o] for o in offsets}) == 1


def test_refinement_order_small_corpus():
    rng = np.random.default_rng(6)
    model = BUILDERS["rational_sq"]()
    for _ in range(20):
        graphs = [random_graph(rng, 8, 1) for _ in range(2)]
        for t in range(model.iterations + 1):
            assert refinement_violation(graphs, lambda g, t=t: run(model, g, iterations=t)[t], t) is None


def test_refinement_violation_reports_witness():
    g = complete_graph(3)
    h = gen_tree([1])

    def fake(graph):
        return np.arange(graph.n).reshape(-1, 1)

    bad = refinement_violation([g, h], fake, 0)
    assert bad is not None and bad["t"] == 0


def test_csv_export():
    text = color_refine(gen_tree([1])).to_csv()
    assert text.splitlines()[0] == "round,vertex,class"
    assert "0,0,0" in text
