import itertools

import numpy as np
import pytest

from gc2gnn.errors import GraphFormatError
from gc2gnn.graph import (
    LabeledGraph,
    TreeSpec,
    complete_graph,
    disjoint_union,
    gen_random,
    gen_tree,
    load,
    load_file,
    save,
    save_file,
    validate,
)


def test_validate_examples():
    assert validate(LabeledGraph(1, (1,), ((),))) == []
    bad = LabeledGraph(1, (1, 1), ((1,), ()))
    kinds = [(v.kind, v.witness) for v in validate(bad)]
    assert ("symmetry", (0, 1)) in kinds
    colour = validate(LabeledGraph(1, (0,), ((),)))
    assert [v.kind for v in colour] == ["color range"]


def test_validate_reports_loops_and_duplicates():
    g = LabeledGraph(1, (1, 1), ((0, 1, 1), (0,)))
    kinds = {v.kind for v in validate(g)}
    assert {"loop", "duplicate"} <= kinds


def test_gen_tree_examples():
    g = gen_tree([1, 2])
    assert g.n == 6
    assert g.edges() == [(0, 1), (0, 2), (1, 3), (2, 4), (2, 5)]
    path = gen_tree([0])
    assert path.n == 2 and path.edges() == [(0, 1)]
    for k in range(11):
        assert gen_tree([k]).n == 2 + k


def test_gen_tree_degrees_and_validity():
    rng = np.random.default_rng(0)
    specs = [k for m in range(1, 4) for k in itertools.product(range(3), repeat=m)]
    specs += [tuple(rng.integers(0, 101, size=int(rng.integers(1, 9)))) for _ in range(30)]
    for k in specs:
        g = gen_tree(k)
        assert validate(g) == []
        m = len(k)
        assert g.n == 1 + m + sum(k)
        assert g.degree(0) == m
        for j in range(m):
            assert g.degree(j + 1) == k[j] + 1
        assert all(g.degree(v) == 1 for v in range(m + 1, g.n))


def test_tree_spec_validation():
    with pytest.raises(ValueError):
        TreeSpec(())
    with pytest.raises(ValueError):
        TreeSpec((1, -1))


def test_gen_random_examples():
    g = gen_random(1, 3, 0.9, seed=1)
    assert g.n == 1 and g.edges() == []
    assert gen_random(8, 2, 0.0, seed=5).edges() == []
    assert save(gen_random(9, 3, 0.4, seed=11)) == save(gen_random(9, 3, 0.4, seed=11))
    assert validate(gen_random(30, 4, 0.3, seed=3)) == []
    with pytest.raises(ValueError):
        gen_random(3, 1, 1.5, seed=0)


def test_round_trip_and_single_vertex():
    g = gen_tree([1, 2])
    assert load(save(g)) == g
    one = load("graph 1 1\nv 0 1\n")
    assert one.n == 1 and one.colors == (1,)
    rg = gen_random(12, 3, 0.3, seed=4)
    assert load(save(rg)) == rg


def test_file_io(tmp_path):
    g = complete_graph(4, color=2, num_colors=2)
    save_file(g, tmp_path / "k4.g")
    assert load_file(tmp_path / "k4.g") == g


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("graph 4 1\nv 0 1\nv 1 1\nv 2 1\nv 3 1\ne 3 3\n", 6, "loop"),
        ("graph 2 1\nv 0 1\nv 1 1\ne 0 1\ne 1 0\n", 5, "duplicate"),
        ("graph 2 1\nv 0 1\nv 1 2\n", 3, "color"),
        ("graph 2 1\nv 0 1\nv 5 1\n", 3, "out of range"),
        ("graph 2 1\nv 0 1\ne 0 7\n", 3, "out of range"),
        ("graph 2 1\nv 0 1\nv 0 1\n", 3, "twice"),
        ("nodes 2\n", 1, "header"),
        ("graph 1 1\nv 0 x\n", 2, "non-integer"),
        ("graph 1 1\nq 0 1\n", 2, "unknown"),
    ],
)
def test_load_errors_name_the_line(text, line, fragment):
    with pytest.raises(GraphFormatError) as info:
        load(text)
    assert info.value.line == line
    assert fragment in str(info.value)


def test_load_missing_vertex_and_comments():
    with pytest.raises(GraphFormatError, match="missing vertex"):
        load("graph 2 1\nv 0 1\n")
    g = load("# comment\ngraph 2 1 # trailing\nv 0 1\nv 1 1\ne 0 1\n")
    assert g.edges() == [(0, 1)]


def test_relabel_and_union():
    g = gen_tree([1, 2])
    perm = [5, 4, 3, 2, 1, 0]
    h = g.relabel(perm)
    assert sorted(h.degree(perm[v]) for v in range(g.n)) == sorted(g.degree(v) for v in range(g.n))
    u, offsets = disjoint_union(g, complete_graph(3))
    assert offsets == [0, 6] and u.n == 9
    assert (6, 7) in u.edges() and validate(u) == []
