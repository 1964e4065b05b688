"""Canned models used by the separation experiments.

Every candidate targets ``Q2 = not exists>=1 not exists>=2 true`` on the tree
family: true at the root of T[k] exactly when every ``k_i >= 1``. The
rational and polynomial candidates are reasonable attempts; none of them can
succeed uniformly, and the harness is there to find where they break.

The JSON copies under ``fixtures/`` are generated by :func:`write_fixtures`
and checked against these builders by the test-suite.
"""
from __future__ import annotations

from fractions import Fraction
from importlib import resources
from pathlib import Path

from .compile import compile_gc2_relu
from .formula import desugar
from .gnn import IDENTITY, Activation, DecisionRule, GnnLayer, GnnModel, load, save
from .numeric import Poly
from .parser import parse

Q2_TEXT = "not exists>=1 not exists>=2 true"
RED_BLUE_TEXT = "(col(1) and exists>=1 col(2))"

# Candidates decide with a margin of 1/10 around 1/2.
CANDIDATE_RULE = DecisionRule(Fraction(3, 5), Fraction(2, 5))


def q2():
    return parse(Q2_TEXT)


def red_blue_query():
    return parse(RED_BLUE_TEXT)


def red_blue_relu() -> GnnModel:
    return compile_gc2_relu(desugar(red_blue_query()), num_colors=2)


def q2_relu() -> GnnModel:
    return compile_gc2_relu(desugar(q2()), num_colors=1)


def _three_layers(name, first, second, third_rows, acts) -> GnnModel:
    """Width-3 layered model: coordinate 0 is the constant 1, 1 and 2 are computed."""
    layers = []
    for (A, B, c), act in zip((first, second, third_rows), acts):
        layers.append(GnnLayer(A, B, c, [IDENTITY, act[0], act[1]]))
    return GnnModel(1, [[1], [0], [0]], layers, 3, 2, CANDIDATE_RULE, False, name)


_KEEP = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
_ZERO = [[0, 0, 0]] * 3


def rational_sq() -> GnnModel:
    """h(x) = x^2/(1+x^2).

    x_j gets ``h(2 deg - 2)`` (0 for a leafless child, >= 4/5 otherwise); the
    root scores ``1 - h(2 * sum(1 - that))``.
    """
    h = Activation.rational_fn([0, 0, 1], [1, 0, 1])
    l1 = (_diag(0), [[0, 0, 0], [2, 0, 0], [0, 0, 0]], [0, -2, 0])
    l2 = (_diag(0, 1), [[0, 0, 0], [0, 0, 0], [2, -2, 0]], [0, 0, 0])
    l3 = ([[1, 0, 0], [0, 1, 0], [0, 0, -1]], _ZERO, [0, 0, 1])
    return _three_layers("rational_sq", l1, l2, l3, [(h, IDENTITY), (IDENTITY, h), (IDENTITY, IDENTITY)])


def rational_inv() -> GnnModel:
    """g(x) = 1/(1+x^2): x_j gets ``g(3 (deg - 1))``, the root ``g(3 * sum)``."""
    g = Activation.rational_fn([1], [1, 0, 1])
    l1 = (_diag(0), [[0, 0, 0], [3, 0, 0], [0, 0, 0]], [0, -3, 0])
    l2 = (_diag(0, 1), [[0, 0, 0], [0, 0, 0], [0, 3, 0]], [0, 0, 0])
    l3 = (_KEEP, _ZERO, [0, 0, 0])
    return _three_layers("rational_inv", l1, l2, l3, [(g, IDENTITY), (IDENTITY, g), (IDENTITY, IDENTITY)])


def poly_q2() -> GnnModel:
    """Polynomial attempt: x_j gets ``z(z-1)/2`` at ``z = deg - 2``.

    That is 1 for a leafless child and 0 with one or two leaves; the root
    scores ``1 - sum``. Three or more leaves break it.
    """
    p = Activation.polynomial(Poly([0, Fraction(-1, 2), Fraction(1, 2)]))
    l1 = (_diag(0), [[0, 0, 0], [1, 0, 0], [0, 0, 0]], [0, -2, 0])
    l2 = (_diag(0, 1), [[0, 0, 0], [0, 0, 0], [0, 1, 0]], [0, 0, 0])
    l3 = ([[1, 0, 0], [0, 1, 0], [0, 0, -1]], _ZERO, [0, 0, 1])
    return _three_layers("poly_q2", l1, l2, l3, [(p, IDENTITY), (IDENTITY, IDENTITY), (IDENTITY, IDENTITY)])


def _diag(*keep):
    return [[1 if (i == j and i in keep) else 0 for j in range(3)] for i in range(3)]


BUILDERS = {
    "red_blue_relu": red_blue_relu,
    "q2_relu": q2_relu,
    "rational_sq": rational_sq,
    "rational_inv": rational_inv,
    "poly_q2": poly_q2,
}
RATIONAL_CANDIDATES = ("rational_sq", "rational_inv")


def fixture_path(name: str):
    """Packaged fixture file; a bare model name gets the ``.gnn`` suffix."""
    return resources.files("gc2gnn") / "fixtures" / (name if "." in name else f"{name}.gnn")


def load_fixture(name: str) -> GnnModel:
    if name not in BUILDERS:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(BUILDERS)}")
    return load(fixture_path(name).read_text(encoding="utf-8"))


def all_fixtures() -> dict:
    return {name: load_fixture(name) for name in BUILDERS}


def write_fixtures(directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, build in BUILDERS.items():
        path = directory / f"{name}.gnn"
        path.write_text(save(build()), encoding="utf-8")
        out.append(path)
    (directory / "q2.gc2").write_text(f"# tree-family query: every child of the vertex has a leaf\n{Q2_TEXT}\n")
    (directory / "red_blue.gc2").write_text(f"# red vertex with a blue neighbour\n{RED_BLUE_TEXT}\n")
    return out
