import numpy as np
import pytest
from hypothesis import given, settings

from gc2gnn.errors import FormulaError
from gc2gnn.formula import (
    And,
    Col,
    ExistsGeq,
    Not,
    Or,
    RgcClass,
    Top,
    children,
    depth,
    desugar,
    is_desugared,
    max_color,
    node_count,
    rgc2_classify,
    rgc2_obstruction,
    subformulas,
)
from gc2gnn.parser import parse

from helpers import formulas

RED_BLUE = And(Col(1), ExistsGeq(1, Col(2)))
Q2 = Not(ExistsGeq(1, Not(ExistsGeq(2, Top()))))


def test_constructors_reject_bad_indices():
    with pytest.raises(FormulaError):
        Col(0)
    with pytest.raises(FormulaError):
        ExistsGeq(0, Col(1))


def test_depth_examples():
    assert depth(Col(1)) == 1
    assert depth(RED_BLUE) == 3


def test_depth_of_q2_surface_and_desugared():
    # Top is a leaf on the surface; after desugaring it becomes not(not c and not not c).
    assert depth(Q2) == 5
    assert depth(desugar(Top())) == 5
    assert depth(desugar(Q2)) == 9


def test_subformulas_red_blue_order():
    subs = subformulas(RED_BLUE)
    assert list(subs) == [Col(1), Col(2), ExistsGeq(1, Col(2)), RED_BLUE]
    assert subs.root == RED_BLUE
    assert subs.position(Col(2)) == 1


def test_subformulas_singleton_and_dedup():
    assert list(subformulas(Col(1))) == [Col(1)]
    assert list(subformulas(And(Col(1), Col(1)))) == [Col(1), And(Col(1), Col(1))]


def test_subformulas_rejects_sugar():
    with pytest.raises(FormulaError):
        subformulas(Or(Col(1), Col(2)))
    with pytest.raises(FormulaError):
        subformulas(Top())


def test_desugar_or():
    assert desugar(Or(Col(1), Col(2))) == Not(And(Not(Col(1)), Not(Col(2))))
    assert desugar(RED_BLUE) == RED_BLUE
    assert desugar(ExistsGeq(2, Or(Col(1), Col(3)))) == ExistsGeq(2, Not(And(Not(Col(1)), Not(Col(3)))))


def test_max_color_counts_top_as_color_one():
    assert max_color(Top()) == 1
    assert max_color(And(Col(3), Top())) == 3


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_subformula_order_and_size(f):
    g = desugar(f)
    assert is_desugared(g)
    assert depth(g) >= depth(f)
    subs = subformulas(g)
    assert len(subs) <= node_count(g)
    assert len(set(subs)) == len(subs)
    assert subs.root == g
    for i, q in enumerate(subs):
        for c in children(q):
            assert subs.position(c) < i


@pytest.mark.parametrize(
    "text, expected",
    [
        ("col(1)", RgcClass.OMEGA0),
        ("not col(2)", RgcClass.OMEGA0),
        ("exists>=3 col(1)", RgcClass.OMEGA0),
        ("exists>=1 exists>=1 col(1)", RgcClass.OMEGA_PLUS),
        ("exists>=1 exists>=2 col(1)", RgcClass.OMEGA_PLUS),
        ("not exists>=1 exists>=1 col(1)", RgcClass.OMEGA_NEGATED),
        ("not exists>=2 col(1)", RgcClass.OMEGA_NEGATED),
        ("exists>=3 exists>=1 col(1)", RgcClass.NOT_RGC2),
        ("not exists>=1 not exists>=2 col(1)", RgcClass.NOT_RGC2),
        ("(col(1) and col(2))", RgcClass.NOT_RGC2),
        ("exists>=1 not exists>=1 col(1)", RgcClass.NOT_RGC2),
    ],
)
def test_rgc2_classify(text, expected):
    assert rgc2_classify(parse(text)) is expected


def test_rgc2_obstruction_points_at_blocking_subterm():
    f = parse("not exists>=1 not exists>=2 col(1)")
    assert rgc2_obstruction(f) == Not(ExistsGeq(2, Col(1)))
    assert rgc2_obstruction(parse("exists>=3 exists>=1 col(1)")) == parse("exists>=3 exists>=1 col(1)")
    assert rgc2_obstruction(parse("exists>=1 col(1)")) is None


def test_random_rgc2_generator_is_in_rgc2():
    from helpers import random_rgc2

    rng = np.random.default_rng(1)
    for _ in range(200):
        assert rgc2_classify(random_rgc2(rng, 3)) is not RgcClass.NOT_RGC2
