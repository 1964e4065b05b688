import csv
import io
import itertools
import json
from fractions import Fraction as F

import numpy as np
import pytest

from gc2gnn.candidates import BUILDERS, q2, q2_relu
from gc2gnn.gnn import IDENTITY, Activation, GnnLayer, GnnModel
from gc2gnn.harness import (
    DominanceWitness,
    MarginReport,
    box_margin,
    corrected_polynomial,
    curve_sweep,
    degree_bound,
    dominant_direction,
    quartic_polynomial,
    root_trace,
    sign_check,
    symmetry_check,
    tree_states,
    verify_dominance,
)
from gc2gnn.numeric import MPoly

SQ = Activation.polynomial([0, 0, 1])
RAT = Activation.rational_fn([0, 0, 1], [1, 0, 1])


def toy(act, T):
    """Two-coordinate recurrent model: a counter and one nonlinear channel."""
    layer = GnnLayer([[1, 0], [1, 1]], [[0, 0], [1, 1]], [0, 1], [IDENTITY, act])
    return GnnModel(1, [[1], [0]], [layer], T, 1, recurrent=True)


def as_fraction(v):
    return F(int(v.numerator), int(v.denominator))


# ---------------------------------------------------------------- dominance


def test_dominance_examples():
    w = dominant_direction([(2, 0), (1, 1)])
    assert (w.x_star, w.u) == ((2, 0), (2, 0))
    w2 = dominant_direction([(2, 0), (1, 1)], [(0, 1), (1, 1)])
    assert (w2.y_star, w2.u, w2.construction) == ((1, 1), (3, 1), "norm")
    assert verify_dominance(w) is None and verify_dominance(w2) is None


def test_dominance_singletons_and_errors():
    w = dominant_direction([(0, 3)])
    assert w.u == (0, 3) and verify_dominance(w) is None
    with pytest.raises(ValueError):
        dominant_direction([(0, 0)])
    with pytest.raises(ValueError):
        dominant_direction([])
    with pytest.raises(ValueError):
        dominant_direction([(1, -1)])


def test_sum_direction_can_fail_so_fallback_is_used():
    S, S2 = [(3, 0), (2, 2)], [(0, 3), (2, 2)]
    naive = DominanceWitness(((2, 2), (3, 0)), (3, 0), (3, 3), ((0, 3), (2, 2)), (0, 3))
    bad = verify_dominance(naive)
    assert bad["reason"] == "not a strict maximizer"
    w = dominant_direction(S, S2)
    assert w.construction == "lexicographic" and verify_dominance(w) is None


def test_verify_dominance_catches_tampering():
    w = dominant_direction([(1, 2), (2, 0)])
    assert verify_dominance(DominanceWitness(w.S, w.x_star, (0, 0))) is not None
    assert verify_dominance(DominanceWitness(w.S, (9, 9), w.u))["reason"] == "chosen vector not in set"


def test_dominance_random_instances():
    rng = np.random.default_rng(0)
    for _ in range(300):
        p = int(rng.integers(1, 5))
        S = [tuple(rng.integers(0, 5, p)) for _ in range(rng.integers(1, 6))]
        S2 = [tuple(rng.integers(0, 5, p)) for _ in range(rng.integers(1, 6))]
        if all(not any(x) for x in S):
            continue
        assert verify_dominance(dominant_direction(S)) is None
        assert verify_dominance(dominant_direction(S, S2)) is None


# ---------------------------------------------------------------- tree states


def test_quotient_evaluator_matches_full_graph():
    rng = np.random.default_rng(1)
    for name, build in BUILDERS.items():
        model = build()
        if model.num_colors != 1:
            continue
        for _ in range(6):
            k = tuple(rng.integers(0, 5, rng.integers(1, 4)).tolist())
            full = root_trace(model, k)
            for t in range(model.iterations + 1):
                fast = tree_states(model, np.array([k]), iterations=t)[0]
                assert list(fast) == list(full[t]), (name, k, t)


def test_tree_states_batches_do_not_matter():
    model = BUILDERS["rational_inv"]()
    ks = np.array(list(itertools.product(range(4), repeat=2)))
    a = tree_states(model, ks)
    b = tree_states(model, ks, batch=3)
    assert a.tolist() == b.tolist()
    with pytest.raises(ValueError):
        tree_states(model, np.array([1, 2]))


# ---------------------------------------------------------------- symmetry


def test_symmetry_holds_for_fixtures():
    for build in BUILDERS.values():
        model = build()
        if model.num_colors != 1:
            continue
        for k in [(0, 2), (1, 0, 3), (2, 2, 1, 0)]:
            assert symmetry_check(model, k) is None
        assert symmetry_check(model, (5, 4, 3, 2, 1, 0), trials=5) is None


def test_symmetry_trivial_multiset():
    assert symmetry_check(q2_relu(), (2, 2, 2)) is None


# ---------------------------------------------------------------- degree bounds


def _rank(rows):
    rows = [list(r) for r in rows]
    r = 0
    for c in range(len(rows[0])):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


def rational_fits(xs, ys, h):
    """Some P/Q with deg P, deg Q <= h interpolates the samples (kernel of the linearised system)."""
    rows = [[y * x**j for j in range(h + 1)] + [-(x**j) for j in range(h + 1)] for x, y in zip(xs, ys)]
    return _rank(rows) < 2 * h + 2


def vanishing_difference(vals, order):
    v = list(vals)
    for _ in range(order):
        v = [b - a for a, b in zip(v, v[1:])]
    return all(x == 0 for x in v)


@pytest.mark.parametrize("act,T,expected", [
    (IDENTITY, 6, [0, 0, 1, 1, 2, 2, 3]),
    (SQ, 4, [0, 0, 4, 8, 20]),
])
def test_total_degree_bound_against_finite_differences(act, T, expected):
    model = toy(act, T)
    got = [degree_bound(model, t).numerator for t in range(T + 1)]
    assert got == expected
    rng = np.random.default_rng(2)
    for t, D in enumerate(expected):
        for m in (1, 2, 3):
            a, b = rng.integers(0, 4, m), rng.integers(1, 3, m)
            ks = np.array([a + s * b for s in range(D + 3)])
            S = tree_states(model, ks, iterations=t)
            assert all(vanishing_difference(S[:, c], D + 1) for c in range(2))
            if D:
                # attained along a generic line on the nonlinear channel
                assert not vanishing_difference(S[:, 1], D)


def test_degree_bound_for_polynomial_fixture():
    model = BUILDERS["poly_q2"]()
    assert [degree_bound(model, t).numerator for t in range(4)] == [0, 0, 2, 2]
    assert degree_bound(model, 3).kind == "total"


@pytest.mark.parametrize("name", ["rational_sq", "rational_inv"])
@pytest.mark.parametrize("width", [1, 2, 3])
def test_partial_degree_bound_against_rational_interpolation(name, width):
    model = BUILDERS[name]()
    for t in range(model.iterations + 1):
        bound = degree_bound(model, t, width=width)
        h = bound.numerator
        assert bound.kind == "partial" and h == [0, 0, 4, 4][t]
        xs = list(range(2 * h + 6))
        ks = np.array([[x] + [2 + j for j in range(width - 1)] for x in xs])
        S = tree_states(model, ks, iterations=t)
        for c in range(model.state_dim):
            assert rational_fits(xs, [as_fraction(v) for v in S[:, c]], h)
        if h:
            out = [as_fraction(v) for v in S[:, model.output_coord]]
            assert not rational_fits(xs, out, h - 1)


def test_partial_bound_grows_in_depth_and_width():
    model = toy(RAT, 5)
    assert [degree_bound(model, t).numerator for t in range(4)] == [0, 0, 4, 28]
    deep = degree_bound(model, 5)
    assert not deep.width_independent and deep.numerator is None
    assert degree_bound(model, 5, width=1).numerator < degree_bound(model, 5, width=3).numerator


@pytest.mark.slow
def test_partial_bound_sound_at_height_28():
    model = toy(RAT, 3)
    h = degree_bound(model, 3, width=1).numerator
    xs = list(range(2 * h + 4))
    S = tree_states(model, np.array([[x] for x in xs]), iterations=3)
    assert rational_fits(xs, [as_fraction(v) for v in S[:, 1]], h)


def test_degree_bound_rejects_relu_and_bad_iteration():
    with pytest.raises(ValueError):
        degree_bound(q2_relu(), 1)
    with pytest.raises(ValueError):
        degree_bound(BUILDERS["poly_q2"](), 9)


# ---------------------------------------------------------------- margins


def test_relu_box_passes_small():
    rep = box_margin(q2_relu(), q2(), 2, 6)
    assert rep.verdict == "PASS" and rep.interior_min == 1 and rep.boundary_max == 0
    assert rep.witnesses == [] and rep.check_consistency() == []
    assert "cannot establish" in rep.note
    assert len(rep.values) == 28 and rep.symmetry_reduced


def test_rational_boxes_fail_with_witnesses():
    # frozen from independent exact evaluation on the full trees
    expected = {"rational_sq": F(25, 61), "rational_inv": F(100, 181)}
    for name, imin in expected.items():
        model = BUILDERS[name]()
        rep = box_margin(model, q2(), 3, 8)
        assert rep.verdict == "FAIL" and rep.check_consistency() == []
        assert rep.interior_min == imin
        first = rep.witnesses[0]
        assert first["k"] == [1, 1, 1] and first["region"] == "interior"
        g_value = root_trace(model, (1, 1, 1))[-1][model.output_coord]
        assert as_fraction(g_value) == imin


def test_poly_box_fails_inside():
    rep = box_margin(BUILDERS["poly_q2"](), q2(), 3, 5)
    assert rep.verdict == "FAIL" and rep.check_consistency() == []
    assert (rep.interior_min, rep.boundary_max) == (-17, 0)
    assert rep.witnesses[0]["k"] == [5, 5, 5]
    assert {"k": [1, 1, 3], "region": "interior", "value": "0", "reason": "interior value < 3/5"} in rep.witnesses


def test_rational_sq_verdict_depends_on_width():
    model = BUILDERS["rational_sq"]()
    got = [(box_margin(model, q2(), m, 6).verdict, box_margin(model, q2(), m, 6).interior_min) for m in (1, 2, 3, 4)]
    assert got == [("PASS", F(25, 29)), ("PASS", F(25, 41)), ("FAIL", F(25, 61)), ("FAIL", F(25, 89))]


def test_undecided_when_box_has_no_interior():
    rep = box_margin(q2_relu(), q2(), 2, 0)
    assert rep.verdict == "UNDECIDED" and rep.interior_min is None


def test_box_rejects_wrong_query():
    from gc2gnn.parser import parse

    with pytest.raises(ValueError, match="true exactly"):
        box_margin(q2_relu(), parse("exists>=1 true"), 2, 3)


def test_consistency_checker_flags_tampering():
    rep = box_margin(q2_relu(), q2(), 2, 4)
    rep.verdict = "FAIL"
    assert rep.check_consistency()
    rep = box_margin(q2_relu(), q2(), 2, 4)
    rep.interior_min = F(0)
    assert rep.check_consistency()


def test_report_exports():
    rep = box_margin(BUILDERS["rational_sq"](), q2(), 2, 3)
    obj = json.loads(rep.to_json(include_points=True))
    assert obj["verdict"] == "PASS" and obj["interior_min"] == "25/41"
    assert obj["family"] == {"m": 2, "k_max": 3, "symmetry_reduced": True}
    assert len(obj["records"]) == obj["points"] == len(rep.values)
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == ["k1", "k2", "value_num", "value_den", "region"]
    assert len(rows) == len(rep.values) + 1
    for row in rows[1:]:
        k1, k2 = int(row[0]), int(row[1])
        assert row[4] == ("interior" if min(k1, k2) >= 1 else "boundary")


def test_float_box_agrees_with_exact():
    model = BUILDERS["rational_inv"]()
    a = box_margin(model, q2(), 2, 10)
    b = box_margin(model, q2(), 2, 10, exact=False)
    assert a.verdict == b.verdict
    assert np.allclose(b.values.astype(float), a.values.astype(float))


# ---------------------------------------------------------------- curves


def test_relu_curve_gap_is_one():
    rep = curve_sweep(q2_relu(), 3, (1, 1, 1), range(1, 11))
    assert rep.differences() == [1] * 10 and rep.collapsed == []


def test_rational_curve_values():
    rep = curve_sweep(BUILDERS["rational_sq"](), 2, (1, 2), [1, 2, 3])
    assert [r.k_interior for r in rep.rows] == [(1, 1), (2, 4), (3, 9)]
    assert [r.k_boundary for r in rep.rows] == [(1, 0), (2, 0), (3, 0)]
    model = BUILDERS["rational_sq"]()
    for r in rep.rows:
        assert r.interior == root_trace(model, r.k_interior)[-1][model.output_coord]
        assert r.boundary == root_trace(model, r.k_boundary)[-1][model.output_coord]
    obj = json.loads(rep.to_json())
    assert [row["t"] for row in obj["rows"]] == [1, 2, 3]
    assert rep.to_csv().splitlines()[0] == "t,interior,boundary,difference"


def test_curve_float_overflow_is_reported():
    with pytest.raises(OverflowError):
        curve_sweep(q2_relu(), 2, (40, 1), [10], exact=False)
    with pytest.raises(ValueError):
        curve_sweep(q2_relu(), 2, (1,), [1])


# ---------------------------------------------------------------- sign patterns


def test_corrected_polynomial_passes():
    for m in (1, 2, 3):
        assert sign_check(corrected_polynomial(m), m, 5, 1) is None


def test_quartic_polynomial_counterexample():
    w = sign_check(quartic_polynomial(3), 3, 5, 1)
    assert w.point == (2, 0, 0) and w.value == 13 and w.branch == "outside"


def test_sign_check_asymmetric_and_cube_branch():
    x = MPoly.var(2, 0)
    w = sign_check(x - 1, 2, 3, 1)
    assert w.branch == "cube" and w.point == (0, 0)
    with pytest.raises(ValueError):
        sign_check(x, 3, 2, 1)
