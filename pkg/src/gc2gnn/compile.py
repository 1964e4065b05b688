"""Logic-to-weights compilers and the polynomial network constructor.

* :func:`compile_gc2_relu` turns any GC2 query into a recurrent clipped-ReLU
  GNN whose coordinates hold the truth values of the subformulas.
* :func:`compile_rgc2_poly` turns an RGC2 query into a polynomial GNN whose
  non-negated coordinates are 0 when false and at least 1 when true.
* :func:`realize_polynomial` builds a feedforward network with a fixed
  polynomial activation that computes a given univariate polynomial exactly.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import CompileError, SingularMatrixError
from .formula import (
    And,
    Col,
    ExistsGeq,
    Formula,
    Not,
    RgcClass,
    is_desugared,
    max_color,
    rgc2_classify,
    rgc2_obstruction,
    subformulas,
)
from .gnn import CLIPPED_RELU, IDENTITY, Activation, DecisionRule, GnnLayer, GnnModel
from .numeric import Poly, as_rat, falling_factorial, format_rat, rank, solve_linear_exact
from .parser import render


def _zeros(d):
    return [[0] * d for _ in range(d)]


def _num_colors(f: Formula, num_colors: int | None) -> int:
    needed = max_color(f)
    if num_colors is None:
        return needed
    if needed > num_colors:
        raise CompileError(f"query mentions color {needed} but only {num_colors} colors are available")
    return num_colors


def _init_matrix(subs, num_colors):
    init = [[0] * num_colors for _ in subs]
    for i, q in enumerate(subs):
        if isinstance(q, Col):
            init[i][q.color - 1] = 1
    return init


def compile_gc2_relu(f: Formula, num_colors: int | None = None) -> GnnModel:
    """Recurrent clipped-ReLU GNN deciding ``f`` exactly.

    Coordinate ``i`` tracks subformula ``Q_i``. After ``d`` iterations every
    coordinate holds the 0/1 truth value of its subformula; all weights are
    integers.
    """
    if not is_desugared(f):
        raise CompileError("compile_gc2_relu needs a desugared formula; call desugar() first")
    num_colors = _num_colors(f, num_colors)
    subs = subformulas(f)
    d = len(subs)
    A, B, c = _zeros(d), _zeros(d), [0] * d
    for i, q in enumerate(subs):
        if isinstance(q, Col):
            A[i][i] = 1
        elif isinstance(q, And):
            A[i][subs.position(q.left)] += 1
            A[i][subs.position(q.right)] += 1
            c[i] = -1
        elif isinstance(q, Not):
            A[i][subs.position(q.child)] = -1
            c[i] = 1
        elif isinstance(q, ExistsGeq):
            B[i][subs.position(q.child)] = 1
            c[i] = 1 - q.count
        else:  # pragma: no cover - excluded by is_desugared
            raise CompileError(f"unexpected node {q!r}")
    layer = GnnLayer(A, B, c, [CLIPPED_RELU] * d)
    return GnnModel(
        num_colors=num_colors,
        init=_init_matrix(subs, num_colors),
        layers=[layer],
        iterations=d,
        output_coord=d - 1,
        decision=DecisionRule(1, 0),
        recurrent=True,
        name=f"relu: {render(f)}",
    )


def compile_rgc2_poly(f: Formula, num_colors: int | None = None) -> GnnModel:
    """Recurrent polynomial GNN for an RGC2 query.

    Layout follows the subformula enumeration: colour atoms are copied from
    the initial encoding, a negated atom is ``1 - atom``, ``exists>=K col(i)``
    applies ``X(X-1)...(X-K+1)`` to the neighbour count, each 1-hop lift is a
    plain neighbour sum, and a top-level negation is ``1 - inner``.
    """
    cls = rgc2_classify(f)
    if cls is RgcClass.NOT_RGC2:
        bad = rgc2_obstruction(f)
        raise CompileError(f"query is not in RGC2; offending subterm: {render(bad)}")
    num_colors = _num_colors(f, num_colors)
    subs = subformulas(f)
    d = len(subs)
    A, B, c = _zeros(d), _zeros(d), [0] * d
    acts = [IDENTITY] * d
    for i, q in enumerate(subs):
        if isinstance(q, Col):
            A[i][i] = 1
        elif isinstance(q, Not):
            A[i][subs.position(q.child)] = -1
            c[i] = 1
        elif isinstance(q, ExistsGeq):
            B[i][subs.position(q.child)] = 1
            if isinstance(q.child, Col) and q.count > 1:
                acts[i] = Activation.polynomial(falling_factorial(q.count))
        else:  # pragma: no cover - excluded by the RGC2 check
            raise CompileError(f"unexpected node {q!r}")
    layer = GnnLayer(A, B, c, acts)
    return GnnModel(
        num_colors=num_colors,
        init=_init_matrix(subs, num_colors),
        layers=[layer],
        iterations=d,
        output_coord=d - 1,
        decision=DecisionRule(1, 0),
        recurrent=True,
        name=f"poly: {render(f)}",
    )


# --------------------------------------------------------------------------
# polynomial networks


@dataclass(frozen=True)
class PolyLayer:
    weights: tuple  # (out x in) for the first layer ``in`` is 1
    bias: tuple


@dataclass(frozen=True)
class PolyNetwork:
    """Feedforward network ``x -> w . sigma(W_L ... sigma(W_1 x + b_1) ...) + b``."""

    sigma: Poly
    hidden: tuple
    out_weights: tuple
    out_bias: Fraction
    shifts: tuple = ()

    @property
    def depth(self) -> int:
        return len(self.hidden)

    @property
    def widths(self) -> tuple:
        return tuple(len(l.bias) for l in self.hidden)

    def __call__(self, x):
        h = [as_rat(x)] if not isinstance(x, (list, tuple)) else list(x)
        for layer in self.hidden:
            h = [self.sigma(sum((w * v for w, v in zip(row, h)), Fraction(0)) + b)
                 for row, b in zip(layer.weights, layer.bias)]
        return sum((w * v for w, v in zip(self.out_weights, h)), Fraction(0)) + self.out_bias

    def unit_polynomials(self) -> list[list[Poly]]:
        """Each hidden unit as an explicit polynomial in the input."""
        h = [Poly.x()]
        out = []
        for layer in self.hidden:
            h = [self.sigma.compose(sum((p * w for w, p in zip(row, h)), Poly()) + b)
                 for row, b in zip(layer.weights, layer.bias)]
            out.append(h)
        return out

    def polynomial(self) -> Poly:
        units = self.unit_polynomials()[-1] if self.hidden else [Poly.x()]
        return sum((p * w for w, p in zip(self.out_weights, units)), Poly()) + self.out_bias

    def to_json(self) -> dict:
        return {
            "sigma": self.sigma.to_strings(),
            "hidden": [
                {"weights": [[format_rat(w) for w in row] for row in l.weights],
                 "bias": [format_rat(b) for b in l.bias]}
                for l in self.hidden
            ],
            "out_weights": [format_rat(w) for w in self.out_weights],
            "out_bias": format_rat(self.out_bias),
        }


def certify(net: PolyNetwork, target: Poly, points: Sequence | None = None) -> bool:
    """Exact agreement at ``2 * deg + 1`` distinct points (a polynomial identity certificate)."""
    if points is None:
        deg = max(int(max(target.degree, 0)), int(max(net.polynomial().degree, 0)))
        points = [Fraction(i, 1) - deg for i in range(2 * deg + 1)]
    return all(net(x) == target(x) for x in points)


def _coefficient_columns(polys: Sequence[Poly], degree: int) -> list[list[Fraction]]:
    """Square-ish matrix whose column ``j`` holds the coefficients of ``polys[j]``."""
    return [[p.coeffs[r] if r < len(p.coeffs) else Fraction(0) for p in polys] for r in range(degree + 1)]


def _solve_in_basis(basis: Sequence[Poly], target: Poly) -> list[Fraction]:
    deg = len(basis) - 1
    if target.degree > deg:
        raise CompileError(f"target of degree {target.degree} exceeds basis degree {deg}")
    rhs = [target.coeffs[r] if r < len(target.coeffs) else Fraction(0) for r in range(deg + 1)]
    return solve_linear_exact(_coefficient_columns(basis, deg), rhs)


def _pick_units(sigma: Poly, pre_polys, degree: int, max_candidates: int):
    """Greedily choose pre-activations whose images under sigma, with 1, span degree <= ``degree``.

    ``pre_polys`` yields ``(label, pre_activation_poly)`` candidates in order.
    """
    chosen = []
    images = [Poly([1])]
    for n, (label, pre) in enumerate(pre_polys):
        if len(images) == degree + 1 or n >= max_candidates:
            break
        img = sigma.compose(pre)
        if img.degree > degree:
            continue
        cols = _coefficient_columns(images + [img], degree)
        if rank(list(map(list, zip(*cols)))) == len(images) + 1:
            chosen.append((label, pre))
            images.append(img)
    if len(images) < degree + 1:
        raise SingularMatrixError(
            f"no basis for degree <= {degree} among {max_candidates} shifted activations",
            [label for label, _ in chosen],
        )
    return chosen, images


def _shift_candidates(m: int):
    """Integer shifts in the order 1..m first, then 0, -1, m+1, -2, m+2, ..."""
    yield from range(1, m + 1)
    for k in itertools.count():
        yield -k
        yield m + 1 + k


def realize_polynomial(sigma: Poly, target: Poly, max_candidates: int = 200) -> PolyNetwork:
    """Network with activation ``sigma`` (degree >= 2) computing ``target`` exactly.

    Hidden layer ``l`` spans every polynomial of degree ``<= m**l`` (``m = deg
    sigma``): layer 1 uses ``sigma(X + s)`` for integer shifts ``s``; layer
    ``l + 1`` uses ``sigma((X + r)**e + s)`` where ``e = m**l`` and
    ``(X + r)**e`` is an affine read-out of layer ``l``. Depth is the least
    ``L`` with ``m**L >= deg target``; widths depend on that degree only.
    """
    if not isinstance(sigma, Poly) or sigma.degree < 2:
        raise CompileError("activation must be a polynomial of degree >= 2")
    if not isinstance(target, Poly):
        target = Poly(target)
    m = sigma.degree
    M = max(int(max(target.degree, 0)), 1)

    if target == sigma:
        layer = PolyLayer(((Fraction(1),),), (Fraction(0),))
        return PolyNetwork(sigma, (layer,), (Fraction(1),), Fraction(0), shifts=((0,),))

    depth = 1
    while m**depth < M:
        depth += 1

    hidden = []
    all_shifts = []
    prev_units: list[Poly] = [Poly.x()]  # polynomials computed by the previous layer
    prev_is_input = True
    for level in range(1, depth + 1):
        degree = m**level
        e = m ** (level - 1)
        if level == 1:
            cands = ((s, Poly([s, 1])) for s in _shift_candidates(m))
        else:
            cands = (((r, s), Poly([r, 1]) ** e + s)
                     for r, s in _pair_candidates(m))
        chosen, images = _pick_units(sigma, cands, degree, max_candidates)
        weights, bias = [], []
        for label, pre in chosen:
            if prev_is_input:
                weights.append((pre.coeffs[1] if len(pre.coeffs) > 1 else Fraction(0),))
                bias.append(pre.coeffs[0] if pre.coeffs else Fraction(0))
            else:
                # pre = const + sum_j w_j * prev_units[j]; solve in basis {1, prev units}
                coeffs = _solve_in_basis([Poly([1])] + prev_units, pre)
                bias.append(coeffs[0])
                weights.append(tuple(coeffs[1:]))
        hidden.append(PolyLayer(tuple(weights), tuple(bias)))
        all_shifts.append(tuple(label for label, _ in chosen))
        prev_units = images[1:]
        prev_is_input = False

    coeffs = _solve_in_basis([Poly([1])] + prev_units, target)
    return PolyNetwork(sigma, tuple(hidden), tuple(coeffs[1:]), coeffs[0], shifts=tuple(all_shifts))


def _pair_candidates(m: int):
    """(r, s) pairs: for each centre r = 0, 1, -1, 2, -2, ... the shifts 1..m then more."""
    for k in itertools.count():
        for r in ((0,) if k == 0 else (k, -k)):
            for s in range(0, m + 1):
                yield r, s
