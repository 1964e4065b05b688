"""Finite checks around the tree family T[k_1..k_m].

These are falsifiers: a FAIL inside a finite box is evidence against a
candidate model, a PASS only means no violation was found in that box.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .formula import Formula
from .gnn import GnnModel, dumps, run
from .graph import disjoint_union, gen_tree
from .numeric import MPoly, as_rat, format_rat
from .parser import render
from .semantics import eval_all

DEFAULT_EPS_PRIME = Fraction(1, 10)


# --------------------------------------------------------------------------
# dominant directions


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


@dataclass(frozen=True)
class DominanceWitness:
    S: tuple
    x_star: tuple
    u: tuple
    S2: tuple | None = None
    y_star: tuple | None = None
    construction: str = "norm"


def _norm_maximizer(S):
    return max(S, key=lambda x: (_dot(x, x), x))


def dominant_direction(S, S2=None) -> DominanceWitness:
    """Pick ``x*`` in ``S`` (and ``y*`` in ``S2``) and ``u`` making them strict maximizers of ``<., u>``.

    ``x*`` is a Euclidean-norm maximizer and ``u = x*`` (``u = x* + y*`` for two
    sets). That sum does not always work for two sets, e.g.
    S = {(3,0),(2,2)}, S2 = {(0,3),(2,2)}; then ``u`` falls back to the
    base-``N`` weights ``(N^(p-1), ..., N, 1)`` with ``N`` above every entry,
    under which the lexicographic maxima are strict maximizers.
    """
    S = tuple(sorted({tuple(int(v) for v in x) for x in S}))
    if not S:
        raise ValueError("S must be non-empty")
    p = len(S[0])
    if any(len(x) != p or min(x, default=0) < 0 for x in S):
        raise ValueError("S must hold non-negative vectors of one length")
    if len(S) == 1 and not any(S[0]):
        raise ValueError("S = {0} has no dominant direction")
    x_star = _norm_maximizer(S)
    if S2 is None:
        return DominanceWitness(S, x_star, x_star)
    S2 = tuple(sorted({tuple(int(v) for v in y) for y in S2}))
    if not S2 or any(len(y) != p or min(y, default=0) < 0 for y in S2):
        raise ValueError("S2 must hold non-negative vectors of the same length as S")
    y_star = _norm_maximizer(S2)
    w = DominanceWitness(S, x_star, tuple(a + b for a, b in zip(x_star, y_star)), S2, y_star, "norm")
    if verify_dominance(w) is None:
        return w
    base = max(max(x) for x in S + S2) + 1
    u = tuple(base ** (p - 1 - i) for i in range(p))
    return DominanceWitness(S, max(S), u, S2, max(S2), "lexicographic")


def _dominance_failure(T, star, u, name):
    if star not in T:
        return {"set": name, "reason": "chosen vector not in set", "vector": star}
    top = _dot(star, u)
    if len(T) == 1:
        if any(star) and top <= 0:
            return {"set": name, "reason": "singleton not positive", "vector": star, "value": top}
        return None
    for x in T:
        if x != star and _dot(x, u) >= top:
            return {"set": name, "reason": "not a strict maximizer", "vector": x,
                    "value": _dot(x, u), "star_value": top}
    return None


def verify_dominance(w: DominanceWitness):
    """Brute-force check of every strict inequality; returns a counterexample dict or None."""
    bad = _dominance_failure(w.S, w.x_star, w.u, "S")
    if bad is None and w.S2 is not None:
        bad = _dominance_failure(w.S2, w.y_star, w.u, "S2")
    return bad


# --------------------------------------------------------------------------
# tree-family evaluation


def _workers(workers):
    if workers is None:
        workers = int(os.environ.get("GC2GNN_WORKERS", "1"))
    return max(1, workers)


def _tree_states_job(job):
    model, ks, exact, T = job
    return _tree_states_chunk(model, ks, exact, T)


def tree_states(model: GnnModel, ks, exact: bool = True, iterations: int | None = None,
                batch: int = 20000, workers: int | None = None) -> np.ndarray:
    """Root state of every ``T[k]`` (rows of ``ks``) after ``iterations`` steps.

    Works on the quotient of the tree: root, each child ``x_j``, and one
    representative leaf per child (all leaves of ``x_j`` share one state), so
    the cost does not depend on the leaf counts. Chunks of ``batch`` points
    are spread over ``workers`` processes (default: ``GC2GNN_WORKERS`` or 1);
    results do not depend on the worker count.
    """
    ks = np.asarray(ks)
    if ks.ndim != 2:
        raise ValueError("ks must be a 2-d array of leaf counts")
    T = model.iterations if iterations is None else iterations
    jobs = [(model, ks[lo:lo + batch], exact, T) for lo in range(0, len(ks), batch)]
    workers = _workers(workers)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_tree_states_job, jobs))
    else:
        parts = [_tree_states_job(j) for j in jobs]
    if not parts:
        return np.empty((0, model.state_dim), dtype=object if exact else float)
    return np.concatenate(parts)


def _tree_states_chunk(model: GnnModel, K, exact: bool, T: int) -> np.ndarray:
    n_pts, m = K.shape
    d = model.state_dim
    nodes = 2 * m + 1
    x0 = model.initial_states([1], exact)[0]
    Kc = K.astype(object) if exact else K.astype(float)
    X = np.tile(x0, (n_pts, nodes, 1))
    for t in range(T):
        layer = model.layer(t)
        cols = layer.neighbor_columns
        # only nodes within distance T-1-t of the root still matter
        left = T - t
        need = nodes if left >= 3 else (m + 1 if left == 2 else 1)
        agg = np.zeros((n_pts, need, d), dtype=object) if exact else np.zeros((n_pts, need, d))
        if cols:
            Xr = X[:, :, cols]
            kids = Xr[:, 1:m + 1]
            agg[:, 0, cols] = kids.sum(axis=1)
            if need > 1:
                agg[:, 1:m + 1, cols] = Xr[:, :1] + Kc[:, :, None] * Xr[:, m + 1:]
            if need > m + 1:
                agg[:, m + 1:, cols] = kids
        new = layer.apply(X[:, :need].reshape(-1, d), agg.reshape(-1, d), exact)
        X[:, :need] = new.reshape(n_pts, need, d)
    return X[:, 0].copy()


def root_trace(model: GnnModel, k, exact: bool = True) -> list:
    """Root state at every iteration, computed on the actual tree graph."""
    g = gen_tree(k, model.num_colors)
    return [X[0] for X in run(model, g, exact)]


# --------------------------------------------------------------------------
# symmetry


def _distinct_permutations(k):
    return sorted(set(itertools.permutations(k)))


def symmetry_check(model: GnnModel, k, trials: int | None = None, seed: int = 0):
    """Compare root embeddings (every iteration) of T[k] and T[pi(k)].

    All distinct permutations when ``trials`` is None, else ``trials`` random
    ones. Returns None or a witness dict.
    """
    k = tuple(int(v) for v in k)
    perms = _distinct_permutations(k)
    if trials is not None and trials < len(perms):
        rng = np.random.default_rng(seed)
        perms = [tuple(rng.permutation(k).tolist()) for _ in range(trials)]
    perms = [k] + [p for p in perms if p != k]
    if len(perms) == 1:
        return None
    trees = [gen_tree(p, model.num_colors) for p in perms]
    union, offsets = disjoint_union(*trees)
    trace = run(model, union, exact=True)
    for t, X in enumerate(trace):
        ref = X[offsets[0]]
        for p, off in zip(perms[1:], offsets[1:]):
            other = X[off]
            if any(a != b for a, b in zip(ref, other)):
                return {"k": list(k), "permuted": list(p), "iteration": t,
                        "reference": [format_rat(v) for v in ref],
                        "other": [format_rat(v) for v in other]}
    return None


# --------------------------------------------------------------------------
# degree bounds


@dataclass(frozen=True)
class DegreeBound:
    """Bound on the degree of the root embedding of T[k] as a function of k.

    ``kind == "total"``: total degree (polynomial models, independent of m).
    ``kind == "partial"``: degree in one variable ``k_1`` (rational models);
    ``width_poly`` gives that bound as a polynomial in ``m - 1``, so
    ``width_independent`` tells whether it grows with m.
    """

    iteration: int
    kind: str
    numerator: int | None
    denominator: int | None
    width_poly: tuple = ()
    width: int | None = None

    @property
    def width_independent(self) -> bool:
        return all(c == 0 for c in self.width_poly[1:])


def _layer_degree(layer) -> int:
    degs = []
    for act in layer.activations:
        pair = act.degree
        if pair is None:
            raise ValueError(f"degree bounds need polynomial or rational activations, got {act.kind}")
        degs.append(max(pair))
    return max(degs)


def _padd(*ps):
    n = max(len(p) for p in ps)
    return tuple(sum(p[i] if i < len(p) else 0 for p in ps) for i in range(n))


def _pscale(p, a):
    return tuple(a * c for c in p)


def _pshift(p):
    # multiply by w = m - 1
    return (0,) + tuple(p)


def degree_bound(model: GnnModel, t: int, width: int | None = None) -> DegreeBound:
    if not 0 <= t <= model.iterations:
        raise ValueError(f"iteration {t} outside [0, {model.iterations}]")
    kinds = model.activation_kinds()
    if kinds & {"relu", "clipped_relu"}:
        raise ValueError("degree bounds need polynomial or rational activations")
    if "rational" not in kinds:
        s = x = leaf = 0
        for step in range(t):
            layer = model.layer(step)
            a = _layer_degree(layer)
            if layer.neighbor_columns:
                s, x, leaf = max(s, x), max(x, s, leaf + 1), max(leaf, x)
            s, x, leaf = a * s, a * x, a * leaf
        return DegreeBound(t, "total", s, 0, (s,), width)

    # heights max(deg num, deg den) in k_1, as polynomials in w = m - 1
    s = x1 = xo = l1 = lo = (0,)
    for step in range(t):
        layer = model.layer(step)
        a = _layer_degree(layer)
        if layer.neighbor_columns:
            s, x1, xo, l1, lo = (
                _padd(s, s, x1, _pshift(xo)),
                _padd(x1, s, l1, (1,)),
                _padd(xo, s, lo),
                _padd(l1, x1),
                _padd(lo, xo),
            )
        s, x1, xo, l1, lo = (_pscale(v, a) for v in (s, x1, xo, l1, lo))
    s = tuple(s)
    while len(s) > 1 and s[-1] == 0:
        s = s[:-1]
    if width is not None:
        h = sum(c * (width - 1) ** i for i, c in enumerate(s))
    else:
        h = s[0] if len(s) == 1 else None
    return DegreeBound(t, "partial", h, h, s, width)


# --------------------------------------------------------------------------
# margin reports


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(float(v))
    return format_rat(v)


@dataclass
class MarginReport:
    query: str
    model: str
    m: int
    k_max: int
    eps_prime: Fraction
    ks: np.ndarray
    values: np.ndarray
    interior_min: object
    boundary_max: object
    verdict: str
    witnesses: list = field(default_factory=list)
    symmetry_reduced: bool = True
    note: str = ""

    @property
    def upper(self) -> Fraction:
        return Fraction(1, 2) + self.eps_prime

    @property
    def lower(self) -> Fraction:
        return Fraction(1, 2) - self.eps_prime

    def regions(self) -> np.ndarray:
        return np.where((self.ks >= 1).all(axis=1), "interior", "boundary")

    def check_consistency(self) -> list[str]:
        """Problems with the report's own bookkeeping; empty when consistent."""
        problems = []
        interior = (self.ks >= 1).all(axis=1)
        vals_i = self.values[interior]
        vals_b = self.values[~interior]
        imin = min(vals_i) if len(vals_i) else None
        bmax = max(vals_b) if len(vals_b) else None
        if imin != self.interior_min:
            problems.append("interior_min does not match the records")
        if bmax != self.boundary_max:
            problems.append("boundary_max does not match the records")
        passed = imin is not None and bmax is not None and imin >= self.upper and bmax <= self.lower
        failed = (imin is not None and imin < self.upper) or (bmax is not None and bmax > self.lower)
        expected = "PASS" if passed else ("FAIL" if failed else "UNDECIDED")
        if expected != self.verdict:
            problems.append(f"verdict {self.verdict} but records imply {expected}")
        if self.verdict == "FAIL" and not self.witnesses:
            problems.append("FAIL without witnesses")
        for w in self.witnesses:
            k = tuple(w["k"])
            region = "interior" if min(k) >= 1 else "boundary"
            if region != w["region"]:
                problems.append(f"witness {k} has the wrong region")
            v = as_rat(w["value"]) if isinstance(w["value"], str) else w["value"]
            if region == "interior" and not v < self.upper:
                problems.append(f"interior witness {k} does not violate the margin")
            if region == "boundary" and not v > self.lower:
                problems.append(f"boundary witness {k} does not violate the margin")
        if self.verdict == "PASS" and "uniform" in self.note and "not" not in self.note:
            problems.append("PASS text claims uniform expressivity")
        return problems

    def summary(self) -> dict:
        return {
            "query": self.query,
            "model": self.model,
            "family": {"m": self.m, "k_max": self.k_max, "symmetry_reduced": self.symmetry_reduced},
            "eps_prime": format_rat(self.eps_prime),
            "points": int(len(self.values)),
            "interior_min": None if self.interior_min is None else _fmt(self.interior_min),
            "boundary_max": None if self.boundary_max is None else _fmt(self.boundary_max),
            "verdict": self.verdict,
            "note": self.note,
            "witnesses": self.witnesses,
        }

    def to_json(self, include_points: bool = False) -> str:
        obj = self.summary()
        if include_points:
            obj["records"] = [
                {"k": k.tolist(), "value": _fmt(v), "region": r}
                for k, v, r in zip(self.ks, self.values, self.regions())
            ]
        return dumps(obj) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"k{i + 1}" for i in range(self.m)] + ["value_num", "value_den", "region"])
        for k, v, r in zip(self.ks, self.values, self.regions()):
            if isinstance(v, float):
                num, den = repr(float(v)), "1"
            else:
                num, den = str(int(v.numerator)), str(int(v.denominator))
            w.writerow(list(map(int, k)) + [num, den, r])
        return buf.getvalue()


PASS_NOTE = ("no violation found in box; a finite box cannot establish uniform expressivity")
FAIL_NOTE = "margin violated inside the box; this candidate does not express the query uniformly"
UNDECIDED_NOTE = "box lacks interior or boundary points; nothing to compare"


def _oracle_spot_check(query: Formula, m: int, k_max: int, model: GnnModel, n_random: int = 50, seed: int = 0):
    """Confirm on a sample of trees that the query is true exactly on the interior."""
    rng = np.random.default_rng(seed)
    small = list(itertools.product(range(min(k_max, 2) + 1), repeat=m))
    sample = small + [tuple(rng.integers(0, k_max + 1, size=m).tolist()) for _ in range(n_random)]
    for k in sample:
        g = gen_tree(k, max(model.num_colors, 1))
        truth = bool(eval_all(query, g)[0])
        if truth != (min(k) >= 1):
            raise ValueError(
                f"query {render(query)} is {'true' if truth else 'false'} at T{list(k)}; "
                "box_margin expects it true exactly when every k_i >= 1"
            )


def _margin_verdict(interior_min, boundary_max, upper, lower):
    if interior_min is not None and boundary_max is not None:
        if interior_min >= upper and boundary_max <= lower:
            return "PASS"
    if (interior_min is not None and interior_min < upper) or (boundary_max is not None and boundary_max > lower):
        return "FAIL"
    return "UNDECIDED"


def box_margin(model: GnnModel, query: Formula, m: int, k_max: int, eps_prime=DEFAULT_EPS_PRIME,
               exact: bool = True, max_witnesses: int = 10, symmetry_probe_kmax: int = 2,
               workers: int | None = None) -> MarginReport:
    """Evaluate the root output on every ``T[k]``, ``k`` in ``{0..k_max}^m``.

    Interior points (all ``k_i >= 1``) must reach ``1/2 + eps_prime``, boundary
    points (some ``k_i = 0``) must stay at or below ``1/2 - eps_prime``. Only
    non-decreasing ``k`` are evaluated once :func:`symmetry_check` passes for
    every multiset with entries ``<= symmetry_probe_kmax`` at width ``m``.
    """
    eps_prime = as_rat(eps_prime)
    _oracle_spot_check(query, m, k_max, model)
    reduced = all(
        symmetry_check(model, k) is None
        for k in itertools.combinations_with_replacement(range(symmetry_probe_kmax + 1), m)
    )
    if reduced:
        ks = np.array(list(itertools.combinations_with_replacement(range(k_max + 1), m)), dtype=np.int64)
    else:
        ks = np.array(list(itertools.product(range(k_max + 1), repeat=m)), dtype=np.int64)
    ks = ks.reshape(-1, m)
    values = tree_states(model, ks, exact, workers=workers)[:, model.output_coord]
    interior = (ks >= 1).all(axis=1)
    interior_min = min(values[interior]) if interior.any() else None
    boundary_max = max(values[~interior]) if (~interior).any() else None
    upper = Fraction(1, 2) + eps_prime
    lower = Fraction(1, 2) - eps_prime
    verdict = _margin_verdict(interior_min, boundary_max, upper, lower)

    witnesses = []
    if verdict == "FAIL":
        bad = np.where(interior, values < upper, values > lower) if exact else None
        if bad is None:
            bad = np.array([(v < float(upper)) if i else (v > float(lower)) for v, i in zip(values, interior)])
        idx = np.flatnonzero(bad)
        # worst offenders first, then the earliest ones
        worst = []
        if interior.any() and interior_min < upper:
            worst.append(int(np.flatnonzero(interior)[np.argmin(values[interior])]))
        if (~interior).any() and boundary_max > lower:
            worst.append(int(np.flatnonzero(~interior)[np.argmax(values[~interior])]))
        chosen = list(dict.fromkeys(worst + idx[:max_witnesses].tolist()))[:max_witnesses]
        for i in chosen:
            region = "interior" if interior[i] else "boundary"
            witnesses.append({
                "k": ks[i].tolist(),
                "region": region,
                "value": _fmt(values[i]),
                "reason": f"{region} value {'<' if interior[i] else '>'} {format_rat(upper if interior[i] else lower)}",
            })
    note = {"PASS": PASS_NOTE, "FAIL": FAIL_NOTE, "UNDECIDED": UNDECIDED_NOTE}[verdict]
    return MarginReport(render(query), model.name, m, k_max, eps_prime, ks, values,
                        interior_min, boundary_max, verdict, witnesses, reduced, note)


# --------------------------------------------------------------------------
# curve sweeps


@dataclass(frozen=True)
class CurveRow:
    t: int
    k_interior: tuple
    k_boundary: tuple
    interior: object
    boundary: object

    @property
    def difference(self):
        return self.interior - self.boundary


@dataclass
class CurveReport:
    model: str
    m: int
    u: tuple
    rows: list
    eps_prime: Fraction = DEFAULT_EPS_PRIME

    def differences(self) -> list:
        return [r.difference for r in self.rows]

    @property
    def min_difference(self):
        return min(self.differences()) if self.rows else None

    @property
    def collapsed(self) -> list:
        """``t`` values where the gap is below the ``2 * eps_prime`` a uniform expresser needs."""
        return [r.t for r in self.rows if r.difference < 2 * self.eps_prime]

    def to_json(self) -> str:
        return dumps({
            "model": self.model,
            "m": self.m,
            "u": list(self.u),
            "eps_prime": format_rat(self.eps_prime),
            "rows": [
                {"t": r.t, "k_interior": list(r.k_interior), "k_boundary": list(r.k_boundary),
                 "interior": _fmt(r.interior), "boundary": _fmt(r.boundary),
                 "difference": _fmt(r.difference)}
                for r in self.rows
            ],
            "collapsed_at": self.collapsed,
        }) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "interior", "boundary", "difference"])
        for r in self.rows:
            w.writerow([r.t, _fmt(r.interior), _fmt(r.boundary), _fmt(r.difference)])
        return buf.getvalue()


def curve_sweep(model: GnnModel, m: int, u: Sequence[int], t_values: Sequence[int],
                exact: bool = True, eps_prime=DEFAULT_EPS_PRIME) -> CurveReport:
    """Root outputs on ``T[t^u_1, ..., t^u_m]`` versus ``T[t^u_1, ..., t^u_(m-1), 0]``."""
    u = tuple(int(v) for v in u)
    if len(u) != m or min(u) < 0:
        raise ValueError("u must hold m non-negative integers")
    inner = [tuple(t**e for e in u) for t in t_values]
    outer = [k[:-1] + (0,) for k in inner]
    ks = np.array(inner + outer, dtype=object).reshape(-1, m)
    if not exact and any(v > 2**53 for v in ks.ravel()):
        raise OverflowError("leaf counts exceed the float64 integer range")
    ks = ks.astype(np.int64) if max(ks.ravel(), default=0) < 2**62 else ks
    vals = tree_states(model, ks, exact)[:, model.output_coord]
    if not exact and not np.all(np.isfinite(vals.astype(float))):
        raise OverflowError("non-finite values in float mode")
    n = len(inner)
    rows = [CurveRow(t, inner[i], outer[i], vals[i], vals[n + i]) for i, t in enumerate(t_values)]
    return CurveReport(model.name, m, u, rows, as_rat(eps_prime))


# --------------------------------------------------------------------------
# sign patterns


@dataclass(frozen=True)
class SignWitness:
    point: tuple
    value: Fraction
    branch: str  # "cube" (needs >= eps) or "outside" (needs <= -eps)


def sign_check(p: MPoly, m: int, k_max: int, eps) -> SignWitness | None:
    """Check ``p >= eps`` on ``{0,1}^m`` and ``p <= -eps`` on the rest of ``{0..k_max}^m``.

    Points are visited in order of their sorted multiset; for a symmetric
    ``p`` only non-increasing points are visited.
    """
    if p.nvars != m:
        raise ValueError(f"polynomial has {p.nvars} variables, expected {m}")
    eps = as_rat(eps)
    if p.is_symmetric():
        points = (tuple(reversed(c)) for c in itertools.combinations_with_replacement(range(k_max + 1), m))
    else:
        points = itertools.product(range(k_max + 1), repeat=m)
    for pt in points:
        v = p(pt)
        if max(pt, default=0) <= 1:
            if v < eps:
                return SignWitness(pt, v, "cube")
        elif v > -eps:
            return SignWitness(pt, v, "outside")
    return None


def quartic_polynomial(m: int) -> MPoly:
    """The naive quartic ``1 - sum x_i^2 + sum x_i^4``; positive at (2, 0, ..., 0)."""
    return 1 - MPoly.power_sum(m, 2) + MPoly.power_sum(m, 4)


def corrected_polynomial(m: int) -> MPoly:
    """``1 - sum x_i^2 (x_i - 1)^2``: 1 on the cube, at most -3 elsewhere on N^m."""
    total = MPoly.constant(m, 1)
    for i in range(m):
        x = MPoly.var(m, i)
        total = total - x * x * (x - 1) * (x - 1)
    return total
