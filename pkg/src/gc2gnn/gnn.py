"""Aggregate-combine GNNs with sum aggregation and per-coordinate activations.

One iteration computes, for every vertex ``v``::

    z(v)   = A @ xi(v) + B @ sum(xi(w) for w in N(v)) + c
    xi'(v) = (act_1(z_1), ..., act_d(z_d))

Exact mode works on numpy object arrays holding ``int`` / ``gmpy2.mpq``;
float mode uses float64.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import gmpy2
import numpy as np

from .errors import DimensionError, ModelFormatError, PoleError
from .graph import LabeledGraph
from .numeric import Poly, RationalFn, as_rat, fast_rat, format_rat

ACTIVATION_KINDS = ("identity", "relu", "clipped_relu", "polynomial", "rational")
_MPQ_ONE = gmpy2.mpq(1)


@dataclass(frozen=True)
class Activation:
    kind: str
    poly: Poly | None = None
    rational: RationalFn | None = None

    def __post_init__(self):
        if self.kind not in ACTIVATION_KINDS:
            raise ValueError(f"unknown activation kind {self.kind!r}")
        if self.kind == "polynomial" and self.poly is None:
            raise ValueError("polynomial activation needs coefficients")
        if self.kind == "rational" and self.rational is None:
            raise ValueError("rational activation needs a RationalFn")

    @classmethod
    def polynomial(cls, p) -> "Activation":
        return cls("polynomial", poly=p if isinstance(p, Poly) else Poly(p))

    @classmethod
    def rational_fn(cls, num, den) -> "Activation":
        num = num if isinstance(num, Poly) else Poly(num)
        den = den if isinstance(den, Poly) else Poly(den)
        return cls("rational", rational=RationalFn(num, den))

    @property
    def degree(self) -> tuple:
        """(numerator degree, denominator degree); ``None`` for piecewise-linear kinds."""
        if self.kind == "identity":
            return (1, 0)
        if self.kind == "polynomial":
            return (max(self.poly.degree, 0), 0)
        if self.kind == "rational":
            n, d = self.rational.degree
            return (max(n, 0), d)
        return None

    @cached_property
    def _exact_coeffs(self):
        if self.kind == "polynomial":
            return [fast_rat(c) for c in self.poly.coeffs]
        if self.kind == "rational":
            return ([fast_rat(c) for c in self.rational.num.coeffs],
                    [fast_rat(c) for c in self.rational.den.coeffs])
        return None

    @cached_property
    def _float_coeffs(self):
        if self.kind == "polynomial":
            return [float(c) for c in self.poly.coeffs]
        if self.kind == "rational":
            return ([float(c) for c in self.rational.num.coeffs],
                    [float(c) for c in self.rational.den.coeffs])
        return None

    def __call__(self, z, exact: bool = True):
        if self.kind == "identity":
            return z
        if self.kind == "relu":
            return np.maximum(z, 0)
        if self.kind == "clipped_relu":
            return np.minimum(np.maximum(z, 0), 1)
        coeffs = self._exact_coeffs if exact else self._float_coeffs
        if self.kind == "polynomial":
            return _horner(coeffs, z)
        num = _horner(coeffs[0], z)
        den = _horner(coeffs[1], z)
        if np.any(den == 0):
            raise PoleError("rational activation evaluated at a pole")
        if exact:
            return (num * _MPQ_ONE) / den
        return num / den

    def to_json(self) -> dict:
        if self.kind == "polynomial":
            return {"kind": "polynomial", "coeffs": self.poly.to_strings()}
        if self.kind == "rational":
            return {"kind": "rational", "num": self.rational.num.to_strings(),
                    "den": self.rational.den.to_strings()}
        return {"kind": self.kind}


IDENTITY = Activation("identity")
RELU = Activation("relu")
CLIPPED_RELU = Activation("clipped_relu")


def _horner(coeffs, z):
    if not coeffs:
        return z * 0
    acc = coeffs[-1] + z * 0
    for c in reversed(coeffs[:-1]):
        acc = acc * z + c
    return acc


def _rat_matrix(rows, shape, what):
    out = tuple(tuple(as_rat(v) for v in row) for row in rows)
    if len(out) != shape[0] or any(len(r) != shape[1] for r in out):
        raise DimensionError(f"{what} must be {shape[0]}x{shape[1]}")
    return out


@dataclass(frozen=True)
class GnnLayer:
    A: tuple
    B: tuple
    c: tuple
    activations: tuple

    def __post_init__(self):
        d = len(self.c)
        object.__setattr__(self, "A", _rat_matrix(self.A, (d, d), "A"))
        object.__setattr__(self, "B", _rat_matrix(self.B, (d, d), "B"))
        object.__setattr__(self, "c", tuple(as_rat(v) for v in self.c))
        acts = tuple(self.activations)
        if len(acts) != d:
            raise DimensionError(f"need {d} activations, got {len(acts)}")
        object.__setattr__(self, "activations", acts)

    @property
    def dim(self) -> int:
        return len(self.c)

    @cached_property
    def _sparse(self):
        """Per output row: nonzero (column, weight) lists for A and B, in engine scalars."""
        rows = []
        for i in range(self.dim):
            a = [(j, fast_rat(w)) for j, w in enumerate(self.A[i]) if w != 0]
            b = [(j, fast_rat(w)) for j, w in enumerate(self.B[i]) if w != 0]
            rows.append((a, b, fast_rat(self.c[i])))
        return rows

    @cached_property
    def neighbor_columns(self) -> list[int]:
        return sorted({j for row in self.B for j, w in enumerate(row) if w != 0})

    @cached_property
    def _float(self):
        A = np.array([[float(v) for v in r] for r in self.A]).reshape(self.dim, self.dim)
        B = np.array([[float(v) for v in r] for r in self.B]).reshape(self.dim, self.dim)
        return A, B, np.array([float(v) for v in self.c])

    @cached_property
    def _activation_groups(self):
        groups: dict = {}
        for i, act in enumerate(self.activations):
            groups.setdefault(act, []).append(i)
        return [(act, np.array(cols)) for act, cols in groups.items()]

    def apply(self, X: np.ndarray, agg: np.ndarray, exact: bool = True) -> np.ndarray:
        """One combine step on a batch of states ``X`` with neighbour sums ``agg``."""
        if exact:
            N = X.shape[0]
            Z = np.empty((N, self.dim), dtype=object)
            for i, (a_terms, b_terms, bias) in enumerate(self._sparse):
                acc = None
                for src, terms in ((X, a_terms), (agg, b_terms)):
                    for j, w in terms:
                        col = src[:, j]
                        term = col if w == 1 else (-col if w == -1 else w * col)
                        acc = term if acc is None else acc + term
                if acc is None:
                    Z[:, i] = bias
                else:
                    Z[:, i] = acc + bias if bias != 0 else acc
        else:
            A, B, c = self._float
            Z = X @ A.T + agg @ B.T + c
        out = np.empty_like(Z)
        for act, cols in self._activation_groups:
            out[:, cols] = act(Z[:, cols], exact)
        return out


@dataclass(frozen=True)
class DecisionRule:
    """Output ``o`` decides true iff ``o >= theta_plus``, false iff ``o <= theta_minus``."""

    theta_plus: Fraction = Fraction(1)
    theta_minus: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "theta_plus", as_rat(self.theta_plus))
        object.__setattr__(self, "theta_minus", as_rat(self.theta_minus))
        if not self.theta_minus < self.theta_plus:
            raise ValueError("decision rule needs theta_minus < theta_plus")

    @classmethod
    def from_epsilon(cls, eps) -> "DecisionRule":
        eps = as_rat(eps)
        return cls(1 - eps, eps)

    def classify(self, value) -> str:
        if value >= self.theta_plus:
            return "true"
        if value <= self.theta_minus:
            return "false"
        return "undecided"


@dataclass(frozen=True)
class Decision:
    outcome: str  # "true", "false" or "undecided"
    value: object

    def __bool__(self):
        return self.outcome == "true"


@dataclass(frozen=True)
class GnnModel:
    num_colors: int
    init: tuple
    layers: tuple
    iterations: int
    output_coord: int
    decision: DecisionRule = field(default_factory=DecisionRule)
    recurrent: bool = False
    name: str = ""

    def __post_init__(self):
        init = tuple(tuple(int(v) for v in row) for row in self.init)
        object.__setattr__(self, "init", init)
        object.__setattr__(self, "layers", tuple(self.layers))
        d = len(init)
        if d == 0:
            raise DimensionError("state dimension must be positive")
        if self.num_colors < 1:
            raise DimensionError("num_colors must be positive")
        if any(len(row) != self.num_colors for row in init):
            raise DimensionError(f"init must be {d}x{self.num_colors}")
        if any(v not in (0, 1) for row in init for v in row):
            raise ModelFormatError("init entries must be 0 or 1", "init")
        if self.iterations < 1:
            raise DimensionError("need at least one iteration")
        if self.recurrent and len(self.layers) != 1:
            raise DimensionError("a recurrent model has exactly one layer")
        if not self.recurrent and len(self.layers) != self.iterations:
            raise DimensionError(f"{self.iterations} iterations but {len(self.layers)} layers")
        for t, layer in enumerate(self.layers):
            if layer.dim != d:
                raise DimensionError(f"layer {t} has dimension {layer.dim}, expected {d}")
        if not 0 <= self.output_coord < d:
            raise DimensionError(f"output_coord {self.output_coord} outside [0, {d})")

    @property
    def state_dim(self) -> int:
        return len(self.init)

    def layer(self, t: int) -> GnnLayer:
        """Layer applied to go from iteration ``t`` to ``t + 1``."""
        return self.layers[0] if self.recurrent else self.layers[t]

    def initial_states(self, colors: Sequence[int], exact: bool = True) -> np.ndarray:
        table = np.array(self.init, dtype=np.int64).T  # num_colors x d
        rows = table[np.asarray(colors, dtype=np.int64) - 1]
        return rows.astype(object) if exact else rows.astype(float)

    def activation_kinds(self) -> set:
        return {a.kind for layer in self.layers for a in layer.activations}


def _neighbor_sum(X, src, dst, cols, exact):
    agg = np.zeros_like(X) if not exact else np.zeros(X.shape, dtype=object)
    if len(cols) and len(src):
        cols = np.asarray(cols)
        np.add.at(agg, (dst[:, None], cols[None, :]), X[src][:, cols])
    return agg


def run(model: GnnModel, g: LabeledGraph, exact: bool = True, iterations: int | None = None) -> list:
    """Full trace ``[xi^0, ..., xi^T]``, each an ``n x d`` array."""
    if g.num_colors > model.num_colors:
        raise DimensionError(f"graph uses {g.num_colors} colors, model expects {model.num_colors}")
    T = model.iterations if iterations is None else iterations
    if T > model.iterations and not model.recurrent:
        raise DimensionError("only recurrent models can run past their iteration count")
    src, dst = g.edge_index()
    X = model.initial_states(g.colors, exact)
    trace = [X]
    for t in range(T):
        layer = model.layer(t)
        agg = _neighbor_sum(X, src, dst, layer.neighbor_columns, exact)
        X = layer.apply(X, agg, exact)
        trace.append(X)
    return trace


def output(model: GnnModel, g: LabeledGraph, exact: bool = True) -> np.ndarray:
    return run(model, g, exact)[-1][:, model.output_coord]


def decide(model: GnnModel, g: LabeledGraph, v: int, exact: bool = True) -> Decision:
    value = output(model, g, exact)[v]
    return Decision(model.decision.classify(value), value)


def decide_all(model: GnnModel, g: LabeledGraph, exact: bool = True) -> list[Decision]:
    return [Decision(model.decision.classify(x), x) for x in output(model, g, exact)]


# --------------------------------------------------------------------------
# model files


def _activation_from_json(obj, path) -> Activation:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ModelFormatError("activation must be an object with a 'kind'", path)
    kind = obj["kind"]
    try:
        if kind == "polynomial":
            return Activation.polynomial(_rats(obj.get("coeffs"), f"{path}.coeffs"))
        if kind == "rational":
            num = _rats(obj.get("num"), f"{path}.num")
            den = _rats(obj.get("den"), f"{path}.den")
            return Activation.rational_fn(num, den)
        return Activation(kind)
    except PoleError as exc:
        raise ModelFormatError(f"rejected rational activation: {exc}", path) from exc
    except ValueError as exc:
        raise ModelFormatError(str(exc), path) from exc


def _rats(seq, path) -> list:
    if not isinstance(seq, list):
        raise ModelFormatError("expected a list of rationals", path)
    out = []
    for i, s in enumerate(seq):
        try:
            out.append(as_rat(s))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ModelFormatError(f"bad rational {s!r}: {exc}", f"{path}[{i}]") from None
    return out


def _matrix(obj, path, d) -> list:
    if not isinstance(obj, list) or len(obj) != d:
        raise ModelFormatError(f"expected {d} rows", path)
    rows = [_rats(row, f"{path}[{i}]") for i, row in enumerate(obj)]
    for i, row in enumerate(rows):
        if len(row) != d:
            raise ModelFormatError(f"expected {d} entries", f"{path}[{i}]")
    return rows


def _layer_from_json(obj, path, d) -> GnnLayer:
    if not isinstance(obj, dict):
        raise ModelFormatError("layer must be an object", path)
    for key in ("A", "B", "c", "activations"):
        if key not in obj:
            raise ModelFormatError("missing field", f"{path}.{key}")
    acts = obj["activations"]
    if not isinstance(acts, list) or len(acts) != d:
        raise ModelFormatError(f"expected {d} activations", f"{path}.activations")
    c = _rats(obj["c"], f"{path}.c")
    if len(c) != d:
        raise ModelFormatError(f"expected {d} entries", f"{path}.c")
    return GnnLayer(
        _matrix(obj["A"], f"{path}.A", d),
        _matrix(obj["B"], f"{path}.B", d),
        c,
        [_activation_from_json(a, f"{path}.activations[{i}]") for i, a in enumerate(acts)],
    )


def model_from_dict(obj: dict) -> GnnModel:
    if not isinstance(obj, dict):
        raise ModelFormatError("model must be a JSON object")
    for key in ("num_colors", "state_dim", "iterations", "init", "output_coord", "decision"):
        if key not in obj:
            raise ModelFormatError("missing field", key)
    for key in ("num_colors", "state_dim", "iterations", "output_coord"):
        if not isinstance(obj[key], int) or isinstance(obj[key], bool):
            raise ModelFormatError("expected an integer", key)
    d = obj["state_dim"]
    init = obj["init"]
    if not isinstance(init, list) or len(init) != d:
        raise ModelFormatError(f"expected {d} rows", "init")
    for i, row in enumerate(init):
        if not isinstance(row, list) or len(row) != obj["num_colors"]:
            raise ModelFormatError(f"expected {obj['num_colors']} entries", f"init[{i}]")
        for j, v in enumerate(row):
            if v not in (0, 1) or isinstance(v, bool):
                raise ModelFormatError("init entries must be 0 or 1", f"init[{i}][{j}]")
    if ("layers" in obj) == ("recurrent_layer" in obj):
        raise ModelFormatError("exactly one of 'layers' / 'recurrent_layer' is required", "layers")
    if "recurrent_layer" in obj:
        layers = [_layer_from_json(obj["recurrent_layer"], "recurrent_layer", d)]
        recurrent = True
    else:
        if not isinstance(obj["layers"], list):
            raise ModelFormatError("expected a list", "layers")
        layers = [_layer_from_json(l, f"layers[{i}]", d) for i, l in enumerate(obj["layers"])]
        recurrent = False
    dec = obj["decision"]
    if not isinstance(dec, dict):
        raise ModelFormatError("expected an object", "decision")
    for key in ("theta_plus", "theta_minus"):
        if key not in dec:
            raise ModelFormatError("missing field", f"decision.{key}")
    tp, tm = _rats([dec["theta_plus"], dec["theta_minus"]], "decision")
    try:
        return GnnModel(
            num_colors=obj["num_colors"],
            init=init,
            layers=layers,
            iterations=obj["iterations"],
            output_coord=obj["output_coord"],
            decision=DecisionRule(tp, tm),
            recurrent=recurrent,
            name=obj.get("name", ""),
        )
    except (DimensionError, ValueError) as exc:
        raise ModelFormatError(str(exc)) from exc


def _layer_to_dict(layer: GnnLayer) -> dict:
    return {
        "A": [[format_rat(v) for v in row] for row in layer.A],
        "B": [[format_rat(v) for v in row] for row in layer.B],
        "c": [format_rat(v) for v in layer.c],
        "activations": [a.to_json() for a in layer.activations],
    }


def model_to_dict(model: GnnModel) -> dict:
    out = {}
    if model.name:
        out["name"] = model.name
    out.update(
        num_colors=model.num_colors,
        state_dim=model.state_dim,
        iterations=model.iterations,
        init=[list(row) for row in model.init],
    )
    if model.recurrent:
        out["recurrent_layer"] = _layer_to_dict(model.layers[0])
    else:
        out["layers"] = [_layer_to_dict(l) for l in model.layers]
    out["output_coord"] = model.output_coord
    out["decision"] = {
        "theta_plus": format_rat(model.decision.theta_plus),
        "theta_minus": format_rat(model.decision.theta_minus),
    }
    return out


def _is_scalar(x) -> bool:
    return not isinstance(x, (list, tuple, dict))


def _pretty(obj, level: int) -> str:
    pad, inner = "  " * level, "  " * (level + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        if all(_is_scalar(v) for v in obj.values()):
            flat = json.dumps(obj)
            if len(flat) <= 60:
                return flat
        items = [f"{inner}{json.dumps(str(k))}: {_pretty(v, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if all(_is_scalar(x) for x in obj):
            return json.dumps(list(obj))
        return "[\n" + ",\n".join(inner + _pretty(x, level + 1) for x in obj) + "\n" + pad + "]"
    return json.dumps(obj)


def dumps(obj) -> str:
    """Indented JSON with innermost scalar lists kept on one line."""
    return _pretty(obj, 0)


def save(model: GnnModel) -> str:
    return dumps(model_to_dict(model)) + "\n"


def load(text: str) -> GnnModel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid JSON: {exc}") from exc
    return model_from_dict(obj)


def load_file(path) -> GnnModel:
    return load(Path(path).read_text(encoding="utf-8"))


def save_file(model: GnnModel, path) -> None:
    Path(path).write_text(save(model), encoding="utf-8")
