"""Command-line entry point: ``gc2gnn <subcommand> ...`` or ``python -m gc2gnn``.

Exit status: 0 success / PASS, 1 verification failure / FAIL (the report
carries witnesses), 2 usage or input error. Reports go under ``--out``
(default: current directory). ``GC2GNN_WORKERS`` sets the worker count for
corpus checks.
"""
from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import gnn, graph, harness, refine
from .compile import certify, compile_gc2_relu, compile_rgc2_poly, realize_polynomial
from .errors import GC2Error
from .formula import desugar, rgc2_classify, rgc2_obstruction, subformulas
from .numeric import MPoly, Poly, format_rat
from .parser import load_query, render
from .semantics import eval_all

WORKERS_ENV = "GC2GNN_WORKERS"


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# corpus specifiers


def _spec_fields(text: str, kind: str, required: set, optional: dict) -> dict:
    body = text[len(kind) + 1:]
    fields = dict(optional)
    for item in filter(None, body.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"corpus field {item!r} is not key=value")
        fields[key.strip()] = value.strip()
    unknown = set(fields) - required - set(optional)
    if unknown:
        raise UsageError(f"unknown {kind} corpus field(s): {sorted(unknown)}")
    missing = required - set(fields)
    if missing:
        raise UsageError(f"{kind} corpus needs {sorted(missing)}")
    return fields


def parse_corpus(text: str, num_colors: int = 1) -> list:
    """``random:n=N,count=C,seed=S[,p=P][,colors=L]`` or ``tree:m=M,kmax=K``.

    Random graphs have ``n`` vertices; when ``p`` is omitted each graph draws
    its own edge probability from [0.05, 0.7) so the corpus mixes sparse and
    dense graphs. Tree corpora enumerate every ``k`` in ``{0..kmax}^m``.
    """
    try:
        if text.startswith("random:"):
            f = _spec_fields(text, "random", {"n", "count", "seed"}, {"p": None, "colors": str(num_colors)})
            n, count, seed = int(f["n"]), int(f["count"]), int(f["seed"])
            colors = int(f["colors"])
            rng = np.random.default_rng(seed)
            out = []
            for i in range(count):
                p = float(f["p"]) if f["p"] is not None else float(rng.uniform(0.05, 0.7))
                out.append(graph.gen_random(n, colors, p, seed=int(rng.integers(2**31))))
            return out
        if text.startswith("tree:"):
            f = _spec_fields(text, "tree", {"m", "kmax"}, {})
            m, kmax = int(f["m"]), int(f["kmax"])
            return [graph.gen_tree(k, num_colors) for k in itertools.product(range(kmax + 1), repeat=m)]
    except ValueError as exc:
        raise UsageError(f"bad corpus specifier {text!r}: {exc}") from None
    raise UsageError(f"corpus must start with 'random:' or 'tree:', got {text!r}")


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def _pmap(fn, items):
    workers = _workers()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


# --------------------------------------------------------------------------
# helpers


def _read(path, loader):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"file not found: {path}")
    return loader(p)


def _out_path(args, name) -> Path:
    base = Path(args.out)
    base.mkdir(parents=True, exist_ok=True)
    return base / name


def _emit(args, name: str, text: str) -> Path:
    path = _out_path(args, name)
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")
    return path


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else format_rat(v)


# --------------------------------------------------------------------------
# subcommands


def cmd_parse(args):
    f = _read(args.query, load_query)
    print(render(f))
    if args.desugar:
        print(render(desugar(f)))
    if args.subformulas:
        for i, q in enumerate(subformulas(desugar(f)), start=1):
            print(f"Q{i}: {render(q)}")
    return 0


def cmd_check_rgc2(args):
    f = desugar(_read(args.query, load_query))
    cls = rgc2_classify(f)
    print(cls)
    bad = rgc2_obstruction(f)
    if bad is not None:
        print(f"offending subterm: {render(bad)}")
    return 0


def cmd_eval(args):
    f = _read(args.query, load_query)
    g = _read(args.graph, graph.load_file)
    bits = eval_all(f, g)
    if args.vertex is not None:
        if not 0 <= args.vertex < g.n:
            raise UsageError(f"vertex {args.vertex} out of range [0, {g.n})")
        print(int(bits[args.vertex]))
    else:
        print(" ".join(str(int(b)) for b in bits))
    return 0


def cmd_compile(args):
    f = desugar(_read(args.query, load_query))
    build = compile_gc2_relu if args.target == "relu" else compile_rgc2_poly
    model = build(f, num_colors=args.colors)
    out = Path(args.output)
    if not out.is_absolute() and args.out != ".":
        out = Path(args.out) / out
    out.parent.mkdir(parents=True, exist_ok=True)
    gnn.save_file(model, out)
    print(f"wrote {out} (state dim {model.state_dim}, {model.iterations} iterations)")
    return 0


def cmd_run(args):
    model = _read(args.model, gnn.load_file)
    g = _read(args.graph, graph.load_file)
    exact = args.numeric == "exact"
    trace = gnn.run(model, g, exact)
    final = trace[-1]
    report = {
        "model": model.name,
        "numeric": args.numeric,
        "outputs": [_fmt(v) for v in final[:, model.output_coord]],
        "decisions": [model.decision.classify(v) for v in final[:, model.output_coord]],
    }
    if args.trace:
        report["trace"] = [[[_fmt(x) for x in row] for row in X] for X in trace]
    text = gnn.dumps(report) + "\n"
    if args.report:
        _emit(args, args.report, text)
    else:
        sys.stdout.write(text)
    return 0


def _verify_one(job):
    model, f, g, exact = job
    truth = eval_all(f, g)
    out = gnn.output(model, g, exact)
    bad = []
    for v in range(g.n):
        decision = model.decision.classify(out[v])
        expected = "true" if truth[v] else "false"
        if decision != expected:
            bad.append((v, expected, decision, _fmt(out[v])))
    return bad


def cmd_verify(args):
    model = _read(args.model, gnn.load_file)
    f = _read(args.query, load_query)
    corpus = parse_corpus(args.corpus, model.num_colors)
    exact = args.numeric == "exact"
    results = _pmap(_verify_one, [(model, f, g, exact) for g in corpus])
    witnesses = []
    checked = 0
    for gi, (g, bad) in enumerate(zip(corpus, results)):
        checked += g.n
        for v, expected, got, value in bad:
            witnesses.append({"graph": gi, "vertex": v, "expected": expected, "decision": got,
                              "value": value, "graph_text": graph.save(g)})
    report = {"model": model.name, "query": render(f), "corpus": args.corpus, "numeric": args.numeric,
              "graphs": len(corpus), "vertices": checked, "disagreements": len(witnesses),
              "verdict": "PASS" if not witnesses else "FAIL", "witnesses": witnesses[:20]}
    _emit(args, args.report, gnn.dumps(report) + "\n")
    print(f"{report['verdict']}: {checked} vertices, {len(witnesses)} disagreements")
    return 0 if not witnesses else 1


def cmd_cr(args):
    g = _read(args.graph, graph.load_file)
    trace = refine.color_refine(g, args.rounds)
    if args.report:
        _emit(args, args.report, trace.to_csv())
    else:
        sys.stdout.write(trace.to_csv())
    print(f"stable round: {trace.stable_round}; classes: {trace.num_classes(len(trace.rounds) - 1)}",
          file=sys.stderr)
    return 0


def _refines_one(job):
    model, pair, t_max = job
    for t in range(t_max + 1):
        bad = refine.refinement_violation(list(pair), lambda g, t=t: gnn.run(model, g, True, iterations=t)[t], t)
        if bad is not None:
            return bad
    return None


def cmd_refines(args):
    model = _read(args.model, gnn.load_file)
    corpus = parse_corpus(args.corpus, model.num_colors)
    pairs = [(corpus[i], corpus[(i + 1) % len(corpus)]) for i in range(len(corpus))]
    t_max = min(args.t_max, model.iterations)
    results = _pmap(_refines_one, [(model, p, t_max) for p in pairs])
    witnesses = [dict(w, pair=i) for i, w in enumerate(results) if w is not None]
    report = {"model": model.name, "corpus": args.corpus, "pairs": len(pairs), "t_max": t_max,
              "violations": len(witnesses), "verdict": "PASS" if not witnesses else "FAIL",
              "witnesses": witnesses[:20]}
    _emit(args, args.report, gnn.dumps(report) + "\n")
    print(f"{report['verdict']}: {len(pairs)} pairs, {len(witnesses)} violations")
    return 0 if not witnesses else 1


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def cmd_separate(args):
    model = _read(args.model, gnn.load_file)
    f = _read(args.query, load_query)
    exact = args.numeric == "exact"
    stem = args.report or f"separate_{args.kind}"
    if args.kind == "box":
        rep = harness.box_margin(model, f, args.m, args.kmax, args.eps_prime, exact)
        problems = rep.check_consistency()
        if problems:
            raise GC2Error("inconsistent report: " + "; ".join(problems))
        _emit(args, stem + ".json", rep.to_json())
        _emit(args, stem + ".csv", rep.to_csv())
        print(f"{rep.verdict}: interior_min={_fmt(rep.interior_min)} boundary_max={_fmt(rep.boundary_max)} "
              f"({rep.note})")
        return 1 if rep.verdict == "FAIL" else 0
    u = _int_list(args.u) if args.u else [1] * args.m
    rep = harness.curve_sweep(model, args.m, u, range(1, args.t_max + 1), exact, args.eps_prime)
    _emit(args, stem + ".json", rep.to_json())
    _emit(args, stem + ".csv", rep.to_csv())
    collapsed = rep.collapsed
    print(f"min difference {_fmt(rep.min_difference)}; below 2*eps' at t={collapsed[:10]}")
    return 1 if collapsed else 0


def _poly_arg(text: str) -> Poly:
    """Coefficients, lowest degree first: ``"0,0,1"`` is X^2."""
    try:
        return Poly([c.strip() for c in text.split(",")])
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad polynomial coefficients {text!r}") from None


def cmd_realize_poly(args):
    sigma, target = _poly_arg(args.sigma), _poly_arg(args.target)
    net = realize_polynomial(sigma, target)
    ok = certify(net, target)
    obj = dict(net.to_json(), certified=ok)
    _emit(args, args.report, gnn.dumps(obj) + "\n")
    print(f"depth {net.depth}, widths {list(net.widths)}, certified: {ok}")
    return 0 if ok else 1


def _mpoly_arg(text: str, m: int) -> MPoly:
    if text == "corrected":
        return harness.corrected_polynomial(m)
    if text == "quartic":
        return harness.quartic_polynomial(m)
    obj = _read(text, lambda p: json.loads(p.read_text(encoding="utf-8")))
    try:
        return MPoly(int(obj["nvars"]), {tuple(e): c for e, c in obj["terms"]})
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad polynomial file {text}: {exc}") from None


def cmd_sign_check(args):
    p = _mpoly_arg(args.poly, args.m)
    w = harness.sign_check(p, args.m, args.kmax, args.eps)
    report = {"m": args.m, "k_max": args.kmax, "eps": args.eps, "verdict": "PASS" if w is None else "FAIL",
              "witness": None if w is None else {"point": list(w.point), "value": format_rat(w.value),
                                                 "branch": w.branch}}
    _emit(args, args.report, gnn.dumps(report) + "\n")
    if w is None:
        print("PASS")
        return 0
    print(f"FAIL at {list(w.point)}: value {format_rat(w.value)} ({w.branch} branch)")
    return 1


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="directory for report files")
    common.add_argument("--numeric", choices=("exact", "float"), default="exact")

    ap = argparse.ArgumentParser(prog="gc2gnn", description="GC2 queries, GNN compilers and expressivity checks")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="echo the canonical form of a query")
    p.add_argument("--query", required=True)
    p.add_argument("--desugar", action="store_true")
    p.add_argument("--subformulas", action="store_true")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("check-rgc2", parents=[common], help="classify a query against RGC2")
    p.add_argument("--query", required=True)
    p.set_defaults(func=cmd_check_rgc2)

    p = sub.add_parser("eval", parents=[common], help="evaluate a query on a graph")
    p.add_argument("--query", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--vertex", type=int)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compile", parents=[common], help="compile a query into a model file")
    p.add_argument("--target", choices=("relu", "poly"), required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--colors", type=int)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", parents=[common], help="run a model on a graph")
    p.add_argument("--model", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--trace", action="store_true", help="include every iteration")
    p.add_argument("--report", help="file name under --out (default: stdout)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", parents=[common], help="compare a model with the query oracle")
    p.add_argument("--model", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--report", default="verify.json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cr", parents=[common], help="colour refinement trace")
    p.add_argument("--graph", required=True)
    p.add_argument("--rounds", type=int)
    p.add_argument("--report", help="CSV file name under --out (default: stdout)")
    p.set_defaults(func=cmd_cr)

    p = sub.add_parser("refines", parents=[common], help="check that colour refinement refines a model")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--t-max", type=int, default=4)
    p.add_argument("--report", default="refines.json")
    p.set_defaults(func=cmd_refines)

    p = sub.add_parser("separate", parents=[common], help="margin checks on the tree family")
    p.add_argument("--model", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--mode", dest="kind", choices=("box", "curve"), default="box",
                   help="box: every k up to --kmax; curve: k = t^u for t = 1..--t-max")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--kmax", type=int, default=50)
    p.add_argument("--u", help="comma-separated exponents (default all ones)")
    p.add_argument("--t-max", type=int, default=20)
    p.add_argument("--eps-prime", default=format_rat(harness.DEFAULT_EPS_PRIME))
    p.add_argument("--report", help="file stem under --out")
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("realize-poly", parents=[common], help="build a network computing a polynomial")
    p.add_argument("--sigma", required=True, help="activation coefficients, lowest degree first")
    p.add_argument("--target", required=True, help="target coefficients, lowest degree first")
    p.add_argument("--report", default="realize_poly.json")
    p.set_defaults(func=cmd_realize_poly)

    p = sub.add_parser("sign-check", parents=[common], help="sign pattern of a polynomial on a box")
    p.add_argument("--poly", default="corrected", help="'corrected', 'quartic' or a JSON file")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--kmax", type=int, default=5)
    p.add_argument("--eps", default="1")
    p.add_argument("--report", default="sign_check.json")
    p.set_defaults(func=cmd_sign_check)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GC2Error, OSError, ValueError) as exc:
        print(f"gc2gnn {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
