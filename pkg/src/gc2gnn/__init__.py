"""Graded modal logic GC2, graph neural networks with exact arithmetic, and the
compilers and checks that relate the two."""

from .errors import (
    ColorRangeError,
    CompileError,
    DimensionError,
    FormulaError,
    GC2Error,
    GraphFormatError,
    ModelFormatError,
    ParseError,
    PoleError,
    SingularMatrixError,
)
from .formula import And, Col, ExistsGeq, Not, Or, RgcClass, Top, depth, desugar, rgc2_classify, subformulas
from .graph import LabeledGraph, TreeSpec, disjoint_union, gen_random, gen_tree
from .parser import parse, render
from .semantics import eval_all
from .gnn import Activation, DecisionRule, GnnLayer, GnnModel, decide, decide_all, output, run
from .compile import certify, compile_gc2_relu, compile_rgc2_poly, realize_polynomial
from .refine import check_refines, color_refine
from .harness import box_margin, curve_sweep, degree_bound, dominant_direction, sign_check, symmetry_check, verify_dominance

__version__ = "0.1.0"
