"""Exact calculus of rank-4 linear PDE systems for projective surfaces."""

from projlaplace.congruence import (
    negative_transform,
    plucker,
    positive_transform,
    transform_sequence,
    weingarten,
)
from projlaplace.hyper2 import (
    HyperbolicEq,
    InvariantPair,
    gauge_transform,
    higher_invariants,
    laplace_invariants,
)
from projlaplace.rank4 import (
    AsymptoticSystem,
    ConjugateSystem,
    GeneralSystem,
    classify,
    connection_form,
    cubic_invariants,
    fundamental_form,
    maurer_cartan_residual,
    transport,
)
from projlaplace.symexpr import ParseError, PowerProduct, RatExpr, VarTable, parse

__all__ = [
    "AsymptoticSystem",
    "ConjugateSystem",
    "GeneralSystem",
    "HyperbolicEq",
    "InvariantPair",
    "ParseError",
    "PowerProduct",
    "RatExpr",
    "VarTable",
    "classify",
    "connection_form",
    "cubic_invariants",
    "fundamental_form",
    "gauge_transform",
    "higher_invariants",
    "laplace_invariants",
    "maurer_cartan_residual",
    "negative_transform",
    "parse",
    "plucker",
    "positive_transform",
    "transform_sequence",
    "transport",
    "weingarten",
]

__version__ = "0.1.0"
