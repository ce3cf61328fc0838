"""Omnidirectional type inference for OML."""
from .core_types import Scheme, Shape, Type, canonical_shape, shape_apply, show_type, types_equivalent
from .surface import parse, parse_term, parse_type
from .congen import GenState, generate
from .solver import SolveResult, Solver, solve

__all__ = [
    "Scheme", "Shape", "Type", "canonical_shape", "shape_apply", "show_type",
    "types_equivalent", "parse", "parse_term", "parse_type", "GenState",
    "generate", "SolveResult", "Solver", "solve",
]
