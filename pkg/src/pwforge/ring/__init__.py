"""Exact arithmetic: rationals, sparse polynomials, elimination."""
from .poly import QQ, Poly, PolyRing, Rational, format_poly
from .parse import PolyParseError, parse_poly
from .linalg import RationalMatrix, SparseRREF, nullspace_basis, span_coordinates
from .modrank import numba_enabled, rank_mod_p, sparse_rank_mod_p

__all__ = [
    "QQ", "Poly", "PolyRing", "Rational", "format_poly", "PolyParseError", "parse_poly",
    "RationalMatrix", "SparseRREF", "nullspace_basis", "span_coordinates",
    "numba_enabled", "rank_mod_p", "sparse_rank_mod_p",
]
