"""Exact null-space solvers over QQ, GF(2) and QQ(symbols)."""

from .gf2 import nullspace_GF2, rank_GF2
from .poly import PolyNullspace, canonical_poly_basis, make_ring, nullspace_poly, rank_poly
from .rational import canonical_basis, integer_multiple, nullspace_Q, rank, rref

__all__ = [
    "nullspace_Q", "rank", "rref", "canonical_basis", "integer_multiple",
    "nullspace_GF2", "rank_GF2",
    "nullspace_poly", "rank_poly", "canonical_poly_basis", "make_ring", "PolyNullspace",
]
