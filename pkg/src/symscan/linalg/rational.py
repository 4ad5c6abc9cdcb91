"""Exact null spaces over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

__all__ = ["rref", "rank", "nullspace_Q", "canonical_basis", "integer_multiple"]

Vector = tuple[Fraction, ...]


def _as_rows(matrix: Sequence[Sequence], ncols: int | None) -> tuple[list[list[Fraction]], int]:
    rows = [[Fraction(x) for x in row] for row in matrix]
    if ncols is None:
        if not rows:
            raise ValueError("ncols is required for a matrix with no rows")
        ncols = len(rows[0])
    for row in rows:
        if len(row) != ncols:
            raise ValueError(f"row of length {len(row)} in a matrix with {ncols} columns")
    return rows, ncols


def rref(matrix: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row-echelon form and the pivot columns, in column order."""
    rows, ncols = _as_rows(matrix, ncols)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][c]
        rows[r] = [x / lead for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def rank(matrix: Sequence[Sequence], ncols: int | None = None) -> int:
    return len(rref(matrix, ncols)[1])


def canonical_basis(vectors: Sequence[Sequence], ncols: int) -> list[Vector]:
    """Row-reduce a spanning set so each vector leads with 1 at the smallest free index."""
    if not vectors:
        return []
    reduced, _ = rref(vectors, ncols)
    return [tuple(v) for v in reduced]


def nullspace_Q(matrix: Sequence[Sequence], ncols: int | None = None) -> list[Vector]:
    """Basis of ``{v : matrix @ v = 0}`` in canonical form.

    >>> nullspace_Q([[1, -1]])
    [(Fraction(1, 1), Fraction(1, 1))]
    """
    reduced, pivots = rref(matrix, ncols)
    if ncols is None:
        ncols = len(matrix[0])
    pivot_set = set(pivots)
    raw = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            v[p] = -row[f]
        raw.append(v)
    return canonical_basis(raw, ncols)


def integer_multiple(vector: Sequence[Fraction]) -> tuple[int, ...]:
    """Smallest integer vector parallel to ``vector`` with the same leading sign."""
    from math import gcd, lcm

    den = 1
    for x in vector:
        den = lcm(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in vector]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return tuple(x // g for x in ints) if g else tuple(ints)
