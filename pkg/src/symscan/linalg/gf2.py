"""Null spaces over GF(2) with rows packed into Python ints (bit j = column j)."""

from __future__ import annotations

from typing import Sequence, Union

__all__ = ["pack", "unpack", "rref_bits", "rank_GF2", "nullspace_GF2"]

Row = Union[int, Sequence[int]]


def pack(bits: Sequence[int]) -> int:
    out = 0
    for j, b in enumerate(bits):
        if b & 1:
            out |= 1 << j
    return out


def unpack(word: int, ncols: int) -> tuple[int, ...]:
    return tuple((word >> j) & 1 for j in range(ncols))


def _words(matrix: Sequence[Row]) -> list[int]:
    return [r if isinstance(r, int) else pack(r) for r in matrix]


def rref_bits(matrix: Sequence[Row], ncols: int) -> tuple[list[int], list[int]]:
    rows = _words(matrix)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        bit = 1 << c
        pivot = next((i for i in range(r, len(rows)) if rows[i] & bit), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] & bit:
                rows[i] ^= rows[r]
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def rank_GF2(matrix: Sequence[Row], ncols: int) -> int:
    return len(rref_bits(matrix, ncols)[1])


def nullspace_GF2(matrix: Sequence[Row], ncols: int) -> list[tuple[int, ...]]:
    """Canonical basis of the mod-2 null space, as bit tuples."""
    reduced, pivots = rref_bits(matrix, ncols)
    pivot_set = set(pivots)
    raw = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = 1 << f
        for row, p in zip(reduced, pivots):
            if (row >> f) & 1:
                v |= 1 << p
        raw.append(v)
    basis, _ = rref_bits(raw, ncols)
    return [unpack(v, ncols) for v in basis]
