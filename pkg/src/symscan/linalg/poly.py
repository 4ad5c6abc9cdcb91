"""Null spaces over the fraction field of multivariate rational polynomials.

Entries live in a sympy ``PolyRing`` over QQ.  Forward elimination is
fraction-free (Bareiss), so every intermediate entry stays a polynomial.  The
echelon form is then reduced in the fraction field, and each basis vector is
cleared back to primitive polynomial form.

A basis is valid wherever the pivots used are nonzero; the non-constant
pivots are returned as genericity conditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from sympy import QQ, Symbol
from sympy.polys.rings import PolyElement, PolyRing, ring

__all__ = ["PolyNullspace", "make_ring", "nullspace_poly", "rank_poly", "canonical_poly_basis", "normalize_vector",
           "normalize_poly"]


def make_ring(symbols: Sequence[str]) -> PolyRing:
    """Polynomial ring over QQ; symbol names may contain any characters."""
    names = list(symbols) or ["_unused"]
    return ring([Symbol(n) for n in names], QQ)[0]


@dataclass
class PolyNullspace:
    basis: list[tuple[PolyElement, ...]]
    rank: int
    pivot_columns: list[int]
    genericity: list[PolyElement] = field(default_factory=list)


def _pivot_key(p: PolyElement, row: int) -> tuple:
    degree = 0 if p.is_ground else max(sum(m) for m in p.monoms())
    return (not p.is_ground, degree, len(p.terms()), row)


def normalize_poly(p: PolyElement) -> PolyElement:
    """Primitive associate of ``p`` with a positive leading coefficient."""
    if not p:
        return p
    _, prim = p.primitive()
    if prim.LC < 0:
        prim = -prim
    return prim.monic() if prim.is_ground else prim


def normalize_vector(vec: Sequence, R: PolyRing) -> tuple[PolyElement, ...]:
    """Clear fraction-field entries to polynomials with unit content.

    The first nonzero entry ends up with a positive leading coefficient.
    """
    K = R.to_field()
    fracs = [K(x) for x in vec]
    den = R.one
    for f in fracs:
        if f:
            den = den.lcm(f.denom)
    polys = [f.numer * den.exquo(f.denom) if f else R.zero for f in fracs]
    g = R.zero
    for p in polys:
        if p:
            g = p if not g else g.gcd(p)
    if g:
        polys = [p.exquo(g) if p else p for p in polys]
    lead = next((p for p in polys if p), None)
    if lead is not None and lead.LC < 0:
        polys = [-p for p in polys]
    return tuple(polys)


def _bareiss(rows: list[list[PolyElement]], ncols: int):
    """Fraction-free forward elimination with degree-aware row pivoting."""
    R_rows = [list(r) for r in rows]
    pivots: list[int] = []
    used: list[PolyElement] = []
    prev = None
    r = 0
    for c in range(ncols):
        cands = [i for i in range(r, len(R_rows)) if R_rows[i][c]]
        if not cands:
            continue
        best = min(cands, key=lambda i: _pivot_key(R_rows[i][c], i))
        R_rows[r], R_rows[best] = R_rows[best], R_rows[r]
        piv = R_rows[r][c]
        for i in range(r + 1, len(R_rows)):
            lead = R_rows[i][c]
            new = []
            for j in range(ncols):
                val = piv * R_rows[i][j] - lead * R_rows[r][j]
                if prev is not None and val:
                    val = val.exquo(prev)
                new.append(val)
            R_rows[i] = new
        pivots.append(c)
        used.append(piv)
        prev = piv
        r += 1
        if r == len(R_rows):
            break
    return R_rows[:r], pivots, used


def rank_poly(matrix: Sequence[Sequence], ncols: int, R: PolyRing) -> int:
    """Rank over the fraction field."""
    return len(_bareiss([[R(x) for x in row] for row in matrix], ncols)[1])


def nullspace_poly(matrix: Sequence[Sequence], ncols: int, R: PolyRing) -> PolyNullspace:
    """Basis of the right null space of ``matrix`` over ``Frac(R)``.

    Every returned vector ``v`` satisfies ``matrix @ v == 0`` as a polynomial
    identity.  Vectors are in canonical form: the basis is row-reduced over
    the fraction field (leading coordinates at the smallest indices), then
    each vector is cleared to primitive polynomials.
    """
    rows = [[R(x) for x in row] for row in matrix]
    for row in rows:
        if len(row) != ncols:
            raise ValueError("ragged polynomial matrix")
    echelon, pivots, used = _bareiss(rows, ncols)
    K = R.to_field()
    red = [[K(x) for x in row] for row in echelon]
    # back substitution to reduced form over the field
    for k in range(len(red) - 1, -1, -1):
        c = pivots[k]
        lead = red[k][c]
        red[k] = [x / lead for x in red[k]]
        for i in range(k):
            f = red[i][c]
            if f:
                red[i] = [x - f * y for x, y in zip(red[i], red[k])]
    pivot_set = set(pivots)
    raw = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = [K.zero] * ncols
        v[f] = K.one
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        raw.append(v)
    notes = [p for p in used if not p.is_ground]
    basis = _canonical(raw, ncols, K, notes)
    return PolyNullspace([normalize_vector(v, R) for v in basis], len(pivots), pivots, notes)


def canonical_poly_basis(vectors: Sequence[Sequence], ncols: int, R: PolyRing):
    """Canonical basis of the span of ``vectors`` and the divisors it assumed nonzero."""
    K = R.to_field()
    notes: list = []
    basis = _canonical([[K(x) for x in v] for v in vectors], ncols, K, notes)
    return [normalize_vector(v, R) for v in basis], notes


def _canonical(vectors: list[list], ncols: int, K, notes: list) -> list[list]:
    rows = [list(v) for v in vectors]
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][c]
        notes.extend(x for x in (lead.numer, lead.denom) if not x.is_ground)
        rows[r] = [x / lead for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
    notes[:] = _dedupe(notes)
    return rows[:r]


def _dedupe(polys: list) -> list:
    """Distinct irreducible non-constant factors, in order of appearance."""
    out: list = []
    for p in polys:
        if not p or p.is_ground:
            continue
        for fac, _ in p.factor_list()[1]:
            fac = normalize_poly(fac)
            if not fac.is_ground and fac not in out:
                out.append(fac)
    return out
