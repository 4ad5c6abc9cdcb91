"""Sparse polynomials keyed by symbol names.

A polynomial is a dict mapping a sorted tuple of symbol names (with
repetition for powers) to a nonzero rational.  Symbols are model variable
names or aggregate symbols ``sum_r(q)``, where ``q`` is ``1`` or a ``*``-joined
product of variable names.
"""

from __future__ import annotations

import re
from fractions import Fraction

from sympy.polys.rings import PolyElement, PolyRing

__all__ = [
    "Sparse",
    "symbols_of",
    "to_ring",
    "from_ring",
    "format_poly",
    "parse_poly",
    "aggregate_parts",
    "mentioned_variables",
]

Sparse = dict

_AGG = re.compile(r"^sum_([A-Za-z_][A-Za-z0-9_]*)\((.*)\)$")


def aggregate_parts(symbol: str) -> tuple[str, tuple[str, ...]] | None:
    """``sum_r(a*b)`` -> ``("r", ("a", "b"))``; plain names give ``None``."""
    m = _AGG.match(symbol)
    if not m:
        return None
    inner = m.group(2)
    return m.group(1), () if inner == "1" else tuple(inner.split("*"))


def mentioned_variables(poly: Sparse) -> set[str]:
    out: set[str] = set()
    for mono in poly:
        for sym in mono:
            parts = aggregate_parts(sym)
            out.update(parts[1] if parts else (sym,))
    return out


def symbols_of(polys) -> list[str]:
    seen: dict[str, None] = {}
    for p in polys:
        for mono in p:
            for s in mono:
                seen.setdefault(s)
    return sorted(seen)


def to_ring(poly: Sparse, R: PolyRing) -> PolyElement:
    gens = {str(g): g for g in R.gens}
    out = R.zero
    for mono, c in poly.items():
        term = R(c)
        for s in mono:
            term *= gens[s]
        out += term
    return out


def from_ring(p: PolyElement, R: PolyRing) -> Sparse:
    names = [str(s) for s in R.symbols]
    out: Sparse = {}
    for exps, c in p.terms():
        mono: list[str] = []
        for name, e in zip(names, exps):
            mono += [name] * e
        out[tuple(sorted(mono))] = Fraction(int(c.numerator), int(c.denominator))
    return out


def _mono_order(item) -> tuple:
    mono, _ = item
    return (-len(mono), mono)


def format_poly(poly: Sparse, param: str | None = None) -> str:
    """Canonical text: monomials by descending degree then name, ``p/q`` coefficients."""
    if not poly:
        return "0"
    parts = []
    for mono, c in sorted(poly.items(), key=_mono_order):
        factors = list(mono) + ([param] if param else [])
        mag = abs(c)
        if factors:
            body = "*".join(factors)
            text = body if mag == 1 else f"{_frac(mag)}*{body}"
        else:
            text = _frac(mag)
        parts.append(("-" if c < 0 else "+", text))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, text in parts[1:]:
        out += f" {sign} {text}"
    return out


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _split_top(text: str, sep: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    out.append(cur)
    return out


def parse_poly(text: str) -> Sparse:
    """Inverse of :func:`format_poly` (without a parameter suffix)."""
    text = text.strip()
    if text == "0":
        return {}
    tokens = re.split(r" ([+-]) ", text)
    terms = [tokens[0]] + [s + t for s, t in zip(tokens[1::2], tokens[2::2])]
    out: Sparse = {}
    for term in terms:
        sign = Fraction(1)
        if term.startswith("-"):
            sign, term = Fraction(-1), term[1:]
        elif term.startswith("+"):
            term = term[1:]
        coef = Fraction(1)
        mono = []
        for f in _split_top(term, "*"):
            if re.fullmatch(r"\d+(/\d+)?", f):
                coef *= Fraction(f)
            else:
                mono.append(f)
        key = tuple(sorted(mono))
        out[key] = out.get(key, Fraction(0)) + sign * coef
    return {k: v for k, v in out.items() if v}
