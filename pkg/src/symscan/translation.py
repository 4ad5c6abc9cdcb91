"""Translation detection with state-dependent offsets.

Offsets of the translated variables may be polynomial in the variables that
are not translated.  Products make the per-factor constraints bilinear
(``t_a * t_b = 0``); each such complementarity is split into its two linear
branches, every branch is solved over the polynomial fraction field, and the
nonzero solution spaces form the reported union.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .catalog import Constraint, Coupling
from .linalg import canonical_poly_basis, make_ring, nullspace_poly, rank_poly
from .model import Model
from .symbolic import Sparse, aggregate_parts, format_poly, from_ring, mentioned_variables, \
    symbols_of, to_ring
from .system import LinearSystem, ProvenanceRow, build_system

__all__ = [
    "CaseSplitBudgetExceeded",
    "TranslationFamily",
    "Branch",
    "TranslationResult",
    "case_split",
    "solve_branch",
    "enforce_dependency_rule",
    "detect_translation",
    "BRANCH_BUDGET",
]

BRANCH_BUDGET = 2 ** 12

Direction = dict  # variable -> Sparse polynomial offset per unit of the parameter


class CaseSplitBudgetExceeded(RuntimeError):
    def __init__(self, count: int, factors: list[str]):
        self.count = count
        self.factors = factors
        super().__init__(f"{count} complementarity branches exceed the budget of "
                         f"{BRANCH_BUDGET}; caused by: {', '.join(factors)}")


@dataclass(frozen=True)
class Branch:
    pinned: frozenset
    choices: tuple = ()  # ((left, right), pinned side)


@dataclass(frozen=True)
class TranslationFamily:
    directions: tuple  # tuple of Direction, one per free parameter
    replicated_over: tuple  # per direction, tuple of ranges
    bound: str = "exact"
    genericity: tuple = ()  # formatted polynomials assumed nonzero
    branch: tuple = ()  # variables pinned by the complementarity split

    @property
    def free_parameters(self) -> list[str]:
        n = len(self.directions)
        names = ["t"] if n == 1 else [f"t{i + 1}" for i in range(n)]
        return [f"{nm}[{','.join(r)}]" if r else nm for nm, r in zip(names, self.replicated_over)]

    def support(self) -> list[str]:
        seen: dict[str, None] = {}
        for d in self.directions:
            for v, p in d.items():
                if p:
                    seen.setdefault(v)
        return list(seen)

    def offsets(self) -> dict[str, str]:
        params = [p.split("[")[0] for p in self.free_parameters]
        out = {}
        for var in self.support():
            pieces = []
            for d, prm in zip(self.directions, params):
                if d.get(var):
                    pieces.append(_with_param(d[var], prm))
            out[var] = " + ".join(pieces).replace("+ -", "- ")
        return out

    def key(self) -> tuple:
        return tuple(tuple(sorted((v, format_poly(p)) for v, p in d.items() if p))
                     for d in self.directions), self.replicated_over

    def __str__(self) -> str:
        body = ", ".join(f"{v} += {o}" for v, o in self.offsets().items())
        return f"{body} [{self.bound}]"


def _with_param(poly: Sparse, param: str) -> str:
    if len(poly) == 1 and () in poly:
        c = poly[()]
        return param if c == 1 else ("-" + param if c == -1 else f"{format_poly(poly)}*{param}")
    if len(poly) == 1:
        return format_poly(poly, param)
    return f"({format_poly(poly)})*{param}"


@dataclass
class TranslationResult:
    families: list = field(default_factory=list)
    provenance: list[ProvenanceRow] = field(default_factory=list)
    branches: int = 0
    system: LinearSystem | None = None

    def by_bound(self, *bounds: str) -> list:
        return [f for f in self.families if f.bound in bounds]

    @property
    def sound(self) -> list:
        return self.by_bound("exact", "subset")


# ---------------------------------------------------------------- splitting


def case_split(system: LinearSystem) -> list[Branch]:
    """One branch per way of zeroing one side of every complementarity pair.

    Pairs with a side already pinned by an observation add no branching.
    Branches with equal pinned sets are merged.
    """
    pinned = _pinned_by_rows(system)
    pairs: list[tuple[str, str]] = []
    sources: list[str] = []
    for comp in system.complementarities:
        if comp.left in pinned or comp.right in pinned:
            continue
        if comp.left not in system.columns or comp.right not in system.columns:
            continue
        pair = (comp.left, comp.right)
        if pair not in pairs and pair[::-1] not in pairs:
            pairs.append(pair)
            sources.append(f"factor {comp.factor} ({comp.left}, {comp.right})")
    count = 2 ** len(pairs)
    if count > BRANCH_BUDGET:
        raise CaseSplitBudgetExceeded(count, sources)
    branches: dict[frozenset, Branch] = {}
    for picks in itertools.product((0, 1), repeat=len(pairs)):
        chosen = frozenset(pair[p] for pair, p in zip(pairs, picks))
        if chosen not in branches:
            branches[chosen] = Branch(chosen, tuple((pair, pair[p]) for pair, p in zip(pairs, picks)))
    return sorted(branches.values(), key=lambda b: sorted(system.columns.index(v) for v in b.pinned))


def _pinned_by_rows(system: LinearSystem) -> set[str]:
    out = set()
    for r in system.rows:
        if len(r.terms) == 1 and list(r.terms[0][1]) == [()]:
            out.add(r.terms[0][0])
    return out


# ---------------------------------------------------------------- solving


def solve_branch(system: LinearSystem, branch: Branch):
    """Canonical null-space directions of one branch and the pivots assumed nonzero."""
    rows = list(system.rows) + [
        Constraint("translation", ((v, {(): 1}),), None, f"branch {v} fixed") for v in sorted(branch.pinned)
    ]
    cols = system.columns[: system.named]
    polys = [p for r in rows for _, p in r.terms]
    R = make_ring(symbols_of(polys))
    pos = {c: i for i, c in enumerate(cols)}
    matrix = []
    for r in rows:
        row = [R.zero] * len(cols)
        for name, p in r.terms:
            if name in pos:
                row[pos[name]] += to_ring(p, R)
        matrix.append(row)
    ns = nullspace_poly(matrix, len(cols), R)
    dirs = [{c: from_ring(x, R) for c, x in zip(cols, vec) if x} for vec in ns.basis]
    notes = [format_poly(from_ring(p, R)) for p in ns.genericity]
    return dirs, notes, R


# ---------------------------------------------------------------- filters


def enforce_dependency_rule(directions: list[Direction]) -> list[Direction]:
    """Remove directions whose offsets mention translated variables.

    ``translated`` is the union of supports of the surviving directions, so
    removal is repeated until nothing changes.
    """
    current = list(directions)
    while True:
        moved = {v for d in current for v, p in d.items() if p}
        keep = [d for d in current if not any(mentioned_variables(p) & moved for p in d.values())]
        if len(keep) == len(current):
            return keep
        current = keep


def _symbol_ranges(symbol: str, model: Model) -> set[str]:
    parts = aggregate_parts(symbol)
    if parts is None:
        return set(model.variables[symbol].index_ranges)
    rng, inner = parts
    out: set[str] = set()
    for v in inner:
        out |= set(model.variables[v].index_ranges)
    return out - {rng}


def _well_formed(d: Direction, model: Model) -> bool:
    """Each offset mentions only elements addressable from the offset's own indices."""
    for var, poly in d.items():
        own = set(model.variables[var].index_ranges)
        for mono in poly:
            for sym in mono:
                if not _symbol_ranges(sym, model) <= own:
                    return False
    return True


def _uniform_on_couplings(d: Direction, model: Model, couplings: list[Coupling]) -> bool:
    """Coupled arrays must receive offsets that do not vary along the coupled range."""
    for c in couplings:
        poly = d.get(c.var)
        if not poly:
            continue
        for mono in poly:
            for sym in mono:
                parts = aggregate_parts(sym)
                if parts is not None and parts[0] == c.range:
                    return False
                if c.range in _symbol_ranges(sym, model):
                    return False
    return True


def _filter(dirs: list[Direction], model: Model, couplings: list[Coupling] | None) -> list[Direction]:
    current = list(dirs)
    while True:
        keep = [d for d in current if _well_formed(d, model)]
        if couplings is not None:
            keep = [d for d in keep if _uniform_on_couplings(d, model, couplings)]
        keep = enforce_dependency_rule(keep)
        if len(keep) == len(current):
            return keep
        current = keep


# ---------------------------------------------------------------- replication


def _direction_ranges(d: Direction, model: Model, couplings: list[Coupling] | None) -> tuple:
    moved = [v for v, p in d.items() if p]
    out = []
    for r in model.ranges:
        if not any(r in model.variables[v].index_ranges for v in moved):
            continue
        ok = True
        for v in moved:
            indexed = r in model.variables[v].index_ranges
            for mono in d[v]:
                n = sum(1 for s in mono if (aggregate_parts(s) or ("",))[0] == r)
                if (indexed and n) or (not indexed and n != 1):
                    ok = False
        if ok and couplings is not None:
            ok = not any(c.var in moved and c.range == r and c.mode in ("equal", "pin")
                         for c in couplings)
        if ok:
            out.append(r)
    return tuple(out)


# ---------------------------------------------------------------- driver


def _families(system: LinearSystem, model: Model, bound: str, subset: bool) -> list[TranslationFamily]:
    couplings = system.couplings if subset else None
    fams: list[TranslationFamily] = []
    keys: set = set()
    for branch in case_split(system):
        dirs, notes, R = solve_branch(system, branch)
        dirs = _filter(dirs, model, couplings)
        if not dirs:
            continue
        cols = [c for c in system.columns[: system.named]]
        basis, extra = canonical_poly_basis(
            [[to_ring(d.get(c, {}), R) for c in cols] for d in dirs], len(cols), R)
        dirs = [{c: from_ring(x, R) for c, x in zip(cols, vec) if x} for vec in basis]
        notes = [n for n in dict.fromkeys(notes + [format_poly(from_ring(p, R)) for p in extra])
                 if not _positive_by_construction(n)]
        reps = tuple(_direction_ranges(d, model, couplings) for d in dirs)
        fam = TranslationFamily(tuple(dirs), reps, bound, tuple(notes), tuple(sorted(branch.pinned)))
        if fam.key() in keys:
            continue
        keys.add(fam.key())
        fams.append(fam)
    return _minimal(fams, system)


def _positive_by_construction(note: str) -> bool:
    """Range sizes such as ``sum_k(1)`` never vanish."""
    from .symbolic import parse_poly

    poly = parse_poly(note)
    return len(poly) == 1 and all(
        c > 0 and all((aggregate_parts(s) or ("", None))[1] == () for s in mono)
        for mono, c in poly.items())


def _contained(a: TranslationFamily, b: TranslationFamily, cols: list[str]) -> bool:
    reps_b = set().union(*map(set, b.replicated_over)) if b.replicated_over else set()
    if not all(set(r) <= reps_b for r in a.replicated_over):
        return False
    polys = [p for f in (a, b) for d in f.directions for p in d.values()]
    R = make_ring(symbols_of(polys))
    rows_b = [[to_ring(d.get(c, {}), R) for c in cols] for d in b.directions]
    rows_a = [[to_ring(d.get(c, {}), R) for c in cols] for d in a.directions]
    return rank_poly(rows_b + rows_a, len(cols), R) == rank_poly(rows_b, len(cols), R)


def _minimal(fams: list[TranslationFamily], system: LinearSystem) -> list[TranslationFamily]:
    cols = system.columns[: system.named]
    out = []
    for i, f in enumerate(fams):
        dominated = False
        for j, g in enumerate(fams):
            if i == j or not _contained(f, g, cols):
                continue
            # keep the earlier of two equal spans
            if not _contained(g, f, cols) or j < i:
                dominated = True
                break
        if not dominated:
            out.append(f)
    return out


def detect_translation(model: Model) -> TranslationResult:
    """Union of translation families, bracketed by subset and superset solves."""
    system = build_system(model, "translation")
    subset = _families(system, model, "subset", True)
    superset = _families(system.without_droppable(), model, "superset", False)
    if [f.key() for f in subset] == [f.key() for f in superset]:
        fams = [TranslationFamily(f.directions, f.replicated_over, "exact", f.genericity, f.branch)
                for f in subset]
    else:
        fams = subset + superset
    return TranslationResult(fams, system.provenance(), len(case_split(system)), system)
