"""Scaling and sign-flip detection.

Both classes share one pipeline: build the array-level system, take its null
space (over QQ for scaling exponents, over GF(2) for flip bits), then decide
along which ranges each basis vector can be varied independently per index.

Under array compression the answer is bracketed.  The subset solve keeps every
row and demands that coupled arrays transform uniformly; the superset solve
drops rows that single out indices and forgets the uniformity demands.  When
both agree the families are tagged ``exact``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import Coupling, instantiate
from .linalg import integer_multiple, nullspace_GF2, nullspace_Q
from .model import Model, non_prior_factors
from .system import LinearSystem, ProvenanceRow, build_system

__all__ = [
    "SymmetryFamily",
    "DetectionResult",
    "detect_scaling",
    "detect_signflip",
    "detect_linear",
    "replication_ranges",
    "collect_couplings",
]


@dataclass(frozen=True)
class SymmetryFamily:
    cls: str  # "scaling" | "signflip"
    coefficients: dict  # variable -> Fraction (scaling) or 0/1 (signflip)
    replicated_over: tuple[str, ...] = ()
    bound: str = "exact"

    def __post_init__(self):
        if not any(self.coefficients.values()):
            raise ValueError("a symmetry family needs a nonzero coefficient")

    def support(self) -> list[str]:
        return [v for v, c in self.coefficients.items() if c]

    def integer_form(self) -> dict:
        if self.cls == "signflip":
            return dict(self.coefficients)
        names = list(self.coefficients)
        ints = integer_multiple([self.coefficients[n] for n in names])
        return dict(zip(names, ints))

    def key(self) -> tuple:
        return (tuple(sorted(self.coefficients.items())), self.replicated_over)

    def __str__(self) -> str:
        sym = "d" if self.cls == "scaling" else "s"
        body = ", ".join(f"{sym}({v})={c}" for v, c in self.coefficients.items() if c)
        rep = f" per {','.join(self.replicated_over)}" if self.replicated_over else ""
        return f"{body}{rep} [{self.bound}]"


@dataclass
class DetectionResult:
    cls: str
    families: list = field(default_factory=list)
    provenance: list[ProvenanceRow] = field(default_factory=list)
    system: LinearSystem | None = None

    def by_bound(self, *bounds: str) -> list:
        return [f for f in self.families if f.bound in bounds]

    @property
    def sound(self) -> list:
        return self.by_bound("exact", "subset")


def collect_couplings(model: Model, cls: str) -> list[Coupling]:
    out = []
    for f in non_prior_factors(model):
        out += instantiate(f.spec, f, model, cls).couplings
    return out


def replication_ranges(family: SymmetryFamily, model: Model,
                       couplings: list[Coupling] | None = None,
                       blocking: bool = True) -> tuple[str, ...]:
    """Ranges along which ``family`` may vary independently per index.

    A range qualifies when every variable the family moves is indexed by it
    and, if ``blocking``, no non-prior factor aggregates those variables over
    it or addresses them at a fixed or random index of it.
    """
    support = family.support()
    if not support:
        return ()
    common = set(model.variables[support[0]].index_ranges)
    for name in support[1:]:
        common &= set(model.variables[name].index_ranges)
    if blocking:
        if couplings is None:
            couplings = collect_couplings(model, family.cls)
        moved = set(support)
        for c in couplings:
            if c.var in moved and c.mode in ("equal", "pin"):
                common.discard(c.range)
    return tuple(r for r in model.ranges if r in common)


def _solve(system: LinearSystem) -> list[dict]:
    n = len(system.columns)
    if system.cls == "scaling":
        basis = nullspace_Q(system.dense(), n)
    else:
        basis = nullspace_GF2(system.dense(), n)
    out = []
    named = system.columns[: system.named]
    for vec in basis:
        lead = next(i for i, x in enumerate(vec) if x)
        if lead >= system.named:
            continue
        out.append({name: vec[i] for i, name in enumerate(named)})
    return out


def _families(system: LinearSystem, model: Model, bound: str, blocking: bool) -> list[SymmetryFamily]:
    fams = []
    for coeffs in _solve(system):
        if system.cls == "signflip":
            coeffs = {k: int(v) for k, v in coeffs.items()}
        probe = SymmetryFamily(system.cls, coeffs)
        reps = replication_ranges(probe, model, system.couplings, blocking)
        fams.append(SymmetryFamily(system.cls, coeffs, reps, bound))
    return fams


def detect_linear(model: Model, cls: str) -> DetectionResult:
    system = build_system(model, cls)
    subset = _families(system, model, "subset", True)
    superset = _families(system.without_droppable(), model, "superset", False)
    if [f.key() for f in subset] == [f.key() for f in superset]:
        families = [SymmetryFamily(f.cls, f.coefficients, f.replicated_over, "exact")
                    for f in subset]
    else:
        families = subset + superset
    return DetectionResult(cls, families, system.provenance(), system)


def detect_scaling(model: Model) -> DetectionResult:
    """Scaling families ``theta_n -> r**d_n * theta_n`` with rational exponents."""
    return detect_linear(model, "scaling")


def detect_signflip(model: Model) -> DetectionResult:
    return detect_linear(model, "signflip")
