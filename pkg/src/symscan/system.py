"""Array-level constraint systems shared by the detectors.

One unknown per continuous array; discrete and boolean arrays get no column
(their transformation is identically zero).  Literal factor arguments become
anonymous columns placed after the named variables.  Pins from observations
are explicit rows so every row has provenance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .catalog import Complementarity, Constraint, Coupling, instantiate
from .model import Model, non_prior_factors

__all__ = ["LinearSystem", "build_system", "ProvenanceRow"]


@dataclass(frozen=True)
class ProvenanceRow:
    row: int
    origin: str
    factor: int | None
    droppable: bool


@dataclass
class LinearSystem:
    cls: str
    columns: list[str]
    named: int  # columns[:named] are model variables
    rows: list[Constraint]
    couplings: list[Coupling] = field(default_factory=list)
    complementarities: list[Complementarity] = field(default_factory=list)
    literals: dict = field(default_factory=dict)

    def index(self, name: str) -> int:
        return self.columns.index(name)

    def without_droppable(self) -> "LinearSystem":
        return LinearSystem(self.cls, self.columns, self.named,
                            [r for r in self.rows if not r.droppable], [],
                            self.complementarities, self.literals)

    def dense(self) -> list[list]:
        """Rows as dense coefficient lists (rationals, bits or sparse polys)."""
        zero = {"scaling": Fraction(0), "signflip": 0, "translation": {}}[self.cls]
        pos = {c: i for i, c in enumerate(self.columns)}
        out = []
        for r in self.rows:
            row = [zero] * len(self.columns)
            for name, coef in r.terms:
                row[pos[name]] = coef
            out.append(row)
        return out

    def provenance(self) -> list[ProvenanceRow]:
        return [ProvenanceRow(i, r.origin, r.factor, r.droppable) for i, r in enumerate(self.rows)]


def _keep(model: Model, name: str) -> bool:
    var = model.variables.get(name)
    return var is None or not var.is_discrete


def build_system(model: Model, cls: str) -> LinearSystem:
    """Instantiate every non-prior factor's ``cls`` templates plus observation pins."""
    continuous = [v.name for v in model.variables.values() if not v.is_discrete]
    rows: list[Constraint] = []
    couplings: list[Coupling] = []
    comps: list[Complementarity] = []
    literals: dict = {}
    for f in non_prior_factors(model):
        inst = instantiate(f.spec, f, model, cls)
        for c in inst.constraints:
            terms = tuple((n, v) for n, v in c.terms if _keep(model, n))
            if terms:
                rows.append(Constraint(c.cls, terms, c.factor, c.origin, c.droppable))
        couplings += [c for c in inst.couplings if _keep(model, c.var)]
        comps += inst.complementarities
        literals.update(inst.literals)
    one = {"scaling": Fraction(1), "signflip": 1, "translation": {(): Fraction(1)}}[cls]
    for name in continuous:
        var = model.variables[name]
        if not var.observed:
            continue
        if var.observed_zero and cls != "translation":
            continue
        value = "" if var.observed_value is None else f" = {var.observed_value}"
        rows.append(Constraint(cls, ((name, one),), None, f"observe {name}{value}"))
    columns = continuous + sorted(literals, key=_literal_order)
    return LinearSystem(cls, columns, len(continuous), rows, couplings, comps, literals)


def _literal_order(name: str) -> tuple:
    fid, slot = name[1:].split(".", 1)
    return int(fid), slot
