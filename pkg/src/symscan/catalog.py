"""Factor annotation database.

Each factor kind carries, once and for all, the constraints it imposes on
scaling exponents ``d``, sign-flip bits ``s`` and translation offsets ``t`` of
its arguments, plus its permutation structure.  Slots are named; the last
slot is always the factor's output (the left-hand side of the statement).

Translation rows are lists of terms ``(coef, monomial, slot)`` meaning
``coef * prod(monomial) * t_slot``; monomials name argument slots whose
*values* multiply the offset.  On an aggregated slot the term is summed over
the aggregated range.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .model import FactorInstance, Model

__all__ = [
    "FactorSpec",
    "Constraint",
    "Coupling",
    "Complementarity",
    "Instantiation",
    "UnknownFactorKind",
    "CATALOG",
    "lookup",
    "default_spec",
    "instantiate",
    "CLASSES",
]

CLASSES = ("scaling", "signflip", "translation")

F = Fraction
TransTerm = tuple[Fraction, tuple[str, ...], str]


class UnknownFactorKind(KeyError):
    def __init__(self, kind: str):
        super().__init__(kind)
        self.kind = kind

    def __str__(self) -> str:
        return f"unknown factor kind {self.kind!r}"


@dataclass(frozen=True)
class FactorSpec:
    kind: str
    slots: tuple[str, ...]
    deterministic: bool
    scaling: tuple[dict, ...] = ()
    signflip: tuple[frozenset, ...] = ()
    translation: tuple[tuple[TransTerm, ...], ...] = ()
    complementarity: tuple[tuple[str, str], ...] = ()
    perm_classes: tuple[tuple[str, ...], ...] = ()
    # slots that range over the aggregated index (variadic arguments)
    agg_slots: tuple[str, ...] = ()
    # how translation offsets of aggregated slots combine: "sum" or "equal"
    translation_agg: str = "equal"
    # permuting the aggregated range (with matching relabeling) is harmless
    symmetric_aggregation: bool = True
    # discrete slots whose values may be relabeled by a range permutation
    relabel_slots: tuple[str, ...] = ()
    annotated: bool = True
    description: str = ""

    @property
    def output(self) -> str:
        return self.slots[-1]

    @property
    def arity(self) -> int:
        return len(self.slots)

    @property
    def index_aggregating(self) -> bool:
        return bool(self.agg_slots)

    def arg_class(self, slot: str) -> int:
        for i, cls in enumerate(self.perm_classes):
            if slot in cls:
                return i
        raise KeyError(slot)

    def rows(self, cls: str):
        return {"scaling": self.scaling, "signflip": self.signflip,
                "translation": self.translation}[cls]


def _pins(*slots: str):
    return tuple({s: F(1)} for s in slots), tuple(frozenset([s]) for s in slots), \
        tuple(((F(1), (), s),) for s in slots)


def _eq(a: str, b: str) -> dict:
    return {a: F(1), b: F(-1)}


def _t(*terms) -> tuple:
    return tuple((F(c), tuple(m), s) for c, m, s in terms)


def _singletons(slots) -> tuple:
    return tuple((s,) for s in slots)


def default_spec(kind: str, arity: int, deterministic: bool = True) -> FactorSpec:
    """All-pinned fallback: no argument may be transformed."""
    slots = tuple(f"arg{i}" for i in range(arity - 1)) + ("out",)
    sc, sf, tr = _pins(*slots)
    return FactorSpec(kind, slots, deterministic, sc, sf, tr,
                      perm_classes=_singletons(slots), annotated=False,
                      description="unannotated; every argument pinned")


def _build() -> dict[str, FactorSpec]:
    specs: list[FactorSpec] = []
    add = specs.append

    add(FactorSpec(
        "plus", ("a", "b", "c"), True,
        scaling=(_eq("a", "c"), _eq("b", "c")),
        signflip=(frozenset("ac"), frozenset("bc")),
        translation=(_t((1, (), "c"), (-1, (), "a"), (-1, (), "b")),),
        perm_classes=(("a", "b"), ("c",)),
        description="c = a + b"))
    add(FactorSpec(
        "minus", ("a", "b", "c"), True,
        scaling=(_eq("a", "c"), _eq("b", "c")),
        signflip=(frozenset("ac"), frozenset("bc")),
        translation=(_t((1, (), "c"), (-1, (), "a"), (1, (), "b")),),
        perm_classes=(("a",), ("b",), ("c",)),
        description="c = a - b"))
    # The cross term t_a*t_b vanishes on both complementarity branches.
    add(FactorSpec(
        "times", ("a", "b", "c"), True,
        scaling=({"c": F(1), "a": F(-1), "b": F(-1)},),
        signflip=(frozenset("abc"),),
        translation=(_t((1, (), "c"), (-1, ("b",), "a"), (-1, ("a",), "b")),),
        complementarity=(("a", "b"),),
        perm_classes=(("a", "b"), ("c",)),
        description="c = a * b"))
    add(FactorSpec(
        "ternary_plus", ("a", "b", "d", "c"), True,
        scaling=(_eq("a", "c"), _eq("b", "c"), _eq("d", "c")),
        signflip=(frozenset("ac"), frozenset("bc"), frozenset("dc")),
        translation=(_t((1, (), "c"), (-1, (), "a"), (-1, (), "b"), (-1, (), "d")),),
        perm_classes=(("a", "b", "d"), ("c",)),
        description="c = a + b + d"))
    add(FactorSpec(
        "copy", ("x", "y"), True,
        scaling=(_eq("x", "y"),),
        signflip=(frozenset("xy"),),
        translation=(_t((1, (), "y"), (-1, (), "x")),),
        perm_classes=(("x",), ("y",)),
        relabel_slots=("x", "y"),
        description="y = x"))
    add(FactorSpec(
        "square", ("x", "y"), True,
        scaling=({"y": F(1), "x": F(-2)},),
        signflip=(frozenset("y"),),
        translation=(_t((1, (), "x")), _t((1, (), "y"))),
        perm_classes=(("x",), ("y",)),
        description="y = x^2"))
    sc, _, tr = _pins("x", "y")
    add(FactorSpec(
        "tanh", ("x", "y"), True, scaling=sc,
        signflip=(frozenset("xy"),), translation=tr,
        perm_classes=(("x",), ("y",)),
        description="y = tanh(x)"))
    add(FactorSpec(
        "is_positive", ("x", "b"), True,
        signflip=(frozenset("x"),), translation=(_t((1, (), "x")),),
        perm_classes=(("x",), ("b",)),
        description="b = (x >= 0)"))
    add(FactorSpec(
        "nary_sum", ("x", "c"), True,
        scaling=(_eq("x", "c"),),
        signflip=(frozenset("xc"),),
        translation=(_t((1, (), "c"), (-1, (), "x")),),
        perm_classes=(("x",), ("c",)),
        agg_slots=("x",), translation_agg="sum",
        description="c = sum_r x[r]"))
    add(FactorSpec(
        "inner_product", ("w", "x", "s"), True,
        scaling=({"s": F(1), "w": F(-1), "x": F(-1)},),
        signflip=(frozenset("swx"),),
        translation=(_t((1, (), "s"), (-1, ("x",), "w"), (-1, ("w",), "x")),),
        complementarity=(("w", "x"),),
        perm_classes=(("w", "x"), ("s",)),
        agg_slots=("w", "x"), translation_agg="sum",
        description="s = sum_r w[r] * x[r]"))
    add(FactorSpec(
        "argmax", ("s", "y"), True,
        signflip=(frozenset("s"),),
        perm_classes=(("s",), ("y",)),
        agg_slots=("s",), translation_agg="equal",
        relabel_slots=("y",),
        description="y = argmax_r s[r]"))

    add(FactorSpec(
        "gaussian", ("mu", "v", "x"), False,
        scaling=(_eq("x", "mu"), {"x": F(1), "v": F(-1, 2)}),
        signflip=(frozenset(["x", "mu"]), frozenset(["v"])),
        translation=(_t((1, (), "x"), (-1, (), "mu")), _t((1, (), "v"))),
        perm_classes=(("mu",), ("v",), ("x",)),
        description="x ~ N(mu, variance v)"))
    add(FactorSpec(
        "gaussian_prec", ("mu", "tau", "x"), False,
        scaling=(_eq("x", "mu"), {"x": F(1), "tau": F(1, 2)}),
        signflip=(frozenset(["x", "mu"]), frozenset(["tau"])),
        translation=(_t((1, (), "x"), (-1, (), "mu")), _t((1, (), "tau"))),
        perm_classes=(("mu",), ("tau",), ("x",)),
        description="x ~ N(mu, precision tau)"))
    sc, sf, tr = _pins("shape", "rate", "x")
    add(FactorSpec(
        "gamma", ("shape", "rate", "x"), False,
        scaling=({"x": F(1), "rate": F(1)}, {"shape": F(1)}),
        signflip=sf, translation=tr,
        perm_classes=(("shape",), ("rate",), ("x",)),
        description="x ~ Gamma(shape, rate)"))
    add(FactorSpec(
        "constrain_nonneg", ("x",), False,
        signflip=(frozenset("x"),), translation=(_t((1, (), "x")),),
        perm_classes=(("x",),),
        description="x >= 0"))
    sc, sf, tr = _pins("p", "b")
    add(FactorSpec(
        "bernoulli", ("p", "b"), False, sc, sf, tr,
        perm_classes=(("p",), ("b",)),
        description="b ~ Bernoulli(p)"))
    sc, sf, tr = _pins("p", "y")
    add(FactorSpec(
        "discrete", ("p", "y"), False, sc, sf, tr,
        perm_classes=(("p",), ("y",)),
        agg_slots=("p",), relabel_slots=("y",),
        description="y ~ Discrete(p[r])"))
    add(FactorSpec(
        "uniform_discrete", ("y",), False,
        perm_classes=(("y",),), relabel_slots=("y",),
        description="y ~ Uniform over its value range"))

    for name, desc in (("rot_x", "out = x cos(angle) - y sin(angle)"),
                       ("rot_y", "out = x sin(angle) + y cos(angle)")):
        sc, sf, tr = _pins("x", "y", "angle", "out")
        add(FactorSpec(name, ("x", "y", "angle", "out"), True, sc, sf, tr,
                       perm_classes=_singletons(("x", "y", "angle", "out")),
                       description=desc))
    return {s.kind: s for s in specs}


CATALOG: dict[str, FactorSpec] = _build()


def lookup(kind: str, arity: int | None = None, strict: bool = False) -> FactorSpec:
    """Return the annotations for ``kind``.

    Unknown kinds fall back to the all-pinned :func:`default_spec` unless
    ``strict`` is set, in which case :class:`UnknownFactorKind` is raised.
    """
    spec = CATALOG.get(kind)
    if spec is not None:
        return spec
    if strict or arity is None:
        raise UnknownFactorKind(kind)
    return default_spec(kind, arity)


# ---------------------------------------------------------------- instantiation


Monomial = tuple[str, ...]
# sparse polynomial coefficient: {sorted symbol tuple: rational}
Coef = dict


@dataclass(frozen=True)
class Constraint:
    """One ground row over array-level unknowns.

    ``terms`` maps unknown name to a coefficient: a rational for scaling, a
    bit for sign-flip, and a sparse polynomial ``{monomial: rational}`` for
    translation.  ``droppable`` rows relate several elements of one array or
    single out an index; the superset solve ignores them.
    """

    cls: str
    terms: tuple
    factor: int | None
    origin: str
    droppable: bool = False


@dataclass(frozen=True)
class Coupling:
    """Array ``var`` is related across the elements of ``range``."""

    var: str
    range: str
    mode: str  # "equal" | "sum" | "pin"
    factor: int


@dataclass(frozen=True)
class Complementarity:
    left: str
    right: str
    factor: int


@dataclass
class Instantiation:
    constraints: list = field(default_factory=list)
    couplings: list = field(default_factory=list)
    complementarities: list = field(default_factory=list)
    # anonymous literal columns: name -> value
    literals: dict = field(default_factory=dict)


def literal_name(factor_id: int, slot: str) -> str:
    return f"#{factor_id}.{slot}"


def sum_symbol(rng: str, inner: str | None) -> str:
    return f"sum_{rng}({inner if inner is not None else 1})"


def instantiate(spec: FactorSpec, factor: "FactorInstance", model: "Model",
                cls: str) -> Instantiation:
    """Ground the ``cls`` templates of ``spec`` on one factor statement.

    Prior factors contribute nothing.  Literal arguments become anonymous
    columns; a literal is pinned unless it is zero and ``cls`` is scaling or
    sign-flip.
    """
    out = Instantiation()
    if factor.is_prior:
        return out
    origin = f"{factor.kind}@{factor.span}" if factor.span else factor.kind
    slot_map = dict(zip(spec.slots, factor.args))
    agg = next(iter(factor.aggregated_ranges), None)
    droppable_factor = any(a.pins_index or a.random_index for a in factor.args)

    def column(slot: str) -> str | None:
        arg = slot_map[slot]
        if arg.is_constant:
            if cls == "translation":
                return None
            name = literal_name(factor.id, slot)
            out.literals[name] = arg.constant
            return name
        return arg.target

    def pinned_literal(slot: str) -> bool:
        arg = slot_map[slot]
        if not arg.is_constant:
            return False
        return cls == "translation" or arg.constant != 0 or isinstance(arg.constant, bool)

    # couplings from aggregation and specific-index access
    for slot, arg in slot_map.items():
        if arg.is_constant:
            continue
        if slot in spec.agg_slots and agg is not None:
            mode = spec.translation_agg if cls == "translation" else "equal"
            out.couplings.append(Coupling(arg.target, agg, mode, factor.id))
        var = model.variables[arg.target]
        for rng, ix in zip(var.index_ranges, arg.indices):
            if ix.kind in ("lit", "rand"):
                out.couplings.append(Coupling(arg.target, rng, "pin", factor.id))

    for slot in spec.slots:
        if pinned_literal(slot) and cls != "translation":
            name = column(slot)
            out.constraints.append(Constraint(cls, ((name, F(1) if cls == "scaling" else 1),),
                                              factor.id, f"literal {slot} of {origin}"))

    sum_rows = cls == "translation" and spec.translation_agg == "sum"
    if cls == "scaling":
        for row in spec.scaling:
            terms = {}
            for slot, c in row.items():
                col = column(slot)
                terms[col] = terms.get(col, F(0)) + c
            terms = tuple((k, v) for k, v in terms.items() if v != 0)
            if terms:
                out.constraints.append(Constraint(cls, terms, factor.id, origin, droppable_factor))
    elif cls == "signflip":
        for row in spec.signflip:
            bits: dict[str, int] = {}
            for slot in row:
                col = column(slot)
                bits[col] = bits.get(col, 0) ^ 1
            terms = tuple((k, 1) for k, v in bits.items() if v)
            if terms:
                out.constraints.append(Constraint(cls, terms, factor.id, origin, droppable_factor))
    else:
        for comp in spec.complementarity:
            left, right = (slot_map[s] for s in comp)
            if not left.is_constant and not right.is_constant:
                out.complementarities.append(Complementarity(left.target, right.target, factor.id))
        for row in spec.translation:
            terms: dict[str, dict] = {}
            for coef, mono, slot in row:
                col = column(slot)
                if col is None:
                    continue
                value = Fraction(coef)
                symbols: list[str] = []
                for m in mono:
                    marg = slot_map[m]
                    if marg.is_constant:
                        value *= Fraction(marg.constant)
                    else:
                        symbols.append(marg.target)
                if value == 0:
                    continue
                if slot in spec.agg_slots and agg is not None:
                    inner = "*".join(sorted(symbols)) if symbols else None
                    symbols = [sum_symbol(agg, inner)]
                key = tuple(sorted(symbols))
                poly = terms.setdefault(col, {})
                poly[key] = poly.get(key, F(0)) + value
            clean = tuple((k, {m: c for m, c in p.items() if c != 0})
                          for k, p in terms.items() if any(c != 0 for c in p.values()))
            if clean:
                drop = droppable_factor or (sum_rows and agg is not None)
                out.constraints.append(Constraint(cls, clean, factor.id, origin, drop))
    return out
