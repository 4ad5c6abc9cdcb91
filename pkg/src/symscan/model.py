"""Factor-graph intermediate representation.

A :class:`Model` is built once from parsed statements and is immutable
afterwards.  Arrays stay compressed: one :class:`Variable` per declared
array, one :class:`FactorInstance` per statement.  :func:`unroll` produces the
ground graph, which only the verifier uses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Union

from . import parser as ast
from .catalog import FactorSpec, UnknownFactorKind, lookup
from .parser import SourceSpan

__all__ = [
    "ModelError",
    "UndeclaredVariable",
    "ArityMismatch",
    "BadIndex",
    "MissingRangeSize",
    "UnknownKindError",
    "Range",
    "Variable",
    "IndexExpr",
    "ArgSlot",
    "Gate",
    "FactorInstance",
    "Model",
    "build_model",
    "load_model",
    "non_prior_factors",
    "GroundSlot",
    "GroundFactor",
    "GroundModel",
    "unroll",
]


class ModelError(Exception):
    def __init__(self, message: str, span: SourceSpan | None = None):
        where = f"{span}: " if span else ""
        super().__init__(where + message)
        self.message = message
        self.span = span


class UndeclaredVariable(ModelError):
    def __init__(self, name: str, span: SourceSpan | None = None):
        super().__init__(f"undeclared variable {name!r}", span)
        self.name = name


class ArityMismatch(ModelError):
    pass


class BadIndex(ModelError):
    pass


class MissingRangeSize(ModelError):
    pass


class UnknownKindError(ModelError, UnknownFactorKind):
    def __init__(self, kind: str, span: SourceSpan | None = None):
        ModelError.__init__(self, f"unknown factor kind {kind!r}", span)
        self.kind = kind

    def __str__(self) -> str:
        return self.args[0]


@dataclass(frozen=True)
class Range:
    name: str
    size: int


@dataclass(frozen=True)
class Variable:
    name: str
    value_kind: str  # real | real+ | bool | discrete
    index_ranges: tuple[str, ...] = ()
    value_range: str | None = None
    observation: str = "latent"  # latent | value | unknown
    observed_value: Union[Fraction, bool, None] = None
    span: SourceSpan | None = field(default=None, compare=False)

    @property
    def is_discrete(self) -> bool:
        return self.value_kind in ("bool", "discrete")

    @property
    def observed(self) -> bool:
        return self.observation != "latent"

    @property
    def observed_zero(self) -> bool:
        return (self.observation == "value" and not isinstance(self.observed_value, bool)
                and self.observed_value == 0)


@dataclass(frozen=True)
class IndexExpr:
    kind: str  # "range" | "lit" | "rand"
    value: Union[str, int]

    def __str__(self) -> str:
        return f"@{self.value}" if self.kind == "rand" else str(self.value)


@dataclass(frozen=True)
class ArgSlot:
    target: str | None = None
    constant: Union[Fraction, bool, None] = None
    indices: tuple[IndexExpr, ...] = ()

    @property
    def is_constant(self) -> bool:
        return self.target is None

    @property
    def pins_index(self) -> bool:
        return any(i.kind == "lit" for i in self.indices)

    @property
    def random_index(self) -> bool:
        return any(i.kind == "rand" for i in self.indices)

    def index_signature(self) -> str:
        if self.is_constant:
            return f"={self.constant}"
        return "[" + ",".join(str(i) for i in self.indices) + "]"

    def __str__(self) -> str:
        if self.is_constant:
            return str(self.constant).lower() if isinstance(self.constant, bool) else str(self.constant)
        if not self.indices:
            return self.target
        return f"{self.target}[{', '.join(str(i) for i in self.indices)}]"


@dataclass(frozen=True)
class Gate:
    var: str
    indices: tuple[IndexExpr, ...]
    branch: bool


@dataclass(frozen=True)
class FactorInstance:
    id: int
    kind: str
    args: tuple[ArgSlot, ...]
    is_prior: bool
    deterministic: bool
    gate_context: tuple[Gate, ...] = ()
    quantified_ranges: frozenset = frozenset()
    aggregated_ranges: frozenset = frozenset()
    span: SourceSpan | None = field(default=None, compare=False)

    @property
    def spec(self) -> FactorSpec:
        return lookup(self.kind, len(self.args))

    @property
    def output(self) -> ArgSlot:
        return self.args[-1]

    def slot(self, name: str) -> ArgSlot:
        return self.args[self.spec.slots.index(name)]

    def variables(self) -> list[str]:
        names = [a.target for a in self.args if not a.is_constant]
        for a in self.args:
            names += [str(i.value) for i in a.indices if i.kind == "rand"]
        names += [g.var for g in self.gate_context]
        return list(dict.fromkeys(names))

    def __str__(self) -> str:
        ins = ", ".join(str(a) for a in self.args[:-1])
        op = "=" if self.deterministic else "~"
        return f"{self.output} {op} {self.kind}({ins})"


@dataclass(frozen=True)
class Model:
    name: str
    ranges: dict
    variables: dict
    factors: tuple
    warnings: tuple = ()

    def variable(self, name: str) -> Variable:
        try:
            return self.variables[name]
        except KeyError:
            raise UndeclaredVariable(name) from None

    def factors_touching(self, var: str) -> list[FactorInstance]:
        return [f for f in self.factors if var in f.variables()]


def non_prior_factors(model: Model) -> list[FactorInstance]:
    return [f for f in model.factors if not f.is_prior]


# ---------------------------------------------------------------- building


class _Builder:
    def __init__(self, program: ast.Program, strict: bool = False):
        self.program = program
        self.ranges: dict[str, Range] = {}
        self.decls: dict[str, ast.VarDecl] = {}
        self.observations: dict[str, ast.ObserveDecl] = {}
        self.factors: list[FactorInstance] = []
        self.warnings: list[str] = []
        self.strict = strict
        self.warned: set[str] = set()

    def build(self) -> Model:
        stmts = self.program.statements
        for s in self._walk(stmts):
            if isinstance(s, ast.RangeDecl):
                if s.size < 1:
                    raise BadIndex(f"range {s.name!r} must have size >= 1", s.span)
                self.ranges[s.name] = Range(s.name, s.size)
            elif isinstance(s, ast.VarDecl):
                self.decls[s.name] = s
        for d in self.decls.values():
            for r in d.dims:
                if r not in self.ranges:
                    raise BadIndex(f"undeclared range {r!r} in declaration of {d.name!r}", d.span)
            if d.type == "discrete" and d.value_range not in self.ranges:
                raise BadIndex(f"undeclared value range {d.value_range!r}", d.span)
        for s in self._walk(stmts):
            if isinstance(s, ast.ObserveDecl):
                self._observe(s)
        self._statements(stmts, ())
        variables = {}
        for name, d in self.decls.items():
            obs = self.observations.get(name)
            if obs is None:
                observation, value = "latent", None
            elif obs.value is None:
                observation, value = "unknown", None
            else:
                observation, value = "value", obs.value.value
            variables[name] = Variable(name, d.type, d.dims, d.value_range, observation, value, d.span)
        self._lint_branch_temporaries(stmts)
        return Model(self.program.name, dict(self.ranges), variables, tuple(self.factors),
                     tuple(self.warnings))

    def _walk(self, stmts) -> Iterable:
        for s in stmts:
            yield s
            if isinstance(s, ast.IfStmt):
                yield from self._walk(s.then)
                yield from self._walk(s.orelse)

    def _decl(self, name: str, span) -> ast.VarDecl:
        if name not in self.decls:
            raise UndeclaredVariable(name, span)
        return self.decls[name]

    def _observe(self, s: ast.ObserveDecl) -> None:
        d = self._decl(s.target.name, s.target.span)
        if s.target.indices:
            raise BadIndex("observe takes a whole array, not an element", s.span)
        if s.target.name in self.observations:
            raise ModelError(f"{s.target.name!r} observed twice", s.span)
        if s.value is not None:
            v = s.value.value
            if d.type == "bool" and not isinstance(v, bool):
                raise ModelError(f"boolean {d.name!r} observed with non-boolean value", s.span)
            if d.type != "bool" and isinstance(v, bool):
                raise ModelError(f"{d.name!r} observed with a boolean value", s.span)
            if d.type == "discrete":
                size = self.ranges[d.value_range].size
                if v.denominator != 1 or not 0 <= v < size:
                    raise ModelError(f"value {v} out of range for {d.name!r}", s.span)
            if d.type == "real+" and v < 0:
                raise ModelError(f"negative value for nonnegative {d.name!r}", s.span)
        self.observations[s.target.name] = s

    def _index(self, lv: ast.LVal, d: ast.VarDecl) -> tuple[IndexExpr, ...]:
        if len(lv.indices) != len(d.dims):
            raise BadIndex(f"{d.name!r} has {len(d.dims)} indices, got {len(lv.indices)}", lv.span)
        out = []
        for rng, ix in zip(d.dims, lv.indices):
            if isinstance(ix, int):
                if not 0 <= ix < self.ranges[rng].size:
                    raise BadIndex(f"index {ix} out of bounds for range {rng!r}", lv.span)
                out.append(IndexExpr("lit", ix))
            elif ix == rng:
                out.append(IndexExpr("range", ix))
            elif ix in self.decls:
                rd = self.decls[ix]
                if rd.type != "discrete" or rd.value_range != rng or rd.dims:
                    raise BadIndex(f"random index {ix!r} must be a scalar discrete({rng})", lv.span)
                out.append(IndexExpr("rand", ix))
            elif ix in self.ranges:
                raise BadIndex(f"position of range {rng!r} indexed by range {ix!r}", lv.span)
            else:
                raise UndeclaredVariable(ix, lv.span)
        return tuple(out)

    def _slot(self, a) -> ArgSlot:
        if isinstance(a, ast.Literal):
            return ArgSlot(constant=a.value)
        d = self._decl(a.name, a.span)
        return ArgSlot(target=a.name, indices=self._index(a, d))

    def _statements(self, stmts, gates: tuple[Gate, ...]) -> None:
        for s in stmts:
            if isinstance(s, ast.FactorStmt):
                self._factor(s, gates)
            elif isinstance(s, ast.IfStmt):
                d = self._decl(s.cond.name, s.cond.span)
                if d.type != "bool":
                    raise ModelError(f"gate condition {d.name!r} must be boolean", s.span)
                idx = self._index(s.cond, d)
                self._statements(s.then, gates + (Gate(d.name, idx, True),))
                self._statements(s.orelse, gates + (Gate(d.name, idx, False),))

    def _factor(self, s: ast.FactorStmt, gates: tuple[Gate, ...]) -> None:
        args = tuple(self._slot(a) for a in s.args) + (self._slot(s.lhs),)
        try:
            spec = lookup(s.kind, len(args), strict=self.strict)
        except UnknownFactorKind as exc:
            raise UnknownKindError(s.kind, s.span) from exc
        if not spec.annotated and s.kind not in self.warned:
            self.warned.add(s.kind)
            self.warnings.append(
                f"factor kind {s.kind!r} has no annotations; its arguments are treated as pinned")
        if spec.annotated and spec.arity != len(args):
            raise ArityMismatch(
                f"{s.kind} takes {spec.arity - 1} argument(s), got {len(args) - 1}", s.span)
        if spec.annotated and spec.deterministic != (s.op == "="):
            need = "=" if spec.deterministic else "~"
            raise ModelError(f"{s.kind} must be used with {need!r}", s.span)
        if s.op == "=" and s.modifier:
            raise ModelError("prior/likelihood modifiers apply to '~' statements only", s.span)
        out = args[-1]
        if out.is_constant:
            raise ModelError("left-hand side must be a variable", s.span)
        if out.pins_index or out.random_index:
            raise BadIndex("left-hand side must be indexed by ranges only", s.span)

        mentioned: set[str] = set()
        for a in args:
            mentioned.update(str(i.value) for i in a.indices if i.kind == "range")
        for g in gates:
            mentioned.update(str(i.value) for i in g.indices if i.kind == "range")
        out_ranges = {str(i.value) for i in out.indices}
        aggregated: frozenset = frozenset()
        if spec.agg_slots:
            agg = set()
            for name, a in zip(spec.slots, args):
                if name in spec.agg_slots and not a.is_constant:
                    agg.update(str(i.value) for i in a.indices if i.kind == "range")
            agg -= out_ranges
            if len(agg) != 1:
                raise BadIndex(f"{s.kind} must aggregate over exactly one range, got {sorted(agg)}",
                               s.span)
            aggregated = frozenset(agg)
            for name, a in zip(spec.slots, args):
                if name in spec.agg_slots and not a.is_constant:
                    if not any(i.kind == "range" and i.value in agg for i in a.indices):
                        raise BadIndex(f"argument {name!r} of {s.kind} is not indexed by the "
                                       f"aggregated range", s.span)

        if s.op == "=":
            is_prior = False
        elif s.modifier:
            is_prior = s.modifier == "prior"
        else:
            is_prior = all(a.is_constant for a in args[:-1])
        self.factors.append(FactorInstance(
            len(self.factors), s.kind, args, is_prior, s.op == "=", gates,
            frozenset(mentioned), aggregated, s.span))

    def _lint_branch_temporaries(self, stmts) -> None:
        def writes(block) -> set[str]:
            return {s.lhs.name for s in self._walk(block) if isinstance(s, ast.FactorStmt)}

        def reads(block) -> set[str]:
            out = set()
            for s in self._walk(block):
                if isinstance(s, ast.FactorStmt):
                    out.update(a.name for a in s.args if isinstance(a, ast.LVal))
                elif isinstance(s, ast.IfStmt):
                    out.add(s.cond.name)
            return out

        for s in self._walk(stmts):
            if not isinstance(s, ast.IfStmt) or not s.orelse:
                continue
            both = writes(s.then) & writes(s.orelse)
            inside = set(id(x) for x in self._walk((s,)))
            outside = [x for x in self._walk(stmts) if id(x) not in inside]
            read_outside = reads(outside) | set(self.observations)
            for name in sorted(both - read_outside):
                self.warnings.append(
                    f"{name!r} is written in both branches of the gate on {s.cond.name!r} and "
                    f"never read outside it; distinct names per branch may expose more symmetries")


def build_model(program: ast.Program, strict: bool = False) -> Model:
    """Validate parsed statements and resolve them into a :class:`Model`.

    Unknown factor kinds get the all-pinned default annotations and a warning;
    with ``strict`` they raise :class:`UnknownKindError` instead.
    """
    return _Builder(program, strict).build()


def load_model(text: str, strict: bool = False) -> Model:
    return build_model(ast.parse(text), strict)


# ---------------------------------------------------------------- unrolling


ElementKey = tuple[str, tuple[int, ...]]


@dataclass(frozen=True)
class GroundSlot:
    """An argument of a ground factor.

    ``elements`` lists the addressed element keys (several for an aggregated
    slot).  A random index is kept symbolic as ``("rand", key)`` inside the
    index tuple and resolved at evaluation time.
    """

    target: str | None
    constant: Union[Fraction, bool, None]
    elements: tuple = ()
    aggregated: bool = False


@dataclass(frozen=True)
class GroundFactor:
    factor: int
    kind: str
    binding: tuple  # sorted (range, value) pairs
    slots: tuple[GroundSlot, ...]
    gates: tuple = ()  # ((element key, branch), ...)
    is_prior: bool = False
    deterministic: bool = True


@dataclass(frozen=True)
class GroundModel:
    model: Model
    sizes: dict
    elements: dict  # name -> list of index tuples
    factors: tuple

    def element_keys(self) -> list[ElementKey]:
        return [(n, i) for n, idxs in self.elements.items() for i in idxs]


def _resolve(indices: tuple[IndexExpr, ...], binding: dict, var: Variable) -> tuple:
    out = []
    for ix in indices:
        if ix.kind == "range":
            out.append(binding[ix.value])
        elif ix.kind == "lit":
            out.append(ix.value)
        else:
            out.append(("rand", (ix.value, ())))
    return tuple(out)


def unroll(model: Model, range_sizes: dict | None = None) -> GroundModel:
    """Expand every array into scalars and every statement into its instances."""
    sizes = {}
    for name, r in model.ranges.items():
        if range_sizes is not None and name in range_sizes:
            size = int(range_sizes[name])
        elif range_sizes is None:
            size = r.size
        else:
            raise MissingRangeSize(f"no size given for range {name!r}")
        if size < 1:
            raise MissingRangeSize(f"range {name!r} needs a positive size")
        sizes[name] = size
    elements = {
        v.name: list(itertools.product(*(range(sizes[r]) for r in v.index_ranges)))
        for v in model.variables.values()
    }
    ground = []
    for f in model.factors:
        spec = f.spec
        outer = sorted(f.quantified_ranges - f.aggregated_ranges)
        agg = next(iter(f.aggregated_ranges), None)
        for values in itertools.product(*(range(sizes[r]) for r in outer)):
            binding = dict(zip(outer, values))
            slots = []
            for name, a in zip(spec.slots, f.args):
                if a.is_constant:
                    slots.append(GroundSlot(None, a.constant))
                    continue
                var = model.variables[a.target]
                is_agg = agg is not None and name in spec.agg_slots
                if is_agg:
                    keys = tuple((a.target, _resolve(a.indices, {**binding, agg: j}, var))
                                 for j in range(sizes[agg]))
                else:
                    keys = ((a.target, _resolve(a.indices, binding, var)),)
                slots.append(GroundSlot(a.target, None, keys, is_agg))
            gates = tuple(((g.var, _resolve(g.indices, binding, model.variables[g.var])), g.branch)
                          for g in f.gate_context)
            ground.append(GroundFactor(f.id, f.kind, tuple(sorted(binding.items())), tuple(slots),
                                       gates, f.is_prior, f.deterministic))
    return GroundModel(model, sizes, elements, tuple(ground))
