"""Permutation symmetries.

Whole-variable permutations are automorphisms of the labeled factor graph:
one vertex per array-level variable and per factor statement, edges labeled
by argument class and index signature.  Index permutations of a range are
decided separately from catalog flags and observation status.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .model import FactorInstance, Model

__all__ = [
    "LabeledGraph",
    "PermGenerator",
    "build_labeled_graph",
    "refine",
    "automorphism_generators",
    "variable_generators",
    "detect_range_permutations",
    "detect_permutations",
    "PermutationResult",
    "group_order",
    "is_automorphism",
]


@dataclass
class LabeledGraph:
    labels: list[str] = field(default_factory=list)
    names: list[str] = field(default_factory=list)
    edges: list[tuple[int, int, str]] = field(default_factory=list)
    variable_vertices: list[int] = field(default_factory=list)

    def add_vertex(self, name: str, label: str) -> int:
        self.names.append(name)
        self.labels.append(label)
        return len(self.labels) - 1

    def adjacency(self) -> list[list[tuple[str, int]]]:
        adj: list[list[tuple[str, int]]] = [[] for _ in self.labels]
        for a, b, lab in self.edges:
            adj[a].append((lab, b))
            adj[b].append((lab, a))
        return adj

    def edge_multiset(self) -> dict:
        out: dict = defaultdict(int)
        for a, b, lab in self.edges:
            out[(min(a, b), max(a, b), lab)] += 1
        return dict(out)


@dataclass(frozen=True)
class PermGenerator:
    kind: str  # "variable-perm" | "range-perm"
    cycles: tuple = ()  # variable-perm: tuple of name cycles
    range: str | None = None

    def mapping(self) -> dict[str, str]:
        out = {}
        for cyc in self.cycles:
            for i, v in enumerate(cyc):
                out[v] = cyc[(i + 1) % len(cyc)]
        return out

    def __str__(self) -> str:
        if self.kind == "range-perm":
            return f"indices of {self.range} interchangeable"
        return "".join("(" + " ".join(c) + ")" for c in self.cycles)


# ---------------------------------------------------------------- graph


def _index_signature(arg) -> str:
    return arg.index_signature()


def _variable_label(model: Model, name: str) -> str:
    v = model.variables[name]
    kind = v.value_kind + (f"({v.value_range})" if v.value_range else "")
    obs = v.observation if v.observation != "value" else f"value={v.observed_value}"
    return f"var|{kind}|{obs}|{','.join(sorted(v.index_ranges))}"


def _factor_label(f: FactorInstance) -> str:
    spec = f.spec
    consts = []
    for slot, a in zip(spec.slots, f.args):
        if a.is_constant:
            consts.append(f"{spec.arg_class(slot)}={a.constant}")
    gates = ",".join(f"{'T' if g.branch else 'F'}{len(g.indices)}" for g in f.gate_context)
    prior = "prior" if f.is_prior else "lik"
    return f"factor|{f.kind}|{prior}|gates:{gates}|{';'.join(sorted(consts))}"


def build_labeled_graph(model: Model) -> LabeledGraph:
    g = LabeledGraph()
    vid = {}
    for name in model.variables:
        vid[name] = g.add_vertex(name, _variable_label(model, name))
        g.variable_vertices.append(vid[name])
    for f in model.factors:
        fv = g.add_vertex(f"factor{f.id}", _factor_label(f))
        spec = f.spec
        for slot, a in zip(spec.slots, f.args):
            if a.is_constant:
                continue
            g.edges.append((fv, vid[a.target], f"arg{spec.arg_class(slot)}|{_index_signature(a)}"))
            for pos, ix in enumerate(a.indices):
                if ix.kind == "rand":
                    g.edges.append((fv, vid[ix.value], f"index{spec.arg_class(slot)}.{pos}"))
        for depth, gate in enumerate(f.gate_context):
            sig = "[" + ",".join(str(i) for i in gate.indices) + "]"
            g.edges.append((fv, vid[gate.var], f"gate:{depth}:{gate.branch}|{sig}"))
    return g


# ---------------------------------------------------------------- refinement


def _initial_colors(g: LabeledGraph) -> list[int]:
    order = sorted(set(g.labels))
    rank = {lab: i for i, lab in enumerate(order)}
    return [rank[lab] for lab in g.labels]


def refine(colors: list[int], adj) -> list[int]:
    """Coarsest equitable refinement; new colors are ranks of sorted signatures."""
    cur = list(colors)
    while True:
        sigs = [(cur[v], tuple(sorted((lab, cur[u]) for lab, u in adj[v]))) for v in range(len(cur))]
        order = sorted(set(sigs))
        rank = {s: i for i, s in enumerate(order)}
        new = [rank[s] for s in sigs]
        if len(order) == len(set(cur)):
            return new
        cur = new


def _individualize(colors: list[int], v: int) -> list[int]:
    return [2 * c + (1 if w == v else 0) for w, c in enumerate(colors)]


def _target_cell(colors: list[int]) -> list[int]:
    cells: dict[int, list[int]] = defaultdict(list)
    for v, c in enumerate(colors):
        cells[c].append(v)
    best: list[int] = []
    for c in sorted(cells):
        if len(cells[c]) > len(best):
            best = cells[c]
    return best if len(best) > 1 else []


def _invariant(colors: list[int]) -> tuple:
    counts: dict[int, int] = defaultdict(int)
    for c in colors:
        counts[c] += 1
    return tuple(sorted(counts.items()))


def is_automorphism(g: LabeledGraph, perm: list[int]) -> bool:
    if any(g.labels[v] != g.labels[perm[v]] for v in range(len(perm))):
        return False
    edges = g.edge_multiset()
    mapped: dict = defaultdict(int)
    for (a, b, lab), n in edges.items():
        x, y = perm[a], perm[b]
        mapped[(min(x, y), max(x, y), lab)] += n
    return dict(mapped) == edges


def _orbit(v: int, gens: list[list[int]]) -> set[int]:
    seen = {v}
    stack = [v]
    while stack:
        x = stack.pop()
        for p in gens:
            y = p[x]
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def automorphism_generators(g: LabeledGraph) -> list[list[int]]:
    """Generators of the label-preserving automorphism group, as vertex maps.

    Individualization-refinement: follow the leftmost path to a discrete
    leaf, then, from the deepest level up, look for a leaf equivalent to the
    first one under each unexplored member of the target cell.
    """
    n = len(g.labels)
    if n == 0:
        return []
    adj = g.adjacency()
    root = refine(_initial_colors(g), adj)
    path = [root]
    cells: list[list[int]] = []
    while True:
        cell = _target_cell(path[-1])
        if not cell:
            break
        cells.append(cell)
        path.append(refine(_individualize(path[-1], cell[0]), adj))
    first_leaf = path[-1]
    gens: list[list[int]] = []

    def search(colors: list[int], depth: int) -> list[int] | None:
        if _invariant(colors) != _invariant(path[depth]):
            return None
        cell = _target_cell(colors)
        if not cell:
            perm = [0] * n
            for v, c in enumerate(first_leaf):
                perm[v] = colors.index(c)
            return perm if is_automorphism(g, perm) else None
        for w in cell:
            found = search(refine(_individualize(colors, w), adj), depth + 1)
            if found is not None:
                return found
        return None

    for level in range(len(cells) - 1, -1, -1):
        base = cells[level][0]
        for w in cells[level][1:]:
            if w in _orbit(base, gens):
                continue
            found = search(refine(_individualize(path[level], w), adj), level + 1)
            if found is not None and found != list(range(n)):
                gens.append(found)
    return gens


def group_order(gens: list[list[int]], n: int) -> int:
    """Size of the group generated by ``gens`` (closure by breadth-first search)."""
    ident = tuple(range(n))
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(g[p[i]] for i in range(n))
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return len(seen)


def _cycles(mapping: dict[str, str]) -> tuple:
    seen: set[str] = set()
    out = []
    for start in sorted(mapping):
        if start in seen or mapping[start] == start:
            continue
        cyc = [start]
        seen.add(start)
        x = mapping[start]
        while x != start:
            cyc.append(x)
            seen.add(x)
            x = mapping[x]
        out.append(tuple(cyc))
    return tuple(sorted(out))


def variable_generators(model: Model, graph: LabeledGraph | None = None) -> list[PermGenerator]:
    """Automorphism generators restricted to variables, in sorted cycle notation."""
    g = graph or build_labeled_graph(model)
    out: list[PermGenerator] = []
    for perm in automorphism_generators(g):
        mapping = {g.names[v]: g.names[perm[v]] for v in g.variable_vertices}
        cycles = _cycles(mapping)
        if cycles:
            gen = PermGenerator("variable-perm", cycles)
            if gen not in out:
                out.append(gen)
    return out


# ---------------------------------------------------------------- ranges


def _range_blockers(model: Model, r: str) -> list[str]:
    reasons = []
    for v in model.variables.values():
        if v.observed and r in v.index_ranges:
            reasons.append(f"indexes observed {v.name}")
        if v.observed and v.value_range == r:
            reasons.append(f"values of observed {v.name}")
    relabel_vars = {v.name for v in model.variables.values()
                    if v.value_kind == "discrete" and v.value_range == r}
    for f in model.factors:
        spec = f.spec
        for slot, a in zip(spec.slots, f.args):
            if a.is_constant:
                continue
            var = model.variables[a.target]
            for rng, ix in zip(var.index_ranges, a.indices):
                if rng == r and ix.kind == "lit":
                    reasons.append(f"fixed index {ix.value} of {r} in {f}")
            if a.target in relabel_vars and slot not in spec.relabel_slots:
                reasons.append(f"{f} does not allow relabeling {a.target}")
        if r in f.aggregated_ranges and not spec.symmetric_aggregation:
            reasons.append(f"{f} is not symmetric over {r}")
        if not spec.annotated and r in f.quantified_ranges:
            reasons.append(f"{f} has no annotations")
        for g in f.gate_context:
            if g.var in relabel_vars:
                reasons.append(f"gate on {g.var}")
    return reasons


def detect_range_permutations(model: Model) -> list[PermGenerator]:
    out = []
    for r in model.ranges:
        relevant = any(not v.observed and (r in v.index_ranges or v.value_range == r)
                       for v in model.variables.values())
        if relevant and not _range_blockers(model, r):
            out.append(PermGenerator("range-perm", (), r))
    return out


@dataclass
class PermutationResult:
    variable_generators: list[PermGenerator]
    permutable_ranges: list[PermGenerator]

    @property
    def found(self) -> bool:
        return bool(self.variable_generators or self.permutable_ranges)


def detect_permutations(model: Model) -> PermutationResult:
    return PermutationResult(variable_generators(model), detect_range_permutations(model))
