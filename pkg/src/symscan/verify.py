"""Numeric soundness oracle for reported symmetries.

The model is unrolled at small sizes and a candidate symmetry is applied
elementwise to random parameter draws.  Three checks are available:

* ``factor`` (default for scaling, sign-flip and translation): each non-prior
  ground factor on its own.  Deterministic factors must map a point on the
  constraint to a point on it; stochastic factors must change their log
  density by the same amount on every draw.
* ``group`` (default for permutations): ground factors with the same label
  are pooled, since a permutation moves factors onto each other.
* ``product``: everything at once on a forward-sampled draw.  Symmetries that
  only hold for the whole product pass here but not per factor.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import mpmath

from .linear import SymmetryFamily
from .model import GroundFactor, GroundModel, Model, unroll
from .permutation import PermGenerator, build_labeled_graph
from .semantics import DETERMINISTIC, NEG_INF, STOCHASTIC, to_mpf
from .symbolic import aggregate_parts, parse_poly
from .translation import TranslationFamily

__all__ = [
    "VerificationResult",
    "InvalidSymmetryShape",
    "DegenerateDraw",
    "IdentitySymmetry",
    "CustomSymmetry",
    "rotation_symmetry",
    "verify",
    "draw_parameters",
    "default_sizes",
]

MAX_REDRAWS = 1000


class InvalidSymmetryShape(ValueError):
    pass


class DegenerateDraw(RuntimeError):
    pass


@dataclass
class VerificationResult:
    passed: bool
    max_log_deviation: float
    trials: int
    seed: int
    failures: list = field(default_factory=list)  # (factor id, trial, deviation)
    mode: str = "factor"

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "max_log_deviation": _json_float(self.max_log_deviation),
            "trials": self.trials,
            "seed": self.seed,
            "mode": self.mode,
            "failures": [[f, t, _json_float(d)] for f, t, d in self.failures[:20]],
        }


def _json_float(x: float):
    return "inf" if math.isinf(x) else float(f"{x:.6g}")


@dataclass(frozen=True)
class IdentitySymmetry:
    pass


@dataclass(frozen=True)
class CustomSymmetry:
    """An arbitrary transformation of the ground parameters.

    ``transform(theta, params, ground)`` returns the transformed mapping;
    ``draw(rng)`` picks the symmetry's own parameters once per seed.
    """

    name: str
    transform: Callable
    draw: Callable = lambda rng: {}


def rotation_symmetry(x: str = "X", y: str = "Y", angle: str = "theta") -> CustomSymmetry:
    """Rotate ``(x, y)`` by ``-phi`` and advance ``angle`` by ``phi``."""

    def transform(theta, params, ground):
        phi = params["phi"]
        out = dict(theta)
        c, s = mpmath.cos(phi), mpmath.sin(phi)
        X, Y = to_mpf(theta[(x, ())]), to_mpf(theta[(y, ())])
        out[(x, ())] = X * c + Y * s
        out[(y, ())] = -X * s + Y * c
        out[(angle, ())] = to_mpf(theta[(angle, ())]) + phi
        return out

    return CustomSymmetry("rotation", transform,
                          lambda rng: {"phi": to_mpf(Fraction(rng.randint(20, 150), 100))})


def default_sizes(model: Model, overrides: dict | None = None, size: int = 3) -> dict:
    sizes = {r: size for r in model.ranges}
    sizes.update(overrides or {})
    return sizes


# ---------------------------------------------------------------- draws


def _draw_value(var, sizes, rng: random.Random):
    kind = var.value_kind
    if kind == "bool":
        return rng.random() < 0.5
    if kind == "discrete":
        return rng.randrange(sizes[var.value_range])
    mag = Fraction(rng.randint(50, 200), 100)
    if kind == "real+":
        return mag
    return mag if rng.random() < 0.5 else -mag


def _base_draw(ground: GroundModel, rng: random.Random) -> dict:
    theta = {}
    for name, idxs in ground.elements.items():
        var = ground.model.variables[name]
        for idx in idxs:
            if var.observation == "value":
                value = var.observed_value
                theta[(name, idx)] = int(value) if var.value_kind == "discrete" else value
            else:
                theta[(name, idx)] = _draw_value(var, ground.sizes, rng)
    return theta


def _resolve(key, theta):
    name, idx = key
    if not any(isinstance(i, tuple) for i in idx):
        return key
    return name, tuple(theta[i[1]] if isinstance(i, tuple) else i for i in idx)


def _slot_value(slot, theta):
    if slot.target is None:
        return slot.constant
    vals = [theta[_resolve(k, theta)] for k in slot.elements]
    return vals if slot.aggregated else vals[0]


def _output_key(gf: GroundFactor):
    return gf.slots[-1].elements[0]


def _compute_output(gf: GroundFactor, theta):
    fn = DETERMINISTIC[gf.kind]
    return fn(*[_slot_value(s, theta) for s in gf.slots[:-1]])


def _forward_draw(ground: GroundModel, rng: random.Random) -> dict:
    theta = _base_draw(ground, rng)
    for gf in ground.factors:
        if gf.deterministic and gf.kind in DETERMINISTIC:
            key = _output_key(gf)
            if ground.model.variables[key[0]].observation != "value":
                theta[key] = _compute_output(gf, theta)
    return theta


# ---------------------------------------------------------------- symmetry parameters


def _rational(rng: random.Random, exclude_one: bool = False) -> Fraction:
    while True:
        r = Fraction(rng.randint(50, 200), 100)
        if not (exclude_one and r == 1):
            return r


def _grid(ranges, sizes) -> list[tuple]:
    return list(itertools.product(*(range(sizes[r]) for r in ranges)))


def draw_parameters(symmetry, model: Model, sizes: dict, seed: int) -> dict:
    """Concrete parameter values for ``symmetry``, fixed per seed."""
    rng = random.Random(f"{seed}:params")
    if isinstance(symmetry, SymmetryFamily):
        grid = _grid(symmetry.replicated_over, sizes)
        if symmetry.cls == "scaling":
            return {k: _rational(rng, exclude_one=True) for k in grid}
        bits = {k: int(rng.random() < 0.5) for k in grid}
        bits[grid[0]] = 1
        return bits
    if isinstance(symmetry, TranslationFamily):
        out = []
        for reps in symmetry.replicated_over:
            out.append({k: _rational(rng) * rng.choice((1, -1)) for k in _grid(reps, sizes)})
        return {"directions": out}
    if isinstance(symmetry, PermGenerator) and symmetry.kind == "range-perm":
        n = sizes[symmetry.range]
        perm = list(range(n))
        while n > 1 and perm == list(range(n)):
            rng.shuffle(perm)
        return {"perm": perm}
    if isinstance(symmetry, CustomSymmetry):
        return symmetry.draw(rng)
    return {}


# ---------------------------------------------------------------- actions


def _binding(model: Model, name: str, idx: tuple) -> dict:
    return dict(zip(model.variables[name].index_ranges, idx))


def _element(model: Model, name: str, binding: dict) -> tuple:
    return name, tuple(binding[r] for r in model.variables[name].index_ranges)


def _offset(model, sizes, var, idx, poly, reps, params, theta):
    b = _binding(model, var, idx)
    free = [r for r in reps if r not in b]
    total = Fraction(0)
    for values in itertools.product(*(range(sizes[r]) for r in free)):
        bb = {**b, **dict(zip(free, values))}
        t = params[tuple(bb[r] for r in reps)]
        for mono, coef in poly.items():
            term = coef * t
            for sym in mono:
                parts = aggregate_parts(sym)
                if parts is None:
                    term *= theta[_element(model, sym, bb)]
                    continue
                rng_name, inner = parts
                if rng_name in free:
                    prod = Fraction(1)
                    for v in inner:
                        prod *= theta[_element(model, v, bb)]
                    term *= prod
                else:
                    acc = Fraction(0)
                    for j in range(sizes[rng_name]):
                        bj = {**bb, rng_name: j}
                        prod = Fraction(1)
                        for v in inner:
                            prod *= theta[_element(model, v, bj)]
                        acc += prod
                    term *= acc
            total += term
    return total


def _pow(r: Fraction, d: Fraction):
    if d.denominator == 1:
        return r ** int(d)
    return mpmath.power(to_mpf(r), to_mpf(d))


class _Action:
    """Elementwise transformation ``key -> new value`` given the original draw."""

    def __init__(self, symmetry, ground: GroundModel, params: dict):
        self.sym = symmetry
        self.ground = ground
        self.model = ground.model
        self.params = params
        self.inverse_names = {}
        if isinstance(symmetry, PermGenerator) and symmetry.kind == "variable-perm":
            self.inverse_names = {v: k for k, v in symmetry.mapping().items()}
        if isinstance(symmetry, PermGenerator) and symmetry.kind == "range-perm":
            perm = params["perm"]
            self.perm = perm
            self.inverse = [perm.index(i) for i in range(len(perm))]

    def __call__(self, theta: dict, key) -> Any:
        name, idx = key
        s = self.sym
        if isinstance(s, IdentitySymmetry):
            return theta[key]
        if isinstance(s, SymmetryFamily):
            coef = s.coefficients.get(name, 0)
            if not coef:
                return theta[key]
            b = _binding(self.model, name, idx)
            p = self.params[tuple(b[r] for r in s.replicated_over)]
            if s.cls == "scaling":
                return theta[key] * _pow(p, Fraction(coef))
            return -theta[key] if p and coef % 2 else theta[key]
        if isinstance(s, TranslationFamily):
            value = theta[key]
            for d, reps, prm in zip(s.directions, s.replicated_over, self.params["directions"]):
                if d.get(name):
                    value = value + _offset(self.model, self.ground.sizes, name, idx, d[name],
                                            reps, prm, theta)
            return value
        if isinstance(s, PermGenerator) and s.kind == "variable-perm":
            return theta[(self.inverse_names.get(name, name), idx)]
        if isinstance(s, PermGenerator):
            var = self.model.variables[name]
            src = tuple(self.inverse[i] if r == s.range else i for r, i in zip(var.index_ranges, idx))
            value = theta[(name, src)]
            if var.value_kind == "discrete" and var.value_range == s.range:
                value = self.perm[value]
            return value
        raise InvalidSymmetryShape(f"unsupported symmetry {s!r}")

    def apply(self, theta: dict, keys=None) -> dict:
        if isinstance(self.sym, CustomSymmetry):
            return self.sym.transform(theta, self.params, self.ground)
        out = dict(theta)
        for key in keys if keys is not None else theta:
            out[key] = self(theta, key)
        return out


# ---------------------------------------------------------------- checks


def _check_shape(symmetry, model: Model) -> None:
    names: list[str] = []
    if isinstance(symmetry, SymmetryFamily):
        names = list(symmetry.coefficients)
        ranges = list(symmetry.replicated_over)
    elif isinstance(symmetry, TranslationFamily):
        names = [v for d in symmetry.directions for v in d]
        ranges = [r for reps in symmetry.replicated_over for r in reps]
    elif isinstance(symmetry, PermGenerator):
        names = [v for c in symmetry.cycles for v in c]
        ranges = [symmetry.range] if symmetry.range else []
        for c in symmetry.cycles:
            shapes = {model.variables[v].index_ranges for v in c if v in model.variables}
            if len(shapes) > 1:
                raise InvalidSymmetryShape(f"cycle {c} mixes arrays of different shapes")
    elif isinstance(symmetry, (IdentitySymmetry, CustomSymmetry)):
        return
    else:
        raise InvalidSymmetryShape(f"cannot verify {type(symmetry).__name__}")
    unknown = [n for n in names if n not in model.variables]
    if unknown:
        raise InvalidSymmetryShape(f"unknown variables {unknown}")
    bad = [r for r in ranges if r not in model.ranges]
    if bad:
        raise InvalidSymmetryShape(f"unknown ranges {bad}")


def _generic(symmetry, theta) -> bool:
    if not isinstance(symmetry, TranslationFamily):
        return True
    for note in symmetry.genericity:
        poly = parse_poly(note)
        value = Fraction(0)
        ok = True
        for mono, c in poly.items():
            term = c
            for sym in mono:
                if (sym, ()) not in theta:
                    ok = False
                    break
                term *= theta[(sym, ())]
            if not ok:
                break
            value += term
        if ok and value == 0:
            return False
    return True


def _arg_keys(gf: GroundFactor, theta) -> list:
    keys = []
    for s in gf.slots:
        keys += [_resolve(k, theta) for k in s.elements]
        for k in s.elements:
            keys += [i[1] for i in k[1] if isinstance(i, tuple)]
    keys += [g for g, _ in gf.gates]
    return keys


def _diff(a, b) -> float:
    if isinstance(a, bool) or isinstance(b, bool) or isinstance(a, int) and isinstance(b, int):
        return 0.0 if a == b else math.inf
    return abs(float(to_mpf(a) - to_mpf(b)))


def _logf(gf: GroundFactor, theta, ground: GroundModel):
    args = [_slot_value(s, theta) for s in gf.slots]
    out_var = ground.model.variables[gf.slots[-1].target]
    size = ground.sizes.get(out_var.value_range) if out_var.value_range else None
    return STOCHASTIC[gf.kind](*args, size=size)


def _residual(gf: GroundFactor, theta):
    out = theta[_output_key(gf)]
    want = _compute_output(gf, theta)
    if isinstance(out, bool) or isinstance(want, bool) or gf.kind == "argmax":
        return 0 if out == want else 1
    if isinstance(out, Fraction) and isinstance(want, Fraction):
        return out - want
    return to_mpf(out) - to_mpf(want)


def _delta(before, after):
    if before == NEG_INF and after == NEG_INF:
        return mpmath.mpf(0)
    if before == NEG_INF or after == NEG_INF:
        return mpmath.mpf("inf")
    return after - before


def _unchanged(keys, theta, moved) -> bool:
    return all(_diff(theta[k], moved[k]) == 0 for k in keys)


def verify(model: Model, symmetry, range_sizes: dict | None = None, trials: int = 100,
           seed: int = 0, tol: float = 1e-9, mode: str | None = None) -> VerificationResult:
    """Check ``symmetry`` numerically on the model unrolled at ``range_sizes``."""
    _check_shape(symmetry, model)
    sizes = default_sizes(model, range_sizes)
    ground = unroll(model, sizes)
    if mode is None:
        mode = "group" if isinstance(symmetry, PermGenerator) else "factor"
    params = draw_parameters(symmetry, model, sizes, seed)
    action = _Action(symmetry, ground, params)
    factors = [(i, gf) for i, gf in enumerate(ground.factors) if not gf.is_prior]
    labels = _group_labels(model) if mode == "group" else {}
    observed = [k for k in ground.element_keys() if model.variables[k[0]].observed]

    failures: list = []
    worst = 0.0
    reference: dict = {}

    def record(fid, trial, dev):
        nonlocal worst
        dev = float(dev)
        worst = max(worst, dev)
        if dev > tol:
            failures.append((fid, trial, dev))

    for trial in range(trials):
        rng = random.Random(f"{seed}:{trial}")
        for _ in range(MAX_REDRAWS):
            theta = _forward_draw(ground, rng) if mode == "product" else _base_draw(ground, rng)
            if _generic(symmetry, theta):
                break
        else:
            raise DegenerateDraw(f"no generic draw in {MAX_REDRAWS} attempts")

        moved = action.apply(theta, observed if mode != "product" else None)
        for k in observed:
            if _diff(theta[k], moved[k]) > tol:
                record(-1, trial, math.inf)

        if mode == "factor":
            for i, gf in factors:
                dev = _factor_deviation(gf, theta, action, ground, reference, i)
                record(gf.factor, trial, dev)
        elif mode == "group":
            moved = action.apply(theta)
            groups: dict = {}
            for i, gf in factors:
                groups.setdefault(labels[gf.factor], []).append(gf)
            for lab, members in sorted(groups.items()):
                dev = _group_deviation(members, theta, moved, ground, reference, lab)
                record(members[0].factor, trial, dev)
        else:
            moved = action.apply(theta)
            total0 = total1 = mpmath.mpf(0)
            for i, gf in factors:
                if gf.kind in DETERMINISTIC and gf.deterministic:
                    record(gf.factor, trial, abs(to_mpf(_residual(gf, moved)) - to_mpf(_residual(gf, theta))))
                elif gf.kind in STOCHASTIC:
                    total0 += _logf(gf, theta, ground)
                    total1 += _logf(gf, moved, ground)
                else:
                    keys = _arg_keys(gf, theta)
                    record(gf.factor, trial, 0 if _unchanged(keys, theta, moved) else math.inf)
            d = _delta(total0, total1)
            ref = reference.setdefault("product", d)
            record(-2, trial, abs(d - ref))
    return VerificationResult(not failures and worst <= tol, worst, trials, seed, failures, mode)


def _factor_deviation(gf, theta, action, ground, reference, i):
    local = dict(theta)
    if gf.deterministic and gf.kind in DETERMINISTIC:
        local[_output_key(gf)] = _compute_output(gf, local)
    keys = _arg_keys(gf, local)
    if isinstance(action.sym, CustomSymmetry):
        moved = action.apply(local)
    else:
        moved = action.apply(local, keys)
    if gf.deterministic and gf.kind in DETERMINISTIC:
        res = _residual(gf, moved)
        return abs(float(to_mpf(res))) if not isinstance(res, int) else (0 if res == 0 else math.inf)
    if not gf.deterministic and gf.kind in STOCHASTIC:
        d = _delta(_logf(gf, local, ground), _logf(gf, moved, ground))
        ref = reference.setdefault(i, d)
        return abs(d - ref)
    return 0 if _unchanged(keys, local, moved) else math.inf


def _group_labels(model: Model) -> dict[int, str]:
    g = build_labeled_graph(model)
    offset = len(model.variables)
    return {f.id: g.labels[offset + k] for k, f in enumerate(model.factors)}


def _group_deviation(members, theta, moved, ground, reference, label):
    det = [gf for gf in members if gf.deterministic and gf.kind in DETERMINISTIC]
    sto = [gf for gf in members if not gf.deterministic and gf.kind in STOCHASTIC]
    other = [gf for gf in members if gf not in det and gf not in sto]
    dev = 0.0
    if det:
        before = sorted(float(to_mpf(_residual(gf, theta))) for gf in det)
        after = sorted(float(to_mpf(_residual(gf, moved))) for gf in det)
        dev = max([dev] + [abs(a - b) for a, b in zip(before, after)])
    if sto:
        d = _delta(mpmath.fsum(_logf(gf, theta, ground) for gf in sto),
                   mpmath.fsum(_logf(gf, moved, ground) for gf in sto))
        ref = reference.setdefault(label, d)
        dev = max(dev, float(abs(d - ref)))
    for gf in other:
        keys = _arg_keys(gf, theta)
        if not _unchanged(keys, theta, moved):
            dev = math.inf
    return dev
