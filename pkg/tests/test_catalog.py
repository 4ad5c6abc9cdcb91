"""Numerical audit of catalog annotations against factor semantics.

For every kind, transformations in the null space of its rows must preserve
the factor, and moving a single constrained slot must break it.
"""

import random
from fractions import Fraction

import mpmath
import pytest

from symscan.catalog import CATALOG, UnknownFactorKind, default_spec, lookup
from symscan.linalg import nullspace_GF2, nullspace_Q
from symscan.semantics import DETERMINISTIC, STOCHASTIC, has_semantics, to_mpf

DISCRETE_SLOTS = {("bernoulli", "b"), ("is_positive", "b"), ("argmax", "y"), ("discrete", "y")}
POSITIVE = {("gamma", "shape"), ("gamma", "rate"), ("gamma", "x"), ("gaussian", "v"),
            ("gaussian_prec", "tau"), ("discrete", "p"), ("constrain_nonneg", "x")}
VECTOR = 3
DRAWS = 100


def _real(rng, positive=False):
    x = Fraction(rng.randint(50, 200), 100)
    return x if positive or rng.random() < 0.5 else -x


def _draw(spec, rng):
    vals = {}
    for slot in spec.slots:
        key = (spec.kind, slot)
        if key in DISCRETE_SLOTS:
            vals[slot] = rng.random() < 0.5 if slot == "b" else rng.randrange(VECTOR)
        elif spec.kind == "bernoulli":
            vals[slot] = Fraction(rng.randint(10, 90), 100)
        elif slot in spec.agg_slots:
            vals[slot] = [_real(rng, key in POSITIVE) for _ in range(VECTOR)]
        else:
            vals[slot] = _real(rng, key in POSITIVE)
    if spec.kind == "discrete":
        total = sum(vals["p"])
        vals["p"] = [x / total for x in vals["p"]]
    if spec.deterministic:
        vals[spec.output] = DETERMINISTIC[spec.kind](*[vals[s] for s in spec.slots[:-1]])
    return vals


def _apply(vals, op):
    out = {}
    for slot, v in vals.items():
        out[slot] = [op(slot, x) for x in v] if isinstance(v, list) else op(slot, v)
    return out


def _close(a, b):
    if isinstance(a, (bool, int)) and isinstance(b, (bool, int)):
        return a == b
    return abs(to_mpf(a) - to_mpf(b)) < mpmath.mpf(10) ** -30


def _evaluate(spec, vals):
    if spec.deterministic:
        return _close(DETERMINISTIC[spec.kind](*[vals[s] for s in spec.slots[:-1]]), vals[spec.output])
    return STOCHASTIC[spec.kind](*[vals[s] for s in spec.slots], size=VECTOR)


def _preserved(spec, transform, seed):
    """True when ``transform`` keeps the factor invariant up to a constant."""
    rng = random.Random(seed)
    deltas = []
    for _ in range(DRAWS):
        vals = _draw(spec, rng)
        moved = _apply(vals, transform)
        if spec.deterministic:
            if not _evaluate(spec, moved):
                return False
            continue
        before, after = _evaluate(spec, vals), _evaluate(spec, moved)
        if not (mpmath.isfinite(before) and mpmath.isfinite(after)):
            return False
        deltas.append(after - before)
    return all(abs(d - deltas[0]) < mpmath.mpf(10) ** -30 for d in deltas)


def _real_slots(spec):
    return [s for s in spec.slots if (spec.kind, s) not in DISCRETE_SLOTS]


def _scaling(exps, r):
    def op(slot, x):
        d = exps.get(slot, 0)
        if d == 0 or isinstance(x, bool) or isinstance(x, int):
            return x
        return to_mpf(x) * mpmath.power(r, to_mpf(d))
    return op


def _signflip(bits):
    def op(slot, x):
        return -x if bits.get(slot) and not isinstance(x, (bool, int)) else x
    return op


def _matrix(rows, slots, value=lambda c: c):
    return [[value(row.get(s, 0)) if isinstance(row, dict) else int(s in row) for s in slots] for row in rows]


KINDS = sorted(k for k in CATALOG if k != "uniform_discrete")


@pytest.mark.parametrize("kind", KINDS)
def test_scaling_annotations(kind):
    spec = CATALOG[kind]
    slots = _real_slots(spec)
    m = _matrix(spec.scaling, slots)
    kernel = nullspace_Q(m, len(slots)) if m else [tuple(int(i == j) for j in range(len(slots)))
                                                   for i in range(len(slots))]
    for k, vec in enumerate(kernel):
        exps = dict(zip(slots, vec))
        assert _preserved(spec, _scaling(exps, mpmath.mpf(3) / 2), seed=k), (kind, exps)
    # a slot with a nonzero coefficient in some row cannot move alone
    for s in {s for row in spec.scaling for s, c in row.items() if c and s in slots}:
        assert not _preserved(spec, _scaling({s: 1}, mpmath.mpf(3) / 2), seed=99), (kind, s)


@pytest.mark.parametrize("kind", KINDS)
def test_signflip_annotations(kind):
    spec = CATALOG[kind]
    slots = _real_slots(spec)
    rows = [row & set(slots) for row in spec.signflip]
    rows = [r for r in rows if r]
    m = _matrix(rows, slots)
    kernel = nullspace_GF2(m, len(slots)) if m else [tuple(int(i == j) for j in range(len(slots)))
                                                     for i in range(len(slots))]
    for k, vec in enumerate(kernel):
        bits = dict(zip(slots, vec))
        assert _preserved(spec, _signflip(bits), seed=k), (kind, bits)
    for s in {s for r in rows for s in r}:
        assert not _preserved(spec, _signflip({s: 1}), seed=7), (kind, s)


LINEAR_TRANSLATION = [k for k in KINDS if not CATALOG[k].agg_slots
                      and all(not m for row in CATALOG[k].translation for _, m, _ in row)]


@pytest.mark.parametrize("kind", LINEAR_TRANSLATION)
def test_linear_translation_annotations(kind):
    spec = CATALOG[kind]
    slots = _real_slots(spec)
    rows = [{s: c for c, _, s in row if s in slots} for row in spec.translation]
    m = _matrix([r for r in rows if r], slots)
    kernel = nullspace_Q(m, len(slots)) if m else [tuple(int(i == j) for j in range(len(slots)))
                                                   for i in range(len(slots))]
    t = Fraction(3, 7)
    for k, vec in enumerate(kernel):
        shift = dict(zip(slots, vec))
        op = (lambda sh: lambda slot, x: x + sh.get(slot, 0) * t
              if not isinstance(x, (bool, int)) else x)(shift)
        assert _preserved(spec, op, seed=k), (kind, shift)


def test_times_translation_with_product_offsets():
    spec = CATALOG["times"]
    # a += t with b untouched needs c += b t; cross term a*b remains from a and b both moving
    t = Fraction(2, 5)
    rng = random.Random(3)
    for _ in range(10):
        a, b = _real(rng), _real(rng)
        assert (a + t) * b == a * b + b * t
    assert spec.complementarity == (("a", "b"),)


def test_nary_sum_translation_sums_offsets():
    v = [Fraction(1), Fraction(-2), Fraction(5, 3)]
    shifts = [Fraction(1, 2), Fraction(3), Fraction(-1, 4)]
    assert DETERMINISTIC["nary_sum"]([x + s for x, s in zip(v, shifts)]) == sum(v) + sum(shifts)


def test_every_kind_has_semantics():
    assert all(has_semantics(k) for k in CATALOG)


def test_lookup_fallbacks():
    assert lookup("plus") is CATALOG["plus"]
    spec = lookup("mystery", arity=3)
    assert spec == default_spec("mystery", 3) and not spec.annotated
    with pytest.raises(UnknownFactorKind):
        lookup("mystery", arity=3, strict=True)
    with pytest.raises(UnknownFactorKind):
        lookup("mystery")


def test_default_spec_pins_every_slot():
    spec = default_spec("mystery", 2)
    assert len(spec.scaling) == spec.arity
    assert all(len(row) == 1 for row in spec.scaling)
