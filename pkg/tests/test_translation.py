from pathlib import Path

import pytest
import sympy

from symscan.model import load_model
from symscan.system import build_system
from symscan.translation import (
    BRANCH_BUDGET, CaseSplitBudgetExceeded, case_split, detect_translation, enforce_dependency_rule,
)

FIX = Path(__file__).parent.parent / "fixtures"


def load(name):
    return load_model((FIX / f"{name}.fg").read_text())


def expr(poly):
    return sum((sympy.Rational(c.numerator, c.denominator) * sympy.Mul(*map(sympy.Symbol, mono))
                for mono, c in poly.items()), sympy.Integer(0))


def sound(name):
    return [f for f in detect_translation(load(name)).families if f.bound in ("exact", "subset")]


def test_fig4_two_families():
    fams = sound("fig4")
    assert [f.bound for f in fams] == ["exact", "exact"]
    assert sorted((f.offsets() for f in fams), key=str) == sorted([
        {"theta4": "t", "theta5": "theta3*t", "theta6": "theta3*t"},
        {"theta2": "t", "theta3": "theta1*t", "theta5": "theta1*theta4*t", "theta6": "theta1*theta4*t"},
    ], key=str)


def test_difficulty_single_family():
    (fam,) = sound("difficulty")
    assert fam.offsets() == {"a": "t", "d": "t"} and fam.bound == "exact"


def test_collab_subset_and_superset():
    fams = detect_translation(load("collabfilter")).families
    subset = [f for f in fams if f.bound == "subset"]
    superset = [f for f in fams if f.bound == "superset"]
    assert [f.offsets() for f in subset] == [{"b": "t", "c": "-t"}]
    moved = [set(f.offsets()) for f in superset]
    assert {"v", "b", "c"} <= moved[0] and {"u", "b", "c"} <= moved[1]


@pytest.mark.parametrize("name", [p.stem for p in sorted(FIX.glob("*.fg"))])
def test_directions_satisfy_rows_and_complementarity(name):
    res = detect_translation(load(name))
    system = res.system
    for fam in res.sound:
        for d in fam.directions:
            for row in system.rows:
                total = sum((expr(coef) * expr(d.get(var, {})) for var, coef in row.terms), sympy.Integer(0))
                assert sympy.expand(total) == 0, (name, row.origin, d)
            for comp in system.complementarities:
                assert not (d.get(comp.left) and d.get(comp.right))


def test_offsets_avoid_translated_variables():
    for path in sorted(FIX.glob("*.fg")):
        for fam in detect_translation(load_model(path.read_text())).families:
            moved = set(fam.support())
            model = load_model(path.read_text())
            assert not any(model.variables[v].observed or model.variables[v].is_discrete for v in moved)
            for d in fam.directions:
                for poly in d.values():
                    names = {s for mono in poly for s in mono}
                    assert not any(n == v or f"({v})" in n for n in names for v in moved)


def test_dependency_rule_drops_dependent_direction():
    one = {(): 1}
    d1 = {"x": {(): 1}}
    d2 = {"y": {("x",): 1}}
    assert enforce_dependency_rule([d1, d2]) == [d1]
    assert enforce_dependency_rule([d1]) == [d1]
    # mutual dependence removes both
    e1 = {"x": {("y",): 1}}
    e2 = {"y": {("x",): 1}}
    assert enforce_dependency_rule([e1, e2]) == []
    assert enforce_dependency_rule([{"z": one}, e1, e2]) == [{"z": one}]


def test_case_split_counts():
    assert len(case_split(build_system(load("fig4"), "translation"))) == 2
    assert len(case_split(build_system(load("collabfilter"), "translation"))) == 2
    # w is paired with an observed array, so no branching
    assert len(case_split(build_system(load("probit"), "translation"))) == 1


def test_case_split_budget():
    n = 13
    decls = " ".join(f"real a{i}; real b{i}; real c{i};" for i in range(n))
    stmts = " ".join(f"c{i} = times(a{i}, b{i}); c{i} ~ gaussian(0, 1) likelihood;" for i in range(n))
    m = load_model(f"model big {{ {decls} {stmts} }}")
    assert 2 ** n > BRANCH_BUDGET
    with pytest.raises(CaseSplitBudgetExceeded) as info:
        detect_translation(m)
    assert info.value.count == 2 ** n and len(info.value.factors) == n


def test_probit_replicates_over_data_dimension():
    (fam,) = sound("probit")
    assert fam.offsets() == {"w": "t", "s": "sum_d(x)*t", "sp": "sum_d(x)*t"}
    assert fam.replicated_over == (("d",),)
    assert fam.free_parameters == ["t[d]"]


def _apply_with(model, fam, params, theta, sizes):
    from symscan.model import unroll
    from symscan.verify import _Action

    return _Action(fam, unroll(model, sizes), {"directions": params}).apply(theta)


@pytest.mark.parametrize("name", ["fig4", "probit", "collabfilter", "seq_plus", "probit_noise_var"])
def test_additivity_is_exact(name):
    import itertools
    import random
    from fractions import Fraction

    from symscan.model import unroll
    from symscan.verify import _base_draw

    m = load(name)
    sizes = {r: 2 for r in m.ranges}
    ground = unroll(m, sizes)
    rng = random.Random(name)
    for fam in detect_translation(m).sound:
        for trial in range(5):
            theta = _base_draw(ground, rng)
            grids = [list(itertools.product(*(range(sizes[r]) for r in reps))) for reps in fam.replicated_over]
            c1 = [{k: Fraction(rng.randint(-9, 9), 4) for k in g} for g in grids]
            c2 = [{k: Fraction(rng.randint(-9, 9), 4) for k in g} for g in grids]
            both = [{k: a[k] + b[k] for k in a} for a, b in zip(c1, c2)]
            stepwise = _apply_with(m, fam, c2, _apply_with(m, fam, c1, theta, sizes), sizes)
            assert stepwise == _apply_with(m, fam, both, theta, sizes)


@pytest.mark.parametrize("name", [p.stem for p in sorted(FIX.glob("*.fg"))])
def test_union_is_minimal(name):
    from symscan.translation import _contained

    res = detect_translation(load(name))
    cols = res.system.columns[: res.system.named]
    for bound in ("exact", "subset", "superset"):
        fams = [f for f in res.families if f.bound == bound]
        for a in fams:
            for b in fams:
                if a is not b:
                    assert not _contained(a, b, cols)
