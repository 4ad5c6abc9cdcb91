from collections import Counter
from pathlib import Path

import pytest

from symscan.model import (
    ArityMismatch, BadIndex, ModelError, UndeclaredVariable, UnknownKindError, load_model, unroll,
)

FIX = Path(__file__).parent.parent / "fixtures"


def load(name):
    return load_model((FIX / f"{name}.fg").read_text())


def test_fig2_shape():
    m = load("fig2")
    assert len(m.variables) == 5 and len(m.factors) == 5
    assert [f.is_prior for f in m.factors] == [True, True, True, False, False]
    assert m.variables["theta5"].observed and not m.variables["theta3"].observed


def test_empty_program():
    m = load_model("model empty { }")
    assert m.name == "empty" and not m.variables and not m.factors


def test_undeclared_variable_has_span():
    with pytest.raises(UndeclaredVariable) as info:
        load_model("model m {\n  real a; real c;\n  c = plus(w, a);\n}")
    assert info.value.name == "w" and info.value.span.line == 3


def test_arity_mismatch():
    with pytest.raises(ArityMismatch):
        load_model("model m { real a; real c; c = plus(a); }")


def test_bad_index_range():
    with pytest.raises(BadIndex):
        load_model("model m { range n = 2; range k = 2; real a[n]; real c[n]; c[n] = copy(a[k]); }")


def test_unknown_kind_warns_or_fails_in_strict_mode():
    text = "model m { real a; real c; c = frob(a); }"
    m = load_model(text)
    assert any("frob" in w for w in m.warnings)
    with pytest.raises(UnknownKindError):
        load_model(text, strict=True)
    assert issubclass(UnknownKindError, ModelError)


def test_prior_marking_follows_parameters_and_modifier():
    m = load("probit_noise_var")
    prior = {f.args[-1].target: f.is_prior for f in m.factors}
    assert prior["u"] and prior["w"]
    assert not prior["s"] and not prior["sp"]
    m2 = load_model("model m { real a; real b; a ~ gaussian(0, 1) likelihood; b ~ gaussian(a, 1) prior; }")
    assert [f.is_prior for f in m2.factors] == [False, True]


def test_unroll_counts_collab_filter():
    m = load("collabfilter")
    g = unroll(m, {"n": 2, "m": 2, "k": 2})
    counts = Counter(f.kind for f in g.factors)
    assert counts["times"] == 8 and counts["nary_sum"] == 4 and counts["ternary_plus"] == 4
    agg = [f for f in g.factors if f.kind == "nary_sum"][0]
    assert len(agg.slots[0].elements) == 2


def test_unroll_uses_declared_sizes_by_default():
    g = unroll(load("probit"))
    assert Counter(f.kind for f in g.factors)["argmax"] == 3


def test_branch_temporary_lint():
    text = """model m {
      bool b; real y; real t; real z;
      y ~ gaussian(0, 1);
      if (b) { t = copy(y); } else { t = square(y); }
    }"""
    assert any("t" in w and "branch" in w for w in load_model(text).warnings)
    read_later = text.replace("}\n    }", "}\n      z ~ gaussian(t, 1);\n    }")
    assert not any("branch" in w for w in load_model(read_later).warnings)


def test_gate_context_recorded():
    m = load("gate_scale")
    gated = [f for f in m.factors if f.gate_context]
    assert [g.branch for f in gated for g in f.gate_context] == [True, False]


ALL = sorted(FIX.glob("*.fg"))


@pytest.mark.parametrize("path", ALL, ids=lambda p: p.stem)
def test_unroll_preserves_factor_kinds(path):
    m = load_model(path.read_text())
    assert {f.kind for f in unroll(m).factors} == {f.kind for f in m.factors}


@pytest.mark.parametrize("path", ALL, ids=lambda p: p.stem)
def test_priors_add_no_rows(path):
    from symscan.system import build_system

    m = load_model(path.read_text())
    stripped = tuple(f for f in m.factors if not f.is_prior)
    no_priors = type(m)(m.name, m.ranges, m.variables, stripped, m.warnings)
    for cls in ("scaling", "signflip", "translation"):
        rows = sorted(repr(r.terms) for r in build_system(m, cls).rows)
        assert rows == sorted(repr(r.terms) for r in build_system(no_priors, cls).rows)


@pytest.mark.parametrize("path", ALL, ids=lambda p: p.stem)
def test_factor_references_are_declared(path):
    m = load_model(path.read_text())
    for f in m.factors:
        assert set(f.variables()) <= set(m.variables)
