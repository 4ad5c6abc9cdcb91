from fractions import Fraction
from pathlib import Path

import pytest

from symscan.linear import SymmetryFamily, detect_scaling, detect_signflip
from symscan.model import load_model
from symscan.permutation import PermGenerator
from symscan.translation import TranslationFamily, detect_translation
from symscan.verify import IdentitySymmetry, InvalidSymmetryShape, rotation_symmetry, verify

FIX = Path(__file__).parent.parent / "fixtures"


def load(name):
    return load_model((FIX / f"{name}.fg").read_text())


def fig2_family(**changes):
    coeffs = {"theta1": Fraction(1), "theta2": Fraction(1), "theta3": Fraction(1),
              "theta4": Fraction(-1), "theta5": Fraction(0)}
    coeffs.update({k: Fraction(v) for k, v in changes.items()})
    return SymmetryFamily("scaling", coeffs)


def test_identity_has_zero_deviation():
    for name in ("fig2", "collabfilter", "difficulty"):
        res = verify(load(name), IdentitySymmetry(), trials=10)
        assert res.passed and res.max_log_deviation == 0


def test_detected_scaling_passes():
    m = load("fig2")
    (fam,) = detect_scaling(m).families
    assert verify(m, fam, trials=20).passed


def test_corrupted_coefficient_fails_at_the_sum():
    m = load("fig2")
    res = verify(m, fig2_family(theta1=2), trials=10)
    assert not res.passed
    kinds = {m.factors[fid].kind for fid, _, _ in res.failures if fid >= 0}
    assert kinds == {"plus"}


def test_results_are_deterministic_per_seed():
    m = load("collabfilter")
    (fam,) = detect_signflip(m).families
    a = verify(m, fam, trials=10, seed=4)
    b = verify(m, fam, trials=10, seed=4)
    assert a.to_dict() == b.to_dict()


def test_translation_family_passes():
    m = load("fig4")
    for fam in detect_translation(m).sound:
        assert verify(m, fam, trials=10).passed


def test_superset_translation_fails():
    m = load("collabfilter")
    sup = [f for f in detect_translation(m).families if f.bound == "superset"]
    assert sup and not any(verify(m, f, trials=10).passed for f in sup)


def test_observation_must_stay_fixed():
    m = load("fig2")
    # moving theta5 would change an observed value
    res = verify(m, SymmetryFamily("scaling", {"theta3": Fraction(1), "theta5": Fraction(1)}), trials=5)
    assert not res.passed and any(fid == -1 for fid, _, _ in res.failures)


def test_rotation_local_versus_product():
    m = load("rotation")
    sym = rotation_symmetry()
    assert not verify(m, sym, trials=10).passed
    assert verify(m, sym, trials=10, mode="product").passed


def test_permutation_generator_group_mode():
    m = load("ternary_plus")
    assert verify(m, PermGenerator("variable-perm", (("a", "b"),)), trials=10).passed
    assert verify(load("collabfilter"), PermGenerator("range-perm", (), "k"), trials=10).passed
    assert not verify(load("collabfilter"), PermGenerator("range-perm", (), "n"), trials=10).passed


def test_invalid_shapes_rejected():
    m = load("fig2")
    with pytest.raises(InvalidSymmetryShape):
        verify(m, SymmetryFamily("scaling", {"nope": Fraction(1)}))
    with pytest.raises(InvalidSymmetryShape):
        verify(load("collabfilter"), PermGenerator("variable-perm", (("u", "b"),)))
    with pytest.raises(InvalidSymmetryShape):
        verify(m, TranslationFamily(({"theta1": {(): Fraction(1)}},), (("zz",),)))


def test_to_dict_is_json_friendly():
    d = verify(load("fig2"), fig2_family(theta1=2), trials=3).to_dict()
    assert d["pass"] is False and isinstance(d["max_log_deviation"], (float, str))
