import io
import json
import re
from pathlib import Path

import pytest

from symscan.cli import run
from symscan.model import load_model
from symscan.report import AnalysisReport, analyze, emit_warnings

FIX = Path(__file__).parent.parent / "fixtures"
ALL = sorted(FIX.glob("*.fg"))


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_fig2_scaling_json():
    code, out, _ = call("analyze", str(FIX / "fig2.fg"), "--classes", "scaling", "--format", "json")
    assert code == 1
    (fam,) = json.loads(out)["classes"]["scaling"]["families"]
    assert fam["coefficients"] == {"theta1": "1/1", "theta2": "1/1", "theta3": "1/1",
                                   "theta4": "-1/1", "theta5": "0/1"}
    assert fam["bound"] == "exact"


def test_probit_clean_in_linear_and_permutation_classes():
    code, _, _ = call("analyze", str(FIX / "probit.fg"), "--classes", "scaling,signflip,permutation")
    assert code == 0


def test_missing_file():
    code, out, err = call("analyze", "missing.fg")
    assert code == 2 and out == "" and "missing.fg" in err and "not found" in err


def test_syntax_error_reports_span(tmp_path):
    bad = tmp_path / "bad.fg"
    bad.write_text("model m {\n  real a;\n  b = plus(a a);\n}\n")
    code, _, err = call("check", str(bad))
    assert code == 2 and re.search(r"bad\.fg:3:\d+: expected", err)


def test_usage_errors():
    assert call()[0] == 2
    assert call("analyze", str(FIX / "fig2.fg"), "--classes", "bogus")[0] == 2
    assert call("analyze", str(FIX / "fig2.fg"), "--sizes", "n=0")[0] == 2


def test_check_and_catalog():
    code, out, _ = call("check", str(FIX / "collabfilter.fg"))
    assert code == 0 and "8 variables" in out
    code, out, _ = call("catalog", "--format", "json")
    kinds = [s["kind"] for s in json.loads(out)]
    assert code == 0 and "times" in kinds and kinds == sorted(kinds)
    assert call("catalog")[0] == 0


def test_verify_flag_adds_results():
    code, out, _ = call("analyze", str(FIX / "difficulty.fg"), "--format", "json", "--verify",
                        "--trials", "5", "--sizes", "p=2,q=2")
    ver = json.loads(out)["verification"]
    assert code == 1 and set(ver) == {"scaling[0]", "translation[0]"}
    assert all(v["pass"] for v in ver.values())


@pytest.mark.parametrize("path", ALL, ids=lambda p: p.stem)
def test_json_round_trip(path):
    report, _ = analyze(load_model(path.read_text()))
    text = report.to_json()
    again = AnalysisReport.from_json(text)
    assert again == report and again.to_json() == text


def _text_sections(text):
    sections, current = {}, None
    for line in text.splitlines()[1:]:
        if not line.startswith(" "):
            current = line.split(":")[0]
            sections[current] = []
        else:
            sections[current].append(line)
    return sections


@pytest.mark.parametrize("path", ALL, ids=lambda p: p.stem)
def test_text_and_json_agree(path):
    report, _ = analyze(load_model(path.read_text()))
    text = report.to_text()
    sections = _text_sections(text)
    for cls in ("scaling", "signflip", "translation"):
        fams = report.families(cls)
        assert len(sections[cls]) == len(fams)
        for fam in fams:
            if cls == "translation":
                for var, off in fam["offsets"].items():
                    assert f"{var} += {off}" in text
            else:
                for var, c in fam["coefficients"].items():
                    value = fam["integer_form"][var] if cls == "scaling" else c
                    assert f"({var})={value}" in text


def test_family_ordering_is_canonical():
    report, _ = analyze(load_model((FIX / "collabfilter.fg").read_text()))
    bounds = [f["bound"] for f in report.families("translation")]
    assert bounds == sorted(bounds, key=["exact", "subset", "superset"].index)


def test_warnings():
    report, _ = analyze(load_model((FIX / "difficulty.fg").read_text()))
    assert any("continuum" in w and "identifiable" in w for w in report.warnings)
    collab, _ = analyze(load_model((FIX / "collabfilter.fg").read_text()))
    assert any("label switching" in w and "range k" in w for w in collab.warnings)
    assert any("sign" in w for w in collab.warnings)
    assert emit_warnings(AnalysisReport("empty")) == []


def test_warnings_skip_superset_only_results():
    report, _ = analyze(load_model((FIX / "gate_scale.fg").read_text()))
    assert report.warnings == []
