"""Analysis reports: assembly, user-facing warnings, JSON and text rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .linear import DetectionResult, SymmetryFamily, detect_scaling, detect_signflip
from .model import Model
from .permutation import PermutationResult, detect_permutations
from .translation import TranslationFamily, TranslationResult, detect_translation

__all__ = [
    "ALL_CLASSES",
    "AnalysisReport",
    "analyze",
    "emit_warnings",
    "fraction_text",
    "is_symmetric",
]

ALL_CLASSES = ("scaling", "signflip", "translation", "permutation")
_BOUND_ORDER = {"exact": 0, "subset": 1, "superset": 2}


def fraction_text(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass
class AnalysisReport:
    """Serializable analysis outcome.  Everything is plain data so JSON round-trips."""

    model: str
    classes: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    verification: dict | None = None

    def to_dict(self) -> dict:
        out = {"model": self.model, "classes": self.classes, "warnings": list(self.warnings)}
        if self.verification is not None:
            out["verification"] = self.verification
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisReport":
        return cls(data["model"], data.get("classes", {}), list(data.get("warnings", [])),
                   data.get("verification"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))

    def families(self, cls_name: str) -> list[dict]:
        return self.classes.get(cls_name, {}).get("families", [])

    def to_text(self) -> str:
        lines = [f"model {self.model}"]
        for name in ALL_CLASSES:
            if name not in self.classes:
                continue
            sec = self.classes[name]
            if name == "permutation":
                gens = sec["variable_generators"]
                ranges = sec["permutable_ranges"]
                lines.append("permutation:" if gens or ranges else "permutation: none")
                if gens:
                    lines.append("  variables: " + " ".join(gens))
                for r in ranges:
                    lines.append(f"  range {r}: indices interchangeable")
                continue
            fams = sec["families"]
            lines.append(f"{name}:" if fams else f"{name}: none")
            for i, fam in enumerate(fams):
                lines.append(f"  #{i} " + _family_text(name, fam))
        if self.warnings:
            lines.append("warnings:")
            lines += [f"  - {w}" for w in self.warnings]
        if self.verification is not None:
            lines.append("verification:")
            for key in sorted(self.verification):
                v = self.verification[key]
                status = "pass" if v["pass"] else "FAIL"
                lines.append(f"  {key}: {status} (max deviation {v['max_log_deviation']}, "
                             f"{v['trials']} trials, seed {v['seed']})")
        return "\n".join(lines) + "\n"


def _family_text(cls_name: str, fam: dict) -> str:
    bound = f"[{fam['bound']}]"
    rep = fam.get("replicated_over")
    if cls_name == "translation":
        body = "; ".join(f"{v} += {o}" for v, o in fam["offsets"].items())
        params = ", ".join(fam["free_parameters"])
        text = f"{bound} {body}  (parameters: {params})"
        if fam["genericity"]:
            text += "  valid where " + ", ".join(f"{g} != 0" for g in fam["genericity"])
        return text
    sym = "d" if cls_name == "scaling" else "s"
    coeffs = fam["coefficients"]
    if cls_name == "scaling":
        shown = " ".join(f"{sym}({v})={fam['integer_form'][v]}" for v in coeffs)
    else:
        shown = " ".join(f"{sym}({v})={c}" for v, c in coeffs.items())
    per = f"  per {','.join(rep)}" if rep else ""
    return f"{bound} {shown}{per}"


# ---------------------------------------------------------------- assembly


def _linear_section(result: DetectionResult) -> dict:
    fams = []
    for f in _sorted_objects(result.families, _linear_entry):
        fams.append(_linear_entry(f))
    return {"families": fams, "provenance": _provenance(result.provenance)}


def _linear_entry(f: SymmetryFamily) -> dict:
    if f.cls == "scaling":
        coeffs = {v: fraction_text(c) for v, c in f.coefficients.items()}
        entry = {"coefficients": coeffs, "integer_form": f.integer_form()}
    else:
        entry = {"coefficients": {v: int(c) for v, c in f.coefficients.items()}}
    entry.update({"replicated_over": list(f.replicated_over), "bound": f.bound})
    return entry


def _translation_entry(f: TranslationFamily) -> dict:
    from .symbolic import format_poly

    return {
        "offsets": f.offsets(),
        "directions": [{v: format_poly(p) for v, p in d.items()} for d in f.directions],
        "free_parameters": f.free_parameters,
        "replicated_over": [list(r) for r in f.replicated_over],
        "bound": f.bound,
        "genericity": list(f.genericity),
        "branch": list(f.branch),
    }


def _translation_section(result: TranslationResult) -> dict:
    fams = [_translation_entry(f) for f in _sorted_objects(result.families, _translation_entry)]
    return {"families": fams, "branches": result.branches,
            "provenance": _provenance(result.provenance)}


def _permutation_section(result: PermutationResult) -> dict:
    return {"variable_generators": [str(g) for g in result.variable_generators],
            "permutable_ranges": [g.range for g in result.permutable_ranges]}


def _sorted_objects(objs: list, entry) -> list:
    """Canonical family order: by bound, then by serialized content."""
    return sorted(objs, key=lambda f: (_BOUND_ORDER[f.bound], json.dumps(entry(f), sort_keys=True)))


def _provenance(rows) -> list[dict]:
    return [{"row": r.row, "origin": r.origin, "factor": r.factor, "droppable": r.droppable}
            for r in rows]


@dataclass
class _Detections:
    scaling: DetectionResult | None = None
    signflip: DetectionResult | None = None
    translation: TranslationResult | None = None
    permutation: PermutationResult | None = None

    def sound_families(self):
        for name in ("scaling", "signflip", "translation"):
            res = getattr(self, name)
            if res is None:
                continue
            entry = _translation_entry if name == "translation" else _linear_entry
            for f in _sorted_objects(res.families, entry):
                if f.bound in ("exact", "subset"):
                    yield name, f
        if self.permutation is not None:
            for g in self.permutation.variable_generators + self.permutation.permutable_ranges:
                yield "permutation", g


def analyze(model: Model, classes=ALL_CLASSES, verify_options: dict | None = None):
    """Run the requested detectors and build the report.

    Returns ``(report, detections)``; ``detections`` holds the detector
    objects for callers that want to verify or inspect further.
    """
    det = _Detections()
    sections = {}
    if "scaling" in classes:
        det.scaling = detect_scaling(model)
        sections["scaling"] = _linear_section(det.scaling)
    if "signflip" in classes:
        det.signflip = detect_signflip(model)
        sections["signflip"] = _linear_section(det.signflip)
    if "translation" in classes:
        det.translation = detect_translation(model)
        sections["translation"] = _translation_section(det.translation)
    if "permutation" in classes:
        det.permutation = detect_permutations(model)
        sections["permutation"] = _permutation_section(det.permutation)
    report = AnalysisReport(model.name, sections)
    report.warnings = list(model.warnings) + emit_warnings(report, model)
    if verify_options is not None:
        report.verification = _verify_all(model, det, verify_options)
    return report, det


def _verify_all(model: Model, det: _Detections, options: dict) -> dict:
    from .verify import verify

    out = {}
    counters: dict[str, int] = {}
    for name, sym in det.sound_families():
        i = counters.get(name, 0)
        counters[name] = i + 1
        res = verify(model, sym, **options)
        out[f"{name}[{i}]"] = res.to_dict()
    return out


# ---------------------------------------------------------------- warnings


def _sound(fams: list[dict]) -> list[dict]:
    return [f for f in fams if f["bound"] in ("exact", "subset")]


def _moved(fam: dict, cls_name: str) -> list[str]:
    if cls_name == "translation":
        return list(fam["offsets"])
    return [v for v, c in fam["coefficients"].items() if c not in (0, "0/1")]


def emit_warnings(report: AnalysisReport, model: Model | None = None) -> list[str]:
    """One templated warning per symmetry found, worded for model authors."""
    out = []
    for fam in _sound(report.families("scaling")):
        names = ", ".join(_moved(fam, "scaling"))
        out.append(f"scaling symmetry over {names}: these parameters are not identifiable; "
                   f"a continuum of rescaled values explains the data equally well, so point "
                   f"estimates and posterior summaries depend on initialization or the prior")
    for fam in _sound(report.families("translation")):
        names = ", ".join(_moved(fam, "translation"))
        out.append(f"translation symmetry over {names}: these parameters are not identifiable; "
                   f"a continuum of shifted values explains the data equally well")
    for fam in _sound(report.families("signflip")):
        names = ", ".join(_moved(fam, "signflip"))
        out.append(f"sign-flip symmetry over {names}: the signs of these parameters carry no "
                   f"meaning on their own; do not interpret them without fixing a convention")
    perm = report.classes.get("permutation", {})
    for gen in perm.get("variable_generators", []):
        out.append(f"permutation symmetry {gen}: the posterior has several equivalent modes; "
                   f"samples may switch between them")
    for r in perm.get("permutable_ranges", []):
        out.append(f"indices of range {r} are interchangeable: label switching makes the "
                   f"posterior multimodal, so per-index summaries across samples are unreliable")
    return out


def is_symmetric(report: AnalysisReport) -> bool:
    """True when some class found a verified-bound family, a generator or a range."""
    for name in ("scaling", "signflip", "translation"):
        if _sound(report.families(name)):
            return True
    perm = report.classes.get("permutation", {})
    return bool(perm.get("variable_generators") or perm.get("permutable_ranges"))
