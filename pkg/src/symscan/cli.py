"""``symscan`` command line: analyze, catalog, check."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .catalog import CATALOG, FactorSpec
from .model import ModelError, load_model
from .parser import ParseError
from .report import ALL_CLASSES, analyze, fraction_text, is_symmetric
from .translation import CaseSplitBudgetExceeded

__all__ = ["main", "run", "build_parser"]

EXIT_CLEAN, EXIT_SYMMETRIC, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _classes(text: str) -> tuple[str, ...]:
    if text == "all":
        return ALL_CLASSES
    names = tuple(n.strip() for n in text.split(",") if n.strip())
    bad = [n for n in names if n not in ALL_CLASSES]
    if bad or not names:
        raise argparse.ArgumentTypeError(
            f"unknown class {', '.join(bad) or text!r}; choose from {', '.join(ALL_CLASSES)} or all")
    return tuple(n for n in ALL_CLASSES if n in names)


def _sizes(text: str) -> dict[str, int]:
    out = {}
    for item in text.split(","):
        name, sep, value = item.partition("=")
        try:
            size = int(value)
        except ValueError:
            size = 0
        if not sep or not name.strip() or size < 1:
            raise argparse.ArgumentTypeError(f"bad size {item!r}; expected name=positive integer")
        out[name.strip()] = size
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="symscan", description="Detect local parameter symmetries in factor-graph models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="run symmetry detectors on a model file")
    a.add_argument("file")
    a.add_argument("--classes", type=_classes, default=ALL_CLASSES,
                   help="comma-separated subset of scaling,signflip,translation,permutation, or all")
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.add_argument("--verify", action="store_true", help="check each sound result numerically")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--trials", type=int, default=100)
    a.add_argument("--tol", type=float, default=1e-9)
    a.add_argument("--sizes", type=_sizes, default=None, help="range sizes for verification, e.g. n=3,k=2")
    a.add_argument("--strict", action="store_true", help="reject factor kinds missing from the catalog")

    c = sub.add_parser("catalog", help="list factor kinds and their annotations")
    c.add_argument("--format", choices=("text", "json"), default="text")

    k = sub.add_parser("check", help="parse and validate a model file")
    k.add_argument("file")
    k.add_argument("--strict", action="store_true")
    return p


def _load(path: str, strict: bool):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return load_model(text, strict=strict)


def _cmd_analyze(args, out) -> int:
    model = _load(args.file, args.strict)
    options = None
    if args.verify:
        options = {"range_sizes": args.sizes, "trials": args.trials, "seed": args.seed, "tol": args.tol}
    report, _ = analyze(model, args.classes, options)
    out.write(report.to_json() if args.format == "json" else report.to_text())
    return EXIT_SYMMETRIC if is_symmetric(report) else EXIT_CLEAN


def _cmd_check(args, out) -> int:
    model = _load(args.file, args.strict)
    out.write(f"{model.name}: {len(model.variables)} variables, {len(model.factors)} factors\n")
    for w in model.warnings:
        out.write(f"warning: {w}\n")
    return EXIT_CLEAN


def _coef(x) -> str:
    return fraction_text(x) if isinstance(x, Fraction) else str(x)


def spec_dict(spec: FactorSpec) -> dict:
    return {
        "kind": spec.kind,
        "slots": list(spec.slots),
        "deterministic": spec.deterministic,
        "description": spec.description,
        "scaling": [{s: _coef(c) for s, c in sorted(row.items())} for row in spec.scaling],
        "signflip": [sorted(row) for row in spec.signflip],
        "translation": [[{"coefficient": _coef(c), "factors": list(m), "slot": s} for c, m, s in row]
                        for row in spec.translation],
        "complementarity": [list(pair) for pair in spec.complementarity],
        "perm_classes": [list(c) for c in spec.perm_classes],
        "agg_slots": list(spec.agg_slots),
    }


def _row_text(row: dict) -> str:
    return " + ".join(f"{c}*d({s})" for s, c in row.items()) + " = 0"


def _cmd_catalog(args, out) -> int:
    specs = [spec_dict(CATALOG[k]) for k in sorted(CATALOG)]
    if args.format == "json":
        out.write(json.dumps(specs, indent=2, sort_keys=True) + "\n")
        return EXIT_CLEAN
    for s in specs:
        kind = "deterministic" if s["deterministic"] else "stochastic"
        out.write(f"{s['kind']}({', '.join(s['slots'])})  {kind}  {s['description']}\n")
        for row in s["scaling"]:
            out.write(f"    scaling: {_row_text(row)}\n")
        for row in s["signflip"]:
            out.write(f"    signflip: s({') + s('.join(row)}) = 0 mod 2\n")
        if s["perm_classes"]:
            out.write("    interchangeable: " + " | ".join(",".join(c) for c in s["perm_classes"]) + "\n")
    return EXIT_CLEAN


_COMMANDS = {"analyze": _cmd_analyze, "catalog": _cmd_catalog, "check": _cmd_check}


def run(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        err.write(f"{e}\n")
        return EXIT_ERROR
    path = getattr(args, "file", "")
    try:
        return _COMMANDS[args.command](args, out)
    except FileNotFoundError:
        err.write(f"symscan: {path}: file not found\n")
    except OSError as e:
        err.write(f"symscan: {path}: {e.strerror or e}\n")
    except (ParseError, ModelError) as e:
        sep = ":" if getattr(e, "span", None) else ": "
        err.write(f"{path}{sep}{e}\n")
    except CaseSplitBudgetExceeded as e:
        err.write(f"{path}: {e}\n")
    return EXIT_ERROR


def main(argv=None) -> int:
    try:
        return run(sys.argv[1:] if argv is None else argv)
    except SystemExit as e:  # --help
        return int(e.code or 0)


if __name__ == "__main__":
    sys.exit(main())
