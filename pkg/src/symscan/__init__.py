"""Static detection of local parameter symmetries in factor-graph models."""

from .model import Model, build_model, load_model, unroll
from .parser import parse, pretty
from .linear import detect_scaling, detect_signflip
from .translation import detect_translation
from .permutation import detect_permutations
from .report import AnalysisReport, analyze, emit_warnings
from .verify import verify

__all__ = [
    "AnalysisReport",
    "Model",
    "analyze",
    "build_model",
    "detect_permutations",
    "detect_scaling",
    "detect_signflip",
    "detect_translation",
    "emit_warnings",
    "load_model",
    "parse",
    "pretty",
    "unroll",
    "verify",
]

__version__ = "0.1.0"
