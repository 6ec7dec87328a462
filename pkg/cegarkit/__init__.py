"""Spurious counterexample detection and abstraction refinement for explicit-state models."""

__version__ = "0.3.0"

from .abstraction import (
    AbstractionMap,
    AbstractModel,
    build_abstract_model,
    h_inverse,
    make_abstraction,
    render_abstract_model,
)
from .checker import Property, check_property
from .config import AnalysisOptions, Detector, LastMode, ParallelMode, Verdict
from .counterexample import Counterexample, cfp, parse_path, render_path
from .errors import CegarKitError
from .model import KripkeStructure, build_model, load_model, load_sample, parse_model, render_model
from .oracle import concretize, concretize_finite, concretize_lasso, explain_spurious
from .refine import CegarResult, Outcome, cegar, refine, run_detector
from .spurious import (
    check_spurious_first,
    check_spurious_heaviest,
    check_spurious_parallel,
    in_set,
    is_failure_state,
    out_set,
    partition_origins,
    split_path,
)

__all__ = [
    "AbstractModel",
    "AbstractionMap",
    "AnalysisOptions",
    "CegarKitError",
    "CegarResult",
    "Counterexample",
    "Detector",
    "KripkeStructure",
    "LastMode",
    "Outcome",
    "ParallelMode",
    "Property",
    "Verdict",
    "build_abstract_model",
    "build_model",
    "cegar",
    "cfp",
    "check_property",
    "check_spurious_first",
    "check_spurious_heaviest",
    "check_spurious_parallel",
    "concretize",
    "concretize_finite",
    "concretize_lasso",
    "explain_spurious",
    "h_inverse",
    "in_set",
    "is_failure_state",
    "load_model",
    "load_sample",
    "make_abstraction",
    "out_set",
    "parse_model",
    "parse_path",
    "partition_origins",
    "refine",
    "render_abstract_model",
    "render_model",
    "render_path",
    "run_detector",
    "split_path",
]
