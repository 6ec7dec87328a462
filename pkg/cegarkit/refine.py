"""Failure-state refinement and the abstraction-refinement loop."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Iterable

from .abstraction import AbstractClass, AbstractionMap, build_abstract_model, make_abstraction
from .checker import Property, check_formula_scope, check_property
from .config import AnalysisOptions, Detector, ParallelMode
from .counterexample import Counterexample, validate_counterexample
from .errors import RefinementError
from .model import KripkeStructure
from .oracle import Concretization, concretize, explain_spurious
from .spurious import (
    Partition,
    SpuriousReport,
    check_spurious_first,
    check_spurious_heaviest,
    check_spurious_parallel,
    split_path,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RefinementStep:
    failure_state: str
    partition: Partition
    new_classes: tuple[AbstractClass, ...]
    amap: AbstractionMap = field(repr=False, compare=False)


def refine(amap: AbstractionMap, failure_state: str, partition: Partition) -> RefinementStep:
    """Replace the failure class by its non-empty dead/bad/isolated pieces."""
    fiber = amap.h_inverse(failure_state)
    covered = partition.dead | partition.bad | partition.isolated
    if covered != fiber:
        raise RefinementError(f"partition does not cover the origins of {failure_state!r}")
    pieces = partition.pieces()
    if len(pieces) < 2:
        raise RefinementError(f"degenerate split of {failure_state!r}: only one non-empty class")
    refined = amap.replace(failure_state, pieces)
    new_ids = set(refined.ids) - set(amap.ids)
    new_classes = tuple(c for c in refined if c.id in new_ids)
    log.info("split %s into %s", failure_state, ", ".join(c.id for c in new_classes))
    return RefinementStep(failure_state, partition, new_classes, refined)


def run_detector(
    model: KripkeStructure,
    amap: AbstractionMap,
    ce: Counterexample,
    options: AnalysisOptions = AnalysisOptions(),
) -> SpuriousReport:
    if options.detector is Detector.ORACLE:
        return explain_spurious(model, amap, ce)
    if options.detector is Detector.SPLITPATH:
        return split_path(model, amap, ce, options.unwind)
    if options.parallel:
        mode = ParallelMode.FIRST_DETECTED if options.detector is Detector.FIRST else ParallelMode.HEAVIEST
        return check_spurious_parallel(model, amap, ce, options.last_mode, mode, options.workers, options.barrier)
    if options.detector is Detector.HEAVIEST:
        return check_spurious_heaviest(model, amap, ce, options.last_mode)
    return check_spurious_first(model, amap, ce, options.last_mode)


class Outcome(str, enum.Enum):
    VERIFIED = "verified"
    REAL_COUNTEREXAMPLE = "real_counterexample"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class CegarIteration:
    iteration: int
    counterexample: Counterexample
    report: SpuriousReport
    step: RefinementStep | None
    note: str | None = None
    oracle: Concretization | None = None


@dataclass(frozen=True)
class CegarResult:
    outcome: Outcome
    iterations: int
    trace: tuple[CegarIteration, ...]
    amap: AbstractionMap = field(repr=False)
    counterexample: Counterexample | None = None
    witness: Concretization | None = None

    def __post_init__(self):
        if self.outcome is Outcome.REAL_COUNTEREXAMPLE and (self.witness is None or not self.witness.real):
            raise ValueError("a real counterexample needs an oracle witness")


def cegar(
    model: KripkeStructure,
    invisible: Iterable[str],
    prop: Property,
    options: AnalysisOptions = AnalysisOptions(),
) -> CegarResult:
    """Abstract, check, analyse, refine; repeat until verified, real or out of budget.

    The detector drives refinement. Whenever it claims a counterexample is
    real, or hands back a split that cannot make progress, the oracle decides
    and its failure position is used instead.
    """
    amap = make_abstraction(model, invisible)
    check_formula_scope(build_abstract_model(model, amap), prop.formula)
    trace: list[CegarIteration] = []
    ce = None

    for iteration in range(1, options.max_iterations + 1):
        abstract = build_abstract_model(model, amap)
        ce = check_property(abstract, prop)
        log.info("iteration %d: %d abstract states, %s", iteration, len(amap), ce or "no counterexample")
        if ce is None:
            return CegarResult(Outcome.VERIFIED, iteration, tuple(trace), amap)
        validate_counterexample(abstract, ce)

        report = run_detector(model, amap, ce, options)
        note = None
        oracle = None
        basis = report
        if not report.spurious:
            oracle = concretize(model, amap, ce)
            if oracle.real:
                trace.append(CegarIteration(iteration, ce, report, None, None, oracle))
                return CegarResult(Outcome.REAL_COUNTEREXAMPLE, iteration, tuple(trace), amap, ce, oracle)
            log.warning("iteration %d: %s detector reports real, oracle refutes %s",
                        iteration, report.detector, ce)
            note = "detector_incomplete"
            basis = explain_spurious(model, amap, ce)

        try:
            step = refine(amap, basis.failure_state, basis.partition)
        except RefinementError as exc:
            oracle = concretize(model, amap, ce)
            if oracle.real:
                log.warning("iteration %d: %s; oracle confirms %s is real", iteration, exc, ce)
                trace.append(CegarIteration(iteration, ce, report, None, "detector_unsound", oracle))
                return CegarResult(Outcome.REAL_COUNTEREXAMPLE, iteration, tuple(trace), amap, ce, oracle)
            log.warning("iteration %d: %s; refining at the oracle's failure position", iteration, exc)
            note = "degenerate_split"
            fallback = explain_spurious(model, amap, ce)
            step = refine(amap, fallback.failure_state, fallback.partition)

        trace.append(CegarIteration(iteration, ce, report, step, note, oracle))
        amap = step.amap

    return CegarResult(Outcome.BUDGET_EXHAUSTED, options.max_iterations, tuple(trace), amap, ce)

