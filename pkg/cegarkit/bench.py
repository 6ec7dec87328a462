"""Detector comparison over generated models."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import pandas as pd

from .abstraction import build_abstract_model, make_abstraction
from .checker import Property, check_property
from .config import AnalysisOptions, Detector, LastMode
from .counterexample import render_path
from .generator import GROUP_VAR, GenParams, gen_random_model, suggested_invisible
from .model import KripkeStructure, parse_model, validate_model
from .oracle import concretize
from .refine import run_detector
from .report import SCHEMA_VERSION, dumps

log = logging.getLogger(__name__)

AGREE = "agree"
INCOMPLETE = "detector_incomplete"
UNSOUND = "unsound"

COLUMNS = [
    "model", "trial", "kind", "property", "cfp_length", "detector", "verdict", "oracle",
    "agreement", "failure_index", "positions_examined", "positions_checked",
    "fixpoint_iterations", "unwind_used",
]


@dataclass(frozen=True)
class BenchCase:
    name: str
    model: KripkeStructure
    invisible: tuple[str, ...]


def random_case(params: GenParams) -> BenchCase:
    model = parse_model(gen_random_model(params))
    validate_model(model)
    return BenchCase(f"seed{params.seed}", model, tuple(suggested_invisible(params)))


def random_cases(seeds: Iterable[int], **params) -> list[BenchCase]:
    return [random_case(GenParams(seed=seed, **params)) for seed in seeds]


def trial_property(model: KripkeStructure, visible: Sequence[str], trial: int, kind: str) -> Property:
    var = GROUP_VAR if GROUP_VAR in visible else visible[0]
    domain = model.var(var).domain
    value = domain[trial % len(domain)]
    text = f"AG !({var}={value})" if kind == "finite" else f"GF {var}={value}"
    return Property.parse(text)


def classify(verdict: str, oracle: str) -> str:
    if verdict == oracle:
        return AGREE
    return INCOMPLETE if verdict == "real" else UNSOUND


@dataclass
class BenchReport:
    rows: list[dict] = field(default_factory=list)
    cases: int = 0
    skipped: int = 0
    timing: bool = False

    @property
    def frame(self) -> pd.DataFrame:
        columns = COLUMNS + (["wall_time"] if self.timing else [])
        return pd.DataFrame(self.rows, columns=columns)

    def agreement(self) -> dict[str, dict[str, int]]:
        df = self.frame
        if df.empty:
            return {}
        table = pd.crosstab(df["detector"], df["agreement"])
        return {
            det: {col: int(table.loc[det, col]) for col in table.columns}
            for det in table.index
        }

    def mean_positions_examined(self) -> dict[str, float]:
        df = self.frame
        if df.empty:
            return {}
        means = df.groupby("detector")["positions_examined"].mean().round(4)
        return {det: float(v) for det, v in means.items()}

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "cases": self.cases,
            "skipped": self.skipped,
            "rows": self.rows,
            "agreement": self.agreement(),
            "mean_positions_examined": self.mean_positions_examined(),
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self, path) -> None:
        self.frame.to_csv(path, index=False)

    def to_xlsx(self, path) -> None:
        summary = pd.DataFrame([
            {"detector": det, "mean positions examined": mean, **self.agreement().get(det, {})}
            for det, mean in self.mean_positions_examined().items()
        ])
        with pd.ExcelWriter(path, engine="openpyxl") as writer:
            self.frame.to_excel(writer, sheet_name="rows", index=False)
            summary.to_excel(writer, sheet_name="summary", index=False)


def _run_trial(case: BenchCase, trial: int, kind: str, detectors: Sequence[Detector],
               options: AnalysisOptions, timing: bool) -> list[dict] | None:
    amap = make_abstraction(case.model, case.invisible)
    prop = trial_property(case.model, amap.visible, trial, kind)
    ce = check_property(build_abstract_model(case.model, amap), prop)
    if ce is None:
        return None
    started = time.perf_counter()
    conc = concretize(case.model, amap, ce)
    oracle_time = time.perf_counter() - started
    rows = []
    for detector in detectors:
        if detector is Detector.ORACLE:
            verdict, stats, failure, elapsed = conc.verdict.value, None, None, oracle_time
        else:
            report = run_detector(case.model, amap, ce, options.with_(detector=detector))
            verdict, stats, failure, elapsed = (
                report.verdict.value, report.stats, report.failure_index, report.stats.elapsed,
            )
        row = {
            "model": case.name,
            "trial": trial,
            "kind": ce.kind.value,
            "property": str(prop),
            "cfp_length": len(ce),
            "detector": detector.value,
            "verdict": verdict,
            "oracle": conc.verdict.value,
            "agreement": classify(verdict, conc.verdict.value),
            "failure_index": failure,
            "positions_examined": stats.sequence_length if stats else len(ce),
            "positions_checked": stats.positions_checked if stats else len(ce),
            "fixpoint_iterations": stats.fixpoint_iterations if stats else 0,
            "unwind_used": stats.unwind if stats else 0,
        }
        if timing:
            row["wall_time"] = round(elapsed, 6)
        if row["agreement"] != AGREE:
            log.warning("%s trial %d: %s says %s, oracle says %s on %s",
                        case.name, trial, detector.value, verdict, conc.verdict.value, render_path(ce))
        rows.append(row)
    return rows


def bench_compare(
    cases: Sequence[BenchCase],
    detectors: Sequence[Detector] = (Detector.FIRST, Detector.SPLITPATH),
    trials: int = 1,
    kind: str = "finite",
    last_mode: LastMode = LastMode.UNCONSTRAINED,
    workers: int = 1,
    timing: bool = False,
    jobs: int = 1,
) -> BenchReport:
    """Run every detector and the oracle on checker-emitted counterexamples.

    ``kind`` picks the property shape: ``finite`` checks ``AG !(v=x)`` and
    ``lasso`` checks ``GF v=x``. Trials with no counterexample are counted
    as skipped. Rows come back in (case, trial, detector) order whatever
    ``jobs`` is. With ``workers`` above 1 the parallel detectors run behind
    a barrier so the per-position counts do not depend on scheduling.
    """
    if kind not in ("finite", "lasso"):
        raise ValueError(f"kind must be 'finite' or 'lasso', not {kind!r}")
    options = AnalysisOptions(last_mode=last_mode, workers=workers, barrier=True)
    work = [(case, t) for case in cases for t in range(trials)]

    def run(item):
        case, t = item
        return _run_trial(case, t, kind, list(detectors), options, timing)

    with ThreadPoolExecutor(max_workers=max(jobs, 1)) as pool:
        results = list(pool.map(run, work))

    report = BenchReport(cases=len(cases), timing=timing)
    for rows in results:
        if rows is None:
            report.skipped += 1
        else:
            report.rows.extend(rows)
    log.info("bench: %d cases, %d rows, %d trials without counterexample",
             len(cases), len(report.rows), report.skipped)
    return report
