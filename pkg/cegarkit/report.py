"""Machine-readable and tabular views of analysis results.

One JSON schema is shared by ``analyze``, ``cegar`` and ``bench``. Output is
canonical (sorted keys, fixed indent, no timings unless asked for), so equal
inputs produce byte-identical documents.
"""
from __future__ import annotations

import json
from typing import Any, Iterable

import pandas as pd

from .abstraction import AbstractionMap
from .config import LastMode
from .counterexample import Counterexample, cfp, render_concrete, render_path
from .model import KripkeStructure
from .oracle import Concretization
from .refine import CegarResult, RefinementStep
from .spurious import DetectorStats, SpuriousReport, is_failure_state, position_weights

SCHEMA_VERSION = 1


def dumps(document: Any) -> str:
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _ids(states: Iterable[str], model: KripkeStructure | None = None) -> list[str]:
    if model is not None:
        return model.ordered(states)
    return sorted(states)


def counterexample_to_dict(ce: Counterexample) -> dict:
    return {
        "kind": ce.kind.value,
        "states": list(ce.states),
        "loop_start": ce.loop_start,
        "text": render_path(ce),
    }


def stats_to_dict(stats: DetectorStats, timing: bool = False) -> dict:
    doc = {
        "sequence_length": stats.sequence_length,
        "positions_checked": stats.positions_checked,
        "fixpoint_iterations": stats.fixpoint_iterations,
        "stage_counts": {str(i): list(c) for i, c in sorted(stats.stage_counts.items())},
        "fiber_sizes": {str(i): n for i, n in sorted(stats.fiber_sizes.items())},
        "position_status": list(stats.position_status),
        "visit_order": list(stats.visit_order),
        "unwind": stats.unwind,
        "image_sizes": list(stats.image_sizes),
        "unwound_failure_index": stats.unwound_failure_index,
    }
    if timing:
        doc["elapsed"] = round(stats.elapsed, 6)
    return doc


def report_to_dict(report: SpuriousReport, model: KripkeStructure | None = None, timing: bool = False) -> dict:
    doc: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "detector": report.detector,
        "verdict": report.verdict.value,
        "counterexample": counterexample_to_dict(report.counterexample),
        "failure_index": report.failure_index,
        "failure_state": report.failure_state,
        "dead": None,
        "bad": None,
        "isolated": None,
        "weights": [
            {"state": w.state, "ein": w.ein, "eout": w.eout, "weight": w.weight} for w in report.weights
        ],
        "stats": stats_to_dict(report.stats, timing),
    }
    if report.partition is not None:
        doc["dead"] = _ids(report.partition.dead, model)
        doc["bad"] = _ids(report.partition.bad, model)
        doc["isolated"] = _ids(report.partition.isolated, model)
    if report.in_out is not None:
        doc["in_set"] = _ids(report.in_out.in_set, model)
        doc["out_set"] = _ids(report.in_out.out_set, model)
    return doc


def concretization_to_dict(conc: Concretization) -> dict:
    doc = {"verdict": conc.verdict.value, "product_size": conc.product_size}
    if conc.real:
        doc["witness"] = render_concrete(conc.path or conc.stem, conc.cycle)
    return doc


def step_to_dict(step: RefinementStep, model: KripkeStructure | None = None) -> dict:
    return {
        "failure_state": step.failure_state,
        "new_classes": [{"id": c.id, "origins": _ids(c.origins, model)} for c in step.new_classes],
    }


def cegar_to_dict(result: CegarResult, model: KripkeStructure | None = None, timing: bool = False) -> dict:
    trace = []
    for it in result.trace:
        trace.append({
            "iteration": it.iteration,
            "counterexample": counterexample_to_dict(it.counterexample),
            "report": report_to_dict(it.report, model, timing),
            "refinement": step_to_dict(it.step, model) if it.step else None,
            "note": it.note,
            "oracle": concretization_to_dict(it.oracle) if it.oracle else None,
        })
    return {
        "schema": SCHEMA_VERSION,
        "outcome": result.outcome.value,
        "iterations": result.iterations,
        "abstract_states": len(result.amap),
        "counterexample": counterexample_to_dict(result.counterexample) if result.counterexample else None,
        "witness": concretization_to_dict(result.witness) if result.witness else None,
        "trace": trace,
    }


def render_report_text(report: SpuriousReport) -> str:
    lines = [f"{report.detector}: {report.verdict.value}  {render_path(report.counterexample)}"]
    if report.spurious:
        lines.append(f"failure at position {report.failure_index} ({report.failure_state})")
        if report.partition is not None:
            p = report.partition
            lines.append(f"  dead:     {' '.join(sorted(p.dead)) or '-'}")
            lines.append(f"  bad:      {' '.join(sorted(p.bad)) or '-'}")
            lines.append(f"  isolated: {' '.join(sorted(p.isolated)) or '-'}")
    s = report.stats
    lines.append(f"positions: {s.positions_checked}/{s.sequence_length} checked, "
                 f"{s.fixpoint_iterations} fixpoint stages")
    if s.unwind:
        lines.append(f"unwind: {s.unwind}")
    return "\n".join(lines) + "\n"


def render_cegar_text(result: CegarResult) -> str:
    lines = []
    for it in result.trace:
        line = f"[{it.iteration}] {render_path(it.counterexample)} -> {it.report.detector} {it.report.verdict.value}"
        if it.step is not None:
            line += f"; split {it.step.failure_state} into {len(it.step.new_classes)}"
        if it.note:
            line += f" ({it.note})"
        lines.append(line)
    lines.append(f"{result.outcome.value} after {result.iterations} iteration(s), {len(result.amap)} abstract states")
    if result.witness is not None:
        w = result.witness
        lines.append(f"witness: {render_concrete(w.path or w.stem, w.cycle)}")
    return "\n".join(lines) + "\n"


# Frames for the explorer


def classes_frame(amap: AbstractionMap) -> pd.DataFrame:
    model = amap.model
    return pd.DataFrame([
        {
            "abstract state": cls.id,
            "tag": cls.tag,
            "origins": ", ".join(model.ordered(cls.origins)),
            "size": len(cls.origins),
            "initial": bool(cls.origins & model.initial),
        }
        for cls in amap
    ])


def positions_frame(
    model: KripkeStructure,
    amap: AbstractionMap,
    ce: Counterexample,
    last_mode: LastMode = LastMode.UNCONSTRAINED,
) -> pd.DataFrame:
    view = cfp(ce)
    weights = position_weights(model, amap, view)
    rows = []
    for i, sid in enumerate(view.states):
        failed, io = is_failure_state(model, amap, view, i, last_mode)
        rows.append({
            "position": i,
            "abstract state": sid,
            "fiber": len(amap.h_inverse(sid)),
            "In": ", ".join(model.ordered(io.in_set)),
            "Out": ", ".join(model.ordered(io.out_set)),
            "EIn": weights[i].ein,
            "EOut": weights[i].eout,
            "weight": weights[i].weight,
            "failure": failed,
        })
    return pd.DataFrame(rows)


def trace_frame(result: CegarResult) -> pd.DataFrame:
    return pd.DataFrame([
        {
            "iteration": it.iteration,
            "counterexample": render_path(it.counterexample),
            "detector": it.report.detector,
            "verdict": it.report.verdict.value,
            "failure state": it.step.failure_state if it.step else None,
            "new classes": ", ".join(c.id for c in it.step.new_classes) if it.step else "",
            "note": it.note or "",
        }
        for it in result.trace
    ], columns=["iteration", "counterexample", "detector", "verdict", "failure state", "new classes", "note"])
