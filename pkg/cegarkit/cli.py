"""Command-line frontend: ``python -m cegarkit <command> ...``."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from . import __version__
from .abstraction import build_abstract_model, make_abstraction, render_abstract_model
from .bench import bench_compare, random_cases
from .checker import Property, check_formula_scope, check_property
from .config import AnalysisOptions, Detector, LastMode
from .counterexample import parse_path_file, render_path, validate_counterexample
from .errors import CegarKitError
from .generator import GenParams, gen_random_model
from .model import load_model, load_sample, validate_model
from .oracle import concretize
from .refine import Outcome, cegar, refine, run_detector
from .report import (
    cegar_to_dict,
    concretization_to_dict,
    counterexample_to_dict,
    dumps,
    render_cegar_text,
    render_report_text,
    report_to_dict,
    step_to_dict,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_REAL = 10
EXIT_BUDGET = 20


def _model(spec: str):
    if spec.startswith("sample:"):
        return load_sample(spec.split(":", 1)[1])
    return load_model(spec)


def _names(text: str | None) -> list[str]:
    return [t.strip() for t in (text or "").split(",") if t.strip()]


def _options(args) -> AnalysisOptions:
    return AnalysisOptions(
        detector=Detector(args.detector),
        last_mode=LastMode.PAPER_STRICT if args.strict_last_state else LastMode.UNCONSTRAINED,
        workers=args.workers,
        barrier=args.barrier,
        unwind=args.unwind,
        max_iterations=getattr(args, "max_iter", 50),
    )


def _emit(text: str) -> None:
    sys.stdout.write(text)


def cmd_parse(args) -> int:
    model = _model(args.model)
    validate_model(model)
    doc = {
        "vars": {v.name: list(v.domain) for v in model.vars},
        "states": len(model.states),
        "transitions": len(model.transitions),
        "initial": model.ordered(model.initial),
        "deadlocks": model.ordered(model.deadlocks),
    }
    if args.json:
        _emit(dumps(doc))
    else:
        _emit(f"{doc['states']} states, {doc['transitions']} transitions, "
              f"{len(doc['initial'])} initial, {len(doc['deadlocks'])} deadlocks\n")
    return EXIT_OK


def cmd_abstract(args) -> int:
    model = _model(args.model)
    amap = make_abstraction(model, _names(args.invisible))
    abstract = build_abstract_model(model, amap)
    if args.dump_abstract:
        _emit(render_abstract_model(abstract))
    elif args.json:
        _emit(dumps({
            "classes": [{"id": c.id, "origins": model.ordered(c.origins)} for c in amap],
            "initial": [a for a in amap.ids if a in abstract.initial],
            "transitions": sorted([a, b] for a, b in abstract.transitions),
        }))
    else:
        for cls in amap:
            _emit(f"{cls.id}: {' '.join(model.ordered(cls.origins))}\n")
    return EXIT_OK


def cmd_modelcheck(args) -> int:
    model = _model(args.model)
    amap = make_abstraction(model, _names(args.invisible))
    abstract = build_abstract_model(model, amap)
    prop = Property.parse(args.prop)
    check_formula_scope(abstract, prop.formula)
    ce = check_property(abstract, prop)
    if args.json:
        _emit(dumps({"property": str(prop), "holds": ce is None,
                     "counterexample": counterexample_to_dict(ce) if ce else None}))
    else:
        _emit(f"{prop}: holds\n" if ce is None else f"{render_path(ce)}\n")
    return EXIT_OK


def _counterexamples(args, model, amap):
    abstract = build_abstract_model(model, amap)
    if args.path:
        with open(args.path, encoding="utf-8") as fh:
            paths = parse_path_file(fh.read())
    elif args.prop:
        prop = Property.parse(args.prop)
        check_formula_scope(abstract, prop.formula)
        ce = check_property(abstract, prop)
        paths = [ce] if ce else []
    else:
        raise CegarKitError("give a counterexample with --path or a property with --prop")
    for ce in paths:
        validate_counterexample(abstract, ce)
    return paths


def cmd_analyze(args) -> int:
    model = _model(args.model)
    amap = make_abstraction(model, _names(args.invisible))
    options = _options(args)
    entries = []
    for ce in _counterexamples(args, model, amap):
        report = run_detector(model, amap, ce, options)
        conc = concretize(model, amap, ce)
        entries.append((report, conc))
    if args.json:
        _emit(dumps({"reports": [
            {**report_to_dict(r, model, args.timing), "oracle": concretization_to_dict(c)} for r, c in entries
        ]}))
    else:
        for report, conc in entries:
            _emit(render_report_text(report))
            _emit(f"oracle: {conc.verdict.value}\n")
    return EXIT_OK


def cmd_refine(args) -> int:
    model = _model(args.model)
    amap = make_abstraction(model, _names(args.invisible))
    paths = _counterexamples(args, model, amap)
    if not paths:
        raise CegarKitError("no counterexample to refine")
    report = run_detector(model, amap, paths[0], _options(args))
    if not report.spurious:
        raise CegarKitError(f"{render_path(paths[0])} is not spurious for the {report.detector} detector")
    step = refine(amap, report.failure_state, report.partition)
    if args.json:
        _emit(dumps({"report": report_to_dict(report, model, args.timing), "refinement": step_to_dict(step, model)}))
    elif args.dump_abstract:
        _emit(render_abstract_model(build_abstract_model(model, step.amap)))
    else:
        _emit(render_report_text(report))
        for cls in step.new_classes:
            _emit(f"{cls.id}: {' '.join(model.ordered(cls.origins))}\n")
    return EXIT_OK


def cmd_cegar(args) -> int:
    model = _model(args.model)
    result = cegar(model, _names(args.invisible), Property.parse(args.prop), _options(args))
    if args.json:
        _emit(dumps(cegar_to_dict(result, model, args.timing)))
    else:
        _emit(render_cegar_text(result))
    return {
        Outcome.VERIFIED: EXIT_OK,
        Outcome.REAL_COUNTEREXAMPLE: EXIT_REAL,
        Outcome.BUDGET_EXHAUSTED: EXIT_BUDGET,
    }[result.outcome]


def cmd_gen(args) -> int:
    params = GenParams(args.states, args.vars, args.domain, args.density, args.invisible_fraction, args.seed)
    text = gen_random_model(params)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        _emit(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    cases = random_cases(
        range(args.seed, args.seed + args.models),
        num_states=args.states, num_vars=args.vars, domain_size=args.domain,
        edge_density=args.density, invisible_fraction=args.invisible_fraction,
    )
    report = bench_compare(
        cases,
        detectors=[Detector(d) for d in _names(args.detectors)],
        trials=args.trials,
        kind=args.kind,
        last_mode=LastMode.PAPER_STRICT if args.strict_last_state else LastMode.UNCONSTRAINED,
        workers=args.workers,
        timing=args.timing,
        jobs=args.jobs,
    )
    if args.csv:
        report.to_csv(args.csv)
    if args.xlsx:
        report.to_xlsx(args.xlsx)
    if args.json or not (args.csv or args.xlsx):
        _emit(report.to_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (gen, bench)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--timing", action="store_true", help="include wall times in JSON output")
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("--quiet", action="store_true", help="only log errors")
    noise.add_argument("--verbose", action="store_true", help="log debug detail")

    analysis = argparse.ArgumentParser(add_help=False)
    analysis.add_argument("--detector", choices=[d.value for d in Detector], default=Detector.FIRST.value)
    analysis.add_argument("--workers", type=int, default=1, help="threads for the first/heaviest detectors")
    analysis.add_argument("--barrier", action="store_true",
                          help="let every parallel check finish so the lowest failure index is reported")
    analysis.add_argument("--unwind", type=int, default=None, help="loop unwindings for splitpath on lassos")
    analysis.add_argument("--strict-last-state", action="store_true",
                          help="seed Out at the last finite position with deadlock states only")

    parser = argparse.ArgumentParser(prog="cegarkit", description="Spurious counterexample detection and CEGAR")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def model_command(name, help, *parents):
        p = sub.add_parser(name, help=help, parents=[common, *parents])
        p.add_argument("model", help="model file, or sample:tl / sample:f12")
        return p

    p = model_command("parse", "parse and validate a model")
    p.set_defaults(func=cmd_parse)

    p = model_command("abstract", "show the abstraction for an invisible set")
    p.add_argument("--invisible", default="")
    p.add_argument("--dump-abstract", action="store_true", help="print the abstract model in model-file format")
    p.set_defaults(func=cmd_abstract)

    p = model_command("modelcheck", "check AG/GF on the abstract model")
    p.add_argument("--invisible", default="")
    p.add_argument("--prop", required=True)
    p.set_defaults(func=cmd_modelcheck)

    for name, func, help in (
        ("analyze", cmd_analyze, "decide whether counterexamples are spurious"),
        ("refine", cmd_refine, "split the failure state of a spurious counterexample"),
    ):
        p = model_command(name, help, analysis)
        p.add_argument("--invisible", default="")
        p.add_argument("--path", help="path file with finite:/lasso: lines")
        p.add_argument("--prop", help="take the checker's counterexample for this property instead")
        if name == "refine":
            p.add_argument("--dump-abstract", action="store_true")
        p.set_defaults(func=func)

    p = model_command("cegar", "run the abstraction-refinement loop", analysis)
    p.add_argument("--invisible", default="")
    p.add_argument("--prop", required=True)
    p.add_argument("--max-iter", type=int, default=50)
    p.set_defaults(func=cmd_cegar)

    generation = argparse.ArgumentParser(add_help=False)
    generation.add_argument("--states", type=int, default=20)
    generation.add_argument("--vars", type=int, default=3)
    generation.add_argument("--domain", type=int, default=3)
    generation.add_argument("--density", type=float, default=0.1)
    generation.add_argument("--invisible-fraction", type=float, default=0.5)

    p = sub.add_parser("gen", help="emit a seeded random model", parents=[common, generation])
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="compare detectors against the oracle", parents=[common, generation])
    p.add_argument("--models", type=int, default=20)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--kind", choices=["finite", "lasso"], default="finite")
    p.add_argument("--detectors", default="first,heaviest,splitpath")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--strict-last-state", action="store_true")
    p.add_argument("--jobs", type=int, default=1, help="rows run concurrently")
    p.add_argument("--csv")
    p.add_argument("--xlsx")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.ERROR if args.quiet else logging.DEBUG if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (CegarKitError, OSError, ValueError) as exc:
        log.debug("%s failed", args.command, exc_info=True)
        sys.stderr.write(f"cegarkit: error: {exc}\n")
        return EXIT_INPUT
