"""Failure-state detection on abstract counterexamples.

A position i of the CFP is a failure state when the origins of ŝi that can be
entered from the previous fiber (In) and those that can leave towards the next
fiber (Out) are disjoint. Each check looks only at the fibers of i, its
predecessor and its successor, which is what lets the parallel detector hand
positions to independent workers.
"""
from __future__ import annotations

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .abstraction import AbstractionMap
from .config import LastMode, ParallelMode, Verdict
from .counterexample import CFPView, Counterexample, cfp
from .errors import PartitionError
from .model import KripkeStructure

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class StageSet:
    """Least fixpoint of a one-step expansion inside one fiber.

    ``stages`` holds the states added at each step, so every stage is
    non-empty and their count is bounded by the fiber size.
    """

    states: frozenset[str]
    stages: tuple[frozenset[str], ...]


@dataclass(frozen=True)
class InOutSets:
    in_set: frozenset[str]
    out_set: frozenset[str]
    in_stages: tuple[frozenset[str], ...]
    out_stages: tuple[frozenset[str], ...]

    @property
    def is_failure(self) -> bool:
        return not (self.in_set & self.out_set)


@dataclass(frozen=True)
class Partition:
    dead: frozenset[str]
    bad: frozenset[str]
    isolated: frozenset[str]

    def __post_init__(self):
        if self.dead & self.bad or self.dead & self.isolated or self.bad & self.isolated:
            raise PartitionError("dead, bad and isolated sets overlap")

    def pieces(self) -> list[frozenset[str]]:
        return [p for p in (self.dead, self.bad, self.isolated) if p]


@dataclass(frozen=True)
class StateWeight:
    state: str
    ein: int
    eout: int

    @property
    def weight(self) -> int:
        return self.ein * self.eout


@dataclass
class DetectorStats:
    sequence_length: int = 0
    positions_checked: int = 0
    fixpoint_iterations: int = 0
    stage_counts: dict[int, tuple[int, int]] = field(default_factory=dict)
    fiber_sizes: dict[int, int] = field(default_factory=dict)
    position_status: list[bool | None] = field(default_factory=list)
    visit_order: list[int] = field(default_factory=list)
    unwind: int = 0
    image_sizes: list[int] = field(default_factory=list)
    unwound_failure_index: int | None = None
    elapsed: float = 0.0

    def record(self, i: int, io: InOutSets, fiber_size: int) -> None:
        self.positions_checked += 1
        self.stage_counts[i] = (len(io.in_stages), len(io.out_stages))
        self.fiber_sizes[i] = fiber_size
        self.fixpoint_iterations += len(io.in_stages) + len(io.out_stages)


@dataclass(frozen=True)
class SpuriousReport:
    verdict: Verdict
    detector: str
    counterexample: Counterexample
    failure_index: int | None = None
    failure_state: str | None = None
    in_out: InOutSets | None = None
    partition: Partition | None = None
    weights: tuple[StateWeight, ...] = ()
    stats: DetectorStats = field(default_factory=DetectorStats)

    def __post_init__(self):
        if (self.verdict is Verdict.SPURIOUS) != (self.failure_index is not None):
            raise ValueError("failure_index must be present exactly when the verdict is spurious")

    @property
    def spurious(self) -> bool:
        return self.verdict is Verdict.SPURIOUS


def _grow(seed: Iterable[str], step: Callable[[str], Iterable[str]], fiber: frozenset[str]) -> StageSet:
    reached = set(seed) & fiber
    frontier = frozenset(reached)
    stages = []
    while frontier:
        stages.append(frontier)
        nxt = set()
        for sid in frontier:
            nxt.update(t for t in step(sid) if t in fiber and t not in reached)
        reached |= nxt
        frontier = frozenset(nxt)
    return StageSet(frozenset(reached), tuple(stages))


def in_set(model: KripkeStructure, amap: AbstractionMap, view: CFPView, i: int) -> StageSet:
    _check_index(view, i)
    fiber = amap.h_inverse(view.states[i])
    if i == 0:
        seed = model.initial
    else:
        seed = model.image(amap.h_inverse(view.states[i - 1]))
    return _grow(seed, model.successors, fiber)


def out_set(
    model: KripkeStructure,
    amap: AbstractionMap,
    view: CFPView,
    i: int,
    last_mode: LastMode = LastMode.UNCONSTRAINED,
) -> StageSet:
    _check_index(view, i)
    fiber = amap.h_inverse(view.states[i])
    nxt = view.successor_index(i)
    if nxt is None:
        if last_mode is LastMode.UNCONSTRAINED:
            return StageSet(fiber, (fiber,))
        seed = fiber & model.deadlocks
    else:
        target = amap.h_inverse(view.states[nxt])
        seed = {s for s in fiber if any(t in target for t in model.successors(s))}
    return _grow(seed, model.predecessors, fiber)


def is_failure_state(
    model: KripkeStructure,
    amap: AbstractionMap,
    view: CFPView,
    i: int,
    last_mode: LastMode = LastMode.UNCONSTRAINED,
) -> tuple[bool, InOutSets]:
    ins = in_set(model, amap, view, i)
    outs = out_set(model, amap, view, i, last_mode)
    io = InOutSets(ins.states, outs.states, ins.stages, outs.stages)
    log.debug("position %d (%s): |In|=%d |Out|=%d failure=%s",
              i, view.states[i], len(io.in_set), len(io.out_set), io.is_failure)
    return io.is_failure, io


def partition_origins(
    model: KripkeStructure,
    amap: AbstractionMap,
    view: CFPView,
    i: int,
    last_mode: LastMode = LastMode.UNCONSTRAINED,
) -> Partition:
    failed, io = is_failure_state(model, amap, view, i, last_mode)
    if not failed:
        raise PartitionError(f"position {i} is not a failure state")
    return _partition(amap.h_inverse(view.states[i]), io)


def _partition(fiber: frozenset[str], io: InOutSets) -> Partition:
    return Partition(io.in_set, io.out_set, fiber - io.in_set - io.out_set)


def state_weight(model: KripkeStructure, amap: AbstractionMap, abstract_id: str) -> StateWeight:
    fiber = amap.h_inverse(abstract_id)
    ein = sum(1 for s in fiber for p in model.predecessors(s) if p not in fiber)
    eout = sum(1 for s in fiber for t in model.successors(s) if t not in fiber)
    return StateWeight(abstract_id, ein, eout)


def position_weights(model: KripkeStructure, amap: AbstractionMap, view: CFPView) -> tuple[StateWeight, ...]:
    cache: dict[str, StateWeight] = {}
    for sid in view.states:
        if sid not in cache:
            cache[sid] = state_weight(model, amap, sid)
    return tuple(cache[sid] for sid in view.states)


def heaviest_order(weights: tuple[StateWeight, ...]) -> list[int]:
    """The w[] array: heavier first, lower CFP index on ties."""
    return sorted(range(len(weights)), key=lambda i: (-weights[i].weight, i))


def _check_index(view: CFPView, i: int) -> None:
    if not 0 <= i < len(view):
        raise IndexError(f"position {i} outside CFP of length {len(view)}")


def _scan(model, amap, ce, last_mode, order, detector) -> SpuriousReport:
    started = time.perf_counter()
    view = cfp(ce)
    weights = position_weights(model, amap, view)
    stats = DetectorStats(sequence_length=len(view), position_status=[None] * len(view))
    for i in order:
        stats.visit_order.append(i)
        failed, io = is_failure_state(model, amap, view, i, last_mode)
        stats.record(i, io, len(amap.h_inverse(view.states[i])))
        stats.position_status[i] = not failed
        if failed:
            stats.elapsed = time.perf_counter() - started
            return SpuriousReport(
                Verdict.SPURIOUS, detector, ce, i, view.states[i], io,
                _partition(amap.h_inverse(view.states[i]), io), weights, stats,
            )
    stats.elapsed = time.perf_counter() - started
    return SpuriousReport(Verdict.REAL, detector, ce, weights=weights, stats=stats)


def check_spurious_first(
    model: KripkeStructure,
    amap: AbstractionMap,
    ce: Counterexample,
    last_mode: LastMode = LastMode.UNCONSTRAINED,
) -> SpuriousReport:
    return _scan(model, amap, ce, last_mode, range(len(ce)), "first")


def check_spurious_heaviest(
    model: KripkeStructure,
    amap: AbstractionMap,
    ce: Counterexample,
    last_mode: LastMode = LastMode.UNCONSTRAINED,
) -> SpuriousReport:
    # weights are cheap, so sort every position up front
    order = heaviest_order(position_weights(model, amap, cfp(ce)))
    return _scan(model, amap, ce, last_mode, order, "heaviest")


def check_spurious_parallel(
    model: KripkeStructure,
    amap: AbstractionMap,
    ce: Counterexample,
    last_mode: LastMode = LastMode.UNCONSTRAINED,
    mode: ParallelMode = ParallelMode.FIRST_DETECTED,
    workers: int = 4,
    barrier: bool = False,
) -> SpuriousReport:
    """Check every CFP position on a thread pool.

    In first_detected mode the first failure sets a cancellation flag and
    positions not yet started are skipped; a position already running
    finishes its fixpoints. The reported failure is the lowest index among
    those detected, which is the global minimum when ``workers == 1`` or
    ``barrier`` is set. In heaviest mode every position completes.
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    started = time.perf_counter()
    view = cfp(ce)
    weights = position_weights(model, amap, view)
    n = len(view)
    status: list[bool | None] = [None] * n
    results: dict[int, InOutSets] = {}
    cancel = threading.Event()
    cancellable = mode is ParallelMode.FIRST_DETECTED and not barrier

    def check(i: int) -> tuple[int, bool, InOutSets] | None:
        if cancel.is_set():
            return None
        failed, io = is_failure_state(model, amap, view, i, last_mode)
        # one writer per slot
        status[i] = not failed
        if failed and cancellable:
            cancel.set()
        return i, failed, io

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(check, i) for i in range(n)]
        for fut in as_completed(futures):
            if fut.cancelled():
                continue
            outcome = fut.result()
            if outcome is None:
                continue
            i, failed, io = outcome
            results[i] = io
            if failed and cancellable:
                for other in futures:
                    other.cancel()

    stats = DetectorStats(sequence_length=n, position_status=status)
    for i in sorted(results):
        stats.record(i, results[i], len(amap.h_inverse(view.states[i])))
    failures = [i for i in sorted(results) if status[i] is False]
    if mode is ParallelMode.HEAVIEST:
        stats.visit_order = heaviest_order(weights)
        ranked = [i for i in stats.visit_order if i in failures]
        chosen = ranked[0] if ranked else None
    else:
        stats.visit_order = sorted(results)
        chosen = failures[0] if failures else None
    stats.elapsed = time.perf_counter() - started
    detector = f"parallel-{mode.value}"
    if chosen is None:
        return SpuriousReport(Verdict.REAL, detector, ce, weights=weights, stats=stats)
    io = results[chosen]
    log.debug("parallel %s: failures at %s, reporting %d", mode.value, failures, chosen)
    return SpuriousReport(
        Verdict.SPURIOUS, detector, ce, chosen, view.states[chosen], io,
        _partition(amap.h_inverse(view.states[chosen]), io), weights, stats,
    )


def default_unwind(amap: AbstractionMap, ce: Counterexample) -> int:
    return len(ce) * amap.max_fiber_size()


def unwound_positions(ce: Counterexample, unwind: int) -> list[int]:
    """CFP positions of the sequence obtained by repeating the loop ``unwind`` times."""
    positions = list(range(len(ce)))
    if ce.is_lasso:
        positions += list(range(ce.loop_start, len(ce))) * unwind
    return positions


def split_path(
    model: KripkeStructure,
    amap: AbstractionMap,
    ce: Counterexample,
    unwind: int | None = None,
) -> SpuriousReport:
    """Forward images M_i = R(M_{i-1}) ∩ h⁻(ŝi); the first empty image breaks the path.

    For finite paths ``unwind`` is ignored. For lassos it is the number of
    extra loop traversals; the default |CFP| × max fiber size exceeds the
    size of the position/state product, so any spurious lasso is caught.
    """
    started = time.perf_counter()
    if ce.is_lasso:
        unwind = default_unwind(amap, ce) if unwind is None else unwind
        if unwind < 1:
            raise ValueError("unwind must be at least 1 for a lasso")
    else:
        unwind = 0
    positions = unwound_positions(ce, unwind)
    fibers = [amap.h_inverse(ce.states[p]) for p in positions]
    weights = position_weights(model, amap, cfp(ce))
    stats = DetectorStats(sequence_length=len(positions), unwind=unwind)

    images = [frozenset(model.initial & fibers[0])]
    while images[-1] and len(images) < len(positions):
        images.append(frozenset(model.image(images[-1]) & fibers[len(images)]))
    stats.image_sizes = [len(m) for m in images]
    stats.positions_checked = len(images)
    stats.elapsed = time.perf_counter() - started

    if images[-1]:
        return SpuriousReport(Verdict.REAL, "splitpath", ce, weights=weights, stats=stats)

    # M_k empty breaks at k-1; an empty M_0 breaks at 0
    broken_at = max(len(images) - 2, 0)
    stats.unwound_failure_index = broken_at
    index = positions[broken_at]
    fiber = fibers[broken_at]
    dead = images[broken_at] if len(images) > 1 else frozenset()
    if broken_at + 1 < len(positions):
        target = fibers[broken_at + 1]
        bad = frozenset(s for s in fiber - dead if any(t in target for t in model.successors(s)))
    else:
        bad = frozenset()
    partition = Partition(dead, bad, fiber - dead - bad)
    log.debug("splitpath: images %s, failure at unwound index %d (position %d)",
              stats.image_sizes, broken_at, index)
    return SpuriousReport(
        Verdict.SPURIOUS, "splitpath", ce, index, ce.states[index],
        partition=partition, weights=weights, stats=stats,
    )
