"""Exact concretization of abstract counterexamples.

Works on the product of the concrete model with the counterexample's
position automaton: a node is (position, concrete state in that position's
fiber) and edges follow concrete transitions that land in the next fiber.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .abstraction import AbstractionMap
from .checker import Property, PropertyKind, holds_concretely
from .config import Verdict
from .counterexample import Counterexample, cfp
from .model import KripkeStructure
from .spurious import DetectorStats, SpuriousReport, position_weights, split_path

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class ProductNode:
    position: int
    state: str


@dataclass(frozen=True)
class Concretization:
    real: bool
    path: tuple[str, ...] = ()
    stem: tuple[str, ...] = ()
    cycle: tuple[str, ...] = ()
    layer_sizes: tuple[int, ...] = ()
    product_size: int = 0

    @property
    def verdict(self) -> Verdict:
        return Verdict.REAL if self.real else Verdict.SPURIOUS


def _fibers(amap: AbstractionMap, ce: Counterexample) -> list[frozenset[str]]:
    return [amap.h_inverse(sid) for sid in ce.states]


def concretize_finite(model: KripkeStructure, amap: AbstractionMap, ce: Counterexample) -> Concretization:
    if ce.is_lasso:
        raise ValueError("concretize_finite needs a finite counterexample")
    fibers = _fibers(amap, ce)
    layers = [frozenset(model.initial & fibers[0])]
    for fiber in fibers[1:]:
        if not layers[-1]:
            break
        layers.append(frozenset(model.image(layers[-1]) & fiber))
    sizes = tuple(len(layer) for layer in layers)
    if len(layers) < len(fibers) or not layers[-1]:
        return Concretization(False, layer_sizes=sizes, product_size=sum(sizes))

    # keep only nodes that still reach the last layer, then walk forward
    # picking the least state id at every layer
    live = [frozenset()] * len(layers)
    live[-1] = layers[-1]
    for i in range(len(layers) - 2, -1, -1):
        live[i] = frozenset(s for s in layers[i] if any(t in live[i + 1] for t in model.successors(s)))
    path = [min(live[0])]
    for i in range(1, len(layers)):
        path.append(min(t for t in model.successors(path[-1]) if t in live[i]))
    return Concretization(True, path=tuple(path), layer_sizes=sizes, product_size=sum(sizes))


def _product_successors(model, fibers, ce, node: ProductNode) -> list[ProductNode]:
    nxt = node.position + 1 if node.position + 1 < len(ce) else ce.loop_start
    return sorted(ProductNode(nxt, t) for t in model.successors(node.state) if t in fibers[nxt])


def _bfs_path(start: list[ProductNode], goal: ProductNode, step) -> list[ProductNode]:
    parent: dict[ProductNode, ProductNode | None] = {s: None for s in start}
    queue = deque(start)
    while queue:
        node = queue.popleft()
        if node == goal:
            path = []
            while node is not None:
                path.append(node)
                node = parent[node]
            return path[::-1]
        for nxt in step(node):
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    raise LookupError(f"{goal} unreachable")


def concretize_lasso(model: KripkeStructure, amap: AbstractionMap, ce: Counterexample) -> Concretization:
    if not ce.is_lasso:
        raise ValueError("concretize_lasso needs a lasso counterexample")
    fibers = _fibers(amap, ce)

    def step(node: ProductNode) -> list[ProductNode]:
        return _product_successors(model, fibers, ce, node)

    starts = sorted(ProductNode(0, s) for s in model.initial & fibers[0])
    index: dict[ProductNode, int] = {}
    rows: list[int] = []
    cols: list[int] = []
    queue = deque(starts)
    for s in starts:
        index[s] = len(index)
    while queue:
        node = queue.popleft()
        for nxt in step(node):
            if nxt not in index:
                index[nxt] = len(index)
                queue.append(nxt)
            rows.append(index[node])
            cols.append(index[nxt])

    size = len(index)
    if size == 0:
        return Concretization(False)
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
    _, labels = connected_components(graph, directed=True, connection="strong")
    members = np.bincount(labels)
    self_loops = {r for r, c in zip(rows, cols) if r == c}
    nodes = sorted(index, key=index.__getitem__)
    cyclic = [n for n in nodes if members[labels[index[n]]] > 1 or index[n] in self_loops]
    log.debug("lasso product: %d reachable nodes, %d on cycles", size, len(cyclic))
    if not cyclic:
        return Concretization(False, product_size=size)

    # every product cycle crosses the loop-back edge, so it visits loop_start
    seed = min(n for n in cyclic if n.position == ce.loop_start)
    stem = _bfs_path(starts, seed, step)
    component = labels[index[seed]]

    def inside(node: ProductNode) -> list[ProductNode]:
        return [m for m in step(node) if labels[index[m]] == component]

    if index[seed] in self_loops:
        cycle = [seed]
    else:
        first_hops = inside(seed)
        cycle = [seed] + _bfs_path(first_hops, seed, inside)[:-1]
    return Concretization(
        True,
        stem=tuple(n.state for n in stem[:-1]),
        cycle=tuple(n.state for n in cycle),
        product_size=size,
    )


def concretize(model: KripkeStructure, amap: AbstractionMap, ce: Counterexample) -> Concretization:
    if ce.is_lasso:
        return concretize_lasso(model, amap, ce)
    return concretize_finite(model, amap, ce)


def violates_concretely(model: KripkeStructure, prop: Property, conc: Concretization) -> bool:
    if prop.kind is PropertyKind.INVARIANT:
        return bool(conc.path) and not holds_concretely(prop, model.state(conc.path[-1]).as_dict())
    return bool(conc.cycle) and not any(holds_concretely(prop, model.state(s).as_dict()) for s in conc.cycle)


def check_witness(
    model: KripkeStructure,
    amap: AbstractionMap,
    ce: Counterexample,
    conc: Concretization,
    prop: Property | None = None,
) -> bool:
    """True when the witness is a concrete path/lasso projecting onto ``ce``.

    With ``prop`` the witness must also violate it on concrete labels: the
    last state of a finite path breaks the invariant, every cycle state of a
    lasso breaks the recurrence formula.
    """
    if not conc.real:
        return False
    if prop is not None and not violates_concretely(model, prop, conc):
        return False
    if not ce.is_lasso:
        if len(conc.path) != len(ce) or conc.path[0] not in model.initial:
            return False
        steps_ok = all(b in model.successors(a) for a, b in zip(conc.path, conc.path[1:]))
        return steps_ok and all(amap.h(s) == a for s, a in zip(conc.path, ce.states))
    run = [*conc.stem, *conc.cycle]
    if not conc.cycle or run[0] not in model.initial:
        return False
    if not all(b in model.successors(a) for a, b in zip(run, run[1:])):
        return False
    if conc.cycle[0] not in model.successors(conc.cycle[-1]):
        return False
    # compare the ultimately periodic words position by position
    loop_len = len(ce) - ce.loop_start
    horizon = len(run) + len(ce) + len(conc.cycle) * loop_len

    def abstract_at(k: int) -> str:
        return ce.states[k] if k < len(ce) else ce.states[ce.loop_start + (k - len(ce)) % loop_len]

    def concrete_at(k: int) -> str:
        if k < len(conc.stem):
            return conc.stem[k]
        return conc.cycle[(k - len(conc.stem)) % len(conc.cycle)]

    return all(amap.h(concrete_at(k)) == abstract_at(k) for k in range(horizon))


def explain_spurious(model: KripkeStructure, amap: AbstractionMap, ce: Counterexample) -> SpuriousReport:
    """Oracle verdict as a report, with a refinable failure position when spurious.

    The failure position is where the exact forward images first run empty.
    For a lasso that is SplitPath with its default unwind, which always
    empties when the product has no reachable cycle.
    """
    conc = concretize(model, amap, ce)
    view = cfp(ce)
    if conc.real:
        stats = DetectorStats(sequence_length=len(ce), positions_checked=len(ce))
        return SpuriousReport(Verdict.REAL, "oracle", ce, weights=position_weights(model, amap, view), stats=stats)
    broken = split_path(model, amap, ce)
    return SpuriousReport(
        Verdict.SPURIOUS, "oracle", ce, broken.failure_index, broken.failure_state,
        partition=broken.partition, weights=broken.weights, stats=broken.stats,
    )
