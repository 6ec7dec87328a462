"""Invisible-variable abstraction and the existential abstract model."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import AbstractionError
from .model import KripkeStructure, VarDecl, ConcreteState, render_model

log = logging.getLogger(__name__)


def _signature_text(signature: tuple[tuple[str, str], ...]) -> str:
    return ",".join(f"{n}={v}" for n, v in signature) or "*"


@dataclass(frozen=True)
class AbstractClass:
    """One abstract state: a visible-valuation signature and its origins.

    ``tag`` is 0 for a class built straight from the signature; refinement
    hands out 1, 2, ... to the pieces of a split class.
    """

    signature: tuple[tuple[str, str], ...]
    tag: int
    origins: frozenset[str]

    @property
    def id(self) -> str:
        text = _signature_text(self.signature)
        return f"{text}~{self.tag}" if self.tag else text

    @property
    def label(self) -> dict[str, str]:
        return dict(self.signature)


@dataclass(frozen=True)
class AbstractionMap:
    """The function h and its inverse, possibly with split classes."""

    model: KripkeStructure
    invisible: frozenset[str]
    classes: tuple[AbstractClass, ...]
    _by_id: dict[str, AbstractClass] = field(init=False, repr=False, compare=False)
    _owner: dict[str, str] = field(init=False, repr=False, compare=False)
    _rank: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_id: dict[str, AbstractClass] = {}
        owner: dict[str, str] = {}
        for cls in self.classes:
            if not cls.origins:
                raise AbstractionError(f"abstract state {cls.id!r} has no origins")
            if cls.id in by_id:
                raise AbstractionError(f"duplicate abstract state {cls.id!r}")
            by_id[cls.id] = cls
            for sid in cls.origins:
                if sid in owner:
                    raise AbstractionError(f"state {sid!r} belongs to two abstract states")
                owner[sid] = cls.id
        if set(owner) != set(self.model.state_ids):
            raise AbstractionError("abstract states do not cover the concrete states")
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_owner", owner)
        object.__setattr__(self, "_rank", {cls.id: i for i, cls in enumerate(self.classes)})

    @property
    def visible(self) -> tuple[str, ...]:
        return tuple(n for n in self.model.var_names if n not in self.invisible)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(cls.id for cls in self.classes)

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self) -> Iterator[AbstractClass]:
        return iter(self.classes)

    def __contains__(self, abstract_id: object) -> bool:
        return abstract_id in self._by_id

    def get(self, abstract_id: str) -> AbstractClass:
        try:
            return self._by_id[abstract_id]
        except KeyError:
            raise AbstractionError(f"unknown abstract state {abstract_id!r}") from None

    def h(self, state_id: str) -> str:
        self.model.state(state_id)
        return self._owner[state_id]

    def h_inverse(self, abstract_id: str) -> frozenset[str]:
        return self.get(abstract_id).origins

    def rank(self, abstract_id: str) -> int:
        return self._rank[abstract_id]

    def max_fiber_size(self) -> int:
        return max(len(cls.origins) for cls in self.classes)

    def replace(self, abstract_id: str, pieces: Iterable[frozenset[str]]) -> "AbstractionMap":
        """Swap one class for the given pieces, keeping its slot in the order."""
        old = self.get(abstract_id)
        taken = max(c.tag for c in self.classes if c.signature == old.signature)
        new = [AbstractClass(old.signature, taken + k, piece) for k, piece in enumerate(pieces, start=1)]
        classes: list[AbstractClass] = []
        for cls in self.classes:
            classes.extend(new if cls.id == abstract_id else [cls])
        return AbstractionMap(self.model, self.invisible, tuple(classes))


def signature_of(state: ConcreteState, invisible: frozenset[str]) -> tuple[tuple[str, str], ...]:
    return tuple((n, v) for n, v in state.valuation if n not in invisible)


def make_abstraction(model: KripkeStructure, invisible: Iterable[str]) -> AbstractionMap:
    hidden = frozenset(invisible)
    unknown = sorted(hidden - set(model.var_names))
    if unknown:
        raise AbstractionError(f"unknown variable name(s): {', '.join(unknown)}")
    fibers: dict[tuple[tuple[str, str], ...], list[str]] = {}
    for state in model.states:
        fibers.setdefault(signature_of(state, hidden), []).append(state.id)
    classes = tuple(AbstractClass(sig, 0, frozenset(ids)) for sig, ids in fibers.items())
    log.debug("abstraction hiding %s: %d classes", sorted(hidden), len(classes))
    return AbstractionMap(model, hidden, classes)


def h_inverse(abstract_id: str, amap: AbstractionMap) -> frozenset[str]:
    return amap.h_inverse(abstract_id)


@dataclass(frozen=True)
class AbstractModel:
    """Existential abstraction of ``amap.model`` under ``amap``."""

    amap: AbstractionMap
    initial: frozenset[str]
    transitions: frozenset[tuple[str, str]]
    _succ: dict[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        succ: dict[str, list[str]] = {sid: [] for sid in self.amap.ids}
        for src, dst in self.transitions:
            succ[src].append(dst)
        object.__setattr__(self, "_succ", {k: tuple(sorted(v, key=self.amap.rank)) for k, v in succ.items()})

    @property
    def model(self) -> KripkeStructure:
        return self.amap.model

    @property
    def states(self) -> tuple[str, ...]:
        return self.amap.ids

    def ordered_initial(self) -> list[str]:
        return sorted(self.initial, key=self.amap.rank)

    def successors(self, abstract_id: str) -> tuple[str, ...]:
        self.amap.get(abstract_id)
        return self._succ[abstract_id]

    def has_edge(self, src: str, dst: str) -> bool:
        return (src, dst) in self.transitions

    def label(self, abstract_id: str) -> dict[str, str]:
        return self.amap.get(abstract_id).label


def build_abstract_model(model: KripkeStructure, amap: AbstractionMap) -> AbstractModel:
    if amap.model is not model and amap.model != model:
        raise AbstractionError("abstraction map was built for a different model")
    initial = frozenset(amap.h(sid) for sid in model.initial)
    # every concrete edge induces its abstract edge
    transitions = frozenset((amap.h(src), amap.h(dst)) for src, dst in model.transitions)
    log.debug("abstract model: %d states, %d transitions", len(amap), len(transitions))
    return AbstractModel(amap, initial, transitions)


def render_abstract_model(abstract: AbstractModel) -> str:
    """Dump in the model-file format with synthesized ids A0, A1, ...

    Only visible variables are declared; their domains are those of the
    concrete model.
    """
    amap = abstract.amap
    names = {aid: f"A{i}" for i, aid in enumerate(amap.ids)}
    decls = tuple(amap.model.var(v) for v in amap.visible)
    states = tuple(ConcreteState(names[cls.id], cls.signature) for cls in amap)
    dumped = KripkeStructure(
        vars=tuple(VarDecl(d.name, d.domain) for d in decls),
        states=states,
        initial=frozenset(names[a] for a in abstract.initial),
        transitions=frozenset((names[a], names[b]) for a, b in abstract.transitions),
    )
    header = [f"{names[cls.id]} = {cls.id} ({len(cls.origins)} origins)" for cls in amap]
    return render_model(dumped, header=["abstract model", *header])
