"""Explicit-state concrete models: parsing, rendering and queries.

Model file format (line based, ``#`` starts a comment)::

    var <name> : <val> <val> ...
    state <id> <name>=<val> ...
    init <id>
    trans <id> <id>
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping

from .errors import ModelError, ModelParseError, UnknownStateError

log = logging.getLogger(__name__)

IDENT = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.\-]*$")


@dataclass(frozen=True)
class VarDecl:
    name: str
    domain: tuple[str, ...]

    def __post_init__(self):
        if not self.domain:
            raise ModelError(f"variable {self.name!r} has an empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise ModelError(f"variable {self.name!r} repeats a domain value")


@dataclass(frozen=True)
class ConcreteState:
    id: str
    valuation: tuple[tuple[str, str], ...]

    def value(self, var: str) -> str:
        for name, val in self.valuation:
            if name == var:
                return val
        raise KeyError(var)

    def as_dict(self) -> dict[str, str]:
        return dict(self.valuation)


@dataclass(frozen=True)
class KripkeStructure:
    """Concrete model K = (S, I, R, L) with L(s) taken as the valuation of s.

    States keep their declaration order; ``initial`` and ``transitions`` are
    sets. Successor/predecessor indexes and the deadlock set F are derived at
    construction and never change afterwards.
    """

    vars: tuple[VarDecl, ...]
    states: tuple[ConcreteState, ...]
    initial: frozenset[str]
    transitions: frozenset[tuple[str, str]]
    _order: dict[str, int] = field(init=False, repr=False, compare=False)
    _succ: dict[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)
    _pred: dict[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)
    _by_id: dict[str, ConcreteState] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        names = [v.name for v in self.vars]
        if len(set(names)) != len(names):
            raise ModelError("duplicate variable name")
        domains = {v.name: set(v.domain) for v in self.vars}
        order: dict[str, int] = {}
        for s in self.states:
            if s.id in order:
                raise ModelError(f"duplicate state id {s.id!r}")
            order[s.id] = len(order)
            assigned = [name for name, _ in s.valuation]
            if sorted(assigned) != sorted(names):
                raise ModelError(f"state {s.id!r} must assign every declared variable exactly once")
            for name, val in s.valuation:
                if val not in domains[name]:
                    raise ModelError(f"state {s.id!r}: value {val!r} not in domain of {name!r}")
        if not self.initial:
            raise ModelError("model has no initial state")
        for sid in self.initial:
            if sid not in order:
                raise UnknownStateError(sid)
        succ: dict[str, list[str]] = {sid: [] for sid in order}
        pred: dict[str, list[str]] = {sid: [] for sid in order}
        for src, dst in self.transitions:
            if src not in order:
                raise UnknownStateError(src)
            if dst not in order:
                raise UnknownStateError(dst)
            succ[src].append(dst)
            pred[dst].append(src)
        object.__setattr__(self, "_order", order)
        object.__setattr__(self, "_succ", {k: tuple(sorted(v, key=order.__getitem__)) for k, v in succ.items()})
        object.__setattr__(self, "_pred", {k: tuple(sorted(v, key=order.__getitem__)) for k, v in pred.items()})
        object.__setattr__(self, "_by_id", {s.id: s for s in self.states})

    @property
    def state_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.states)

    @property
    def var_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.vars)

    @property
    def deadlocks(self) -> frozenset[str]:
        return frozenset(sid for sid, nxt in self._succ.items() if not nxt)

    def state(self, state_id: str) -> ConcreteState:
        try:
            return self._by_id[state_id]
        except KeyError:
            raise UnknownStateError(state_id) from None

    def index(self, state_id: str) -> int:
        try:
            return self._order[state_id]
        except KeyError:
            raise UnknownStateError(state_id) from None

    def var(self, name: str) -> VarDecl:
        for v in self.vars:
            if v.name == name:
                return v
        raise ModelError(f"undeclared variable {name!r}")

    def successors(self, state_id: str) -> tuple[str, ...]:
        try:
            return self._succ[state_id]
        except KeyError:
            raise UnknownStateError(state_id) from None

    def predecessors(self, state_id: str) -> tuple[str, ...]:
        try:
            return self._pred[state_id]
        except KeyError:
            raise UnknownStateError(state_id) from None

    def image(self, state_ids: Iterable[str]) -> set[str]:
        out: set[str] = set()
        for sid in state_ids:
            out.update(self.successors(sid))
        return out

    def ordered(self, state_ids: Iterable[str]) -> list[str]:
        """Declaration order, for rendering."""
        return sorted(state_ids, key=self.index)

    def with_transitions(self, transitions: Iterable[tuple[str, str]]) -> "KripkeStructure":
        return KripkeStructure(self.vars, self.states, self.initial, frozenset(transitions))


def successors(model: KripkeStructure, state_id: str) -> frozenset[str]:
    return frozenset(model.successors(state_id))


def predecessors(model: KripkeStructure, state_id: str) -> frozenset[str]:
    return frozenset(model.predecessors(state_id))


def build_model(
    vars: Mapping[str, Iterable[str]],
    states: Mapping[str, Mapping[str, str]],
    initial: Iterable[str],
    transitions: Iterable[tuple[str, str]],
) -> KripkeStructure:
    """Programmatic constructor; mapping order is declaration order."""
    decls = tuple(VarDecl(name, tuple(dom)) for name, dom in vars.items())
    names = [d.name for d in decls]
    built = []
    for sid, valuation in states.items():
        missing = [n for n in names if n not in valuation]
        if missing or len(valuation) != len(names):
            raise ModelError(f"state {sid!r} must assign every declared variable exactly once")
        built.append(ConcreteState(sid, tuple((n, valuation[n]) for n in names)))
    return KripkeStructure(decls, tuple(built), frozenset(initial), frozenset(transitions))


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _ident(token: str, what: str, lineno: int) -> str:
    if not IDENT.match(token):
        raise ModelParseError(f"malformed {what} {token!r}", lineno)
    return token


def parse_model(text: str) -> KripkeStructure:
    decls: dict[str, tuple[str, ...]] = {}
    states: dict[str, tuple[tuple[str, str], ...]] = {}
    init_refs: list[tuple[int, str]] = []
    trans_refs: list[tuple[int, str, str]] = []
    last_line = 0

    for lineno, tokens in _tokens(text):
        last_line = lineno
        head, rest = tokens[0], tokens[1:]
        if head == "var":
            if len(rest) < 3 or rest[1] != ":":
                raise ModelParseError("expected 'var <name> : <val> ...'", lineno)
            name = _ident(rest[0], "variable name", lineno)
            if name in decls:
                raise ModelParseError(f"duplicate variable {name!r}", lineno)
            if states:
                raise ModelParseError(f"variable {name!r} declared after the first state", lineno)
            values = tuple(_ident(v, "value", lineno) for v in rest[2:])
            if len(set(values)) != len(values):
                raise ModelParseError(f"duplicate value in domain of {name!r}", lineno)
            decls[name] = values
        elif head == "state":
            if not rest:
                raise ModelParseError("expected 'state <id> <name>=<val> ...'", lineno)
            sid = _ident(rest[0], "state id", lineno)
            if sid in states:
                raise ModelParseError(f"duplicate state id {sid!r}", lineno)
            valuation: dict[str, str] = {}
            for item in rest[1:]:
                name, eq, val = item.partition("=")
                if not eq:
                    raise ModelParseError(f"expected <name>=<val>, got {item!r}", lineno)
                if name not in decls:
                    raise ModelParseError(f"undeclared variable {name!r}", lineno)
                if val not in decls[name]:
                    raise ModelParseError(f"undeclared value {val!r} for variable {name!r}", lineno)
                if name in valuation:
                    raise ModelParseError(f"variable {name!r} assigned twice", lineno)
                valuation[name] = val
            missing = [n for n in decls if n not in valuation]
            if missing:
                raise ModelParseError(f"state {sid!r} does not assign {', '.join(missing)}", lineno)
            states[sid] = tuple((n, valuation[n]) for n in decls)
        elif head == "init":
            if len(rest) != 1:
                raise ModelParseError("expected 'init <id>'", lineno)
            init_refs.append((lineno, rest[0]))
        elif head == "trans":
            if len(rest) != 2:
                raise ModelParseError("expected 'trans <id> <id>'", lineno)
            trans_refs.append((lineno, rest[0], rest[1]))
        else:
            raise ModelParseError(f"unknown directive {head!r}", lineno)

    # states may be declared after the lines that mention them
    for lineno, sid in init_refs:
        if sid not in states:
            raise ModelParseError(f"unknown state id {sid!r}", lineno)
    for lineno, src, dst in trans_refs:
        for sid in (src, dst):
            if sid not in states:
                raise ModelParseError(f"unknown state id {sid!r}", lineno)
    if not init_refs:
        raise ModelParseError("missing init", last_line + 1)

    model = KripkeStructure(
        vars=tuple(VarDecl(n, dom) for n, dom in decls.items()),
        states=tuple(ConcreteState(sid, val) for sid, val in states.items()),
        initial=frozenset(sid for _, sid in init_refs),
        transitions=frozenset((src, dst) for _, src, dst in trans_refs),
    )
    log.debug("parsed model: %d states, %d transitions", len(model.states), len(model.transitions))
    return model


def render_model(model: KripkeStructure, header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    for v in model.vars:
        lines.append(f"var {v.name} : {' '.join(v.domain)}")
    for s in model.states:
        vals = " ".join(f"{n}={val}" for n, val in s.valuation)
        lines.append(f"state {s.id} {vals}".rstrip())
    for sid in model.ordered(model.initial):
        lines.append(f"init {sid}")
    for src, dst in sorted(model.transitions, key=lambda e: (model.index(e[0]), model.index(e[1]))):
        lines.append(f"trans {src} {dst}")
    return "\n".join(lines) + "\n"


def validate_model(model: KripkeStructure) -> None:
    """Re-check every structural invariant, raising ModelError on the first breach."""
    rebuilt = KripkeStructure(model.vars, model.states, model.initial, model.transitions)
    expected_f = frozenset(s.id for s in model.states if not any(src == s.id for src, _ in model.transitions))
    if rebuilt.deadlocks != expected_f or model.deadlocks != expected_f:
        raise ModelError("deadlock set is inconsistent with the transition relation")
    if not model.initial <= set(model.state_ids):
        raise ModelError("initial states are not a subset of the states")


def load_model(path) -> KripkeStructure:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def sample_text(name: str) -> str:
    """Text of a bundled sample model (``tl`` or ``f12``)."""
    return resources.files("cegarkit.samples").joinpath(f"{name}.model").read_text(encoding="utf-8")


def load_sample(name: str) -> KripkeStructure:
    return parse_model(sample_text(name))
