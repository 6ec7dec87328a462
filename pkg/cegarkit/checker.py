"""A small explicit-state checker for ``AG φ`` and ``GF φ`` over an abstract model.

φ is a boolean formula over ``var=val`` atoms with ``!``/``not``,
``&``/``and``, ``|``/``or`` and parentheses.
"""
from __future__ import annotations

import enum
import logging
import re
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Union

from .abstraction import AbstractModel
from .counterexample import Counterexample, normalize_lasso
from .errors import PropertyError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Atom:
    var: str
    value: str

    def holds(self, valuation: Mapping[str, str]) -> bool:
        return valuation[self.var] == self.value

    def __str__(self) -> str:
        return f"{self.var}={self.value}"


@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def holds(self, valuation: Mapping[str, str]) -> bool:
        return not self.arg.holds(valuation)

    def __str__(self) -> str:
        return f"!({self.arg})"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def holds(self, valuation: Mapping[str, str]) -> bool:
        return self.left.holds(valuation) and self.right.holds(valuation)

    def __str__(self) -> str:
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def holds(self, valuation: Mapping[str, str]) -> bool:
        return self.left.holds(valuation) or self.right.holds(valuation)

    def __str__(self) -> str:
        return f"({self.left} | {self.right})"


Formula = Union[Atom, Not, And, Or]


def _atoms(formula: Formula) -> list[Atom]:
    if isinstance(formula, Atom):
        return [formula]
    if isinstance(formula, Not):
        return _atoms(formula.arg)
    return _atoms(formula.left) + _atoms(formula.right)


def variables(formula: Formula) -> set[str]:
    return {a.var for a in _atoms(formula)}


_TOKEN = re.compile(r"\s*(?:(?P<op>[()!&|=])|(?P<word>[A-Za-z0-9_][A-Za-z0-9_.\-]*))")
_KEYWORDS = {"not": "!", "and": "&", "or": "|"}


def _tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise PropertyError(f"unexpected character {text[pos:].strip()[:1]!r} in {text!r}")
        tok = m.group("op") or m.group("word")
        tokens.append(_KEYWORDS.get(tok, tok))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise PropertyError(f"expected {expected or 'a token'} in {self.text!r}")
        self.pos += 1
        return tok

    def parse(self) -> Formula:
        formula = self.disjunction()
        if self.peek() is not None:
            raise PropertyError(f"trailing input {self.peek()!r} in {self.text!r}")
        return formula

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "(":
            self.take()
            inner = self.disjunction()
            self.take(")")
            return inner
        var = self.take()
        if var in "()!&|=":
            raise PropertyError(f"expected an atom, got {var!r} in {self.text!r}")
        self.take("=")
        value = self.take()
        return Atom(var, value)


def parse_formula(text: str) -> Formula:
    return _Parser(text).parse()


class PropertyKind(str, enum.Enum):
    INVARIANT = "AG"
    RECURRENCE = "GF"


@dataclass(frozen=True)
class Property:
    kind: PropertyKind
    formula: Formula

    @classmethod
    def parse(cls, text: str) -> "Property":
        m = re.match(r"^\s*(AG|GF)\b\s*(.*)$", text, re.S)
        if not m:
            raise PropertyError(f"property must start with AG or GF: {text!r}")
        if not m.group(2).strip():
            raise PropertyError(f"property {text!r} has no formula")
        return cls(PropertyKind(m.group(1)), parse_formula(m.group(2)))

    @property
    def variables(self) -> set[str]:
        return variables(self.formula)

    def __str__(self) -> str:
        return f"{self.kind.value} {self.formula}"


def check_formula_scope(abstract: AbstractModel, formula: Formula) -> None:
    declared = set(abstract.model.var_names)
    visible = set(abstract.amap.visible)
    for var in sorted(variables(formula)):
        if var not in declared:
            raise PropertyError(f"formula references unknown variable {var!r}")
        if var not in visible:
            raise PropertyError(f"formula references invisible variable {var!r}")
    for atom in _atoms(formula):
        if atom.value not in abstract.model.var(atom.var).domain:
            raise PropertyError(f"value {atom.value!r} is not in the domain of {atom.var!r}")


def eval_prop(abstract: AbstractModel, abstract_id: str, formula: Formula) -> bool:
    check_formula_scope(abstract, formula)
    return formula.holds(abstract.label(abstract_id))


def _satisfying(abstract: AbstractModel, formula: Formula) -> dict[str, bool]:
    check_formula_scope(abstract, formula)
    return {aid: formula.holds(abstract.label(aid)) for aid in abstract.states}


def find_invariant_counterexample(abstract: AbstractModel, formula: Formula) -> Counterexample | None:
    """Shortest path from an initial state to a ¬φ state, or None when AG φ holds."""
    good = _satisfying(abstract, formula)
    parent: dict[str, str | None] = {}
    queue: deque[str] = deque()
    for init in abstract.ordered_initial():
        parent[init] = None
        queue.append(init)
    while queue:
        node = queue.popleft()
        if not good[node]:
            path = []
            walk: str | None = node
            while walk is not None:
                path.append(walk)
                walk = parent[walk]
            ce = Counterexample.finite(path[::-1])
            log.debug("invariant violated: %s", ce)
            return ce
        for nxt in abstract.successors(node):
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    return None


def find_recurrence_counterexample(abstract: AbstractModel, formula: Formula) -> Counterexample | None:
    """A reachable lasso whose loop avoids φ, or None when GF φ holds.

    Nested depth-first search on the product with the two-state automaton
    for FG ¬φ: phase 0 waits, phase 1 has committed to ¬φ forever and is
    accepting. The inner search starts from each accepting node in outer
    postorder and shares its visited set across seeds.
    """
    good = _satisfying(abstract, formula)

    def post(node: tuple[str, int]) -> list[tuple[str, int]]:
        sid, phase = node
        out = []
        for t in abstract.successors(sid):
            if phase == 0:
                out.append((t, 0))
            if not good[t]:
                out.append((t, 1))
        return out

    starts = []
    for init in abstract.ordered_initial():
        starts.append((init, 0))
        if not good[init]:
            starts.append((init, 1))

    outer_seen: set[tuple[str, int]] = set()
    inner_seen: set[tuple[str, int]] = set()

    def inner(seed: tuple[str, int]) -> list[tuple[str, int]] | None:
        stack = [(seed, iter(post(seed)))]
        while stack:
            node, succs = stack[-1]
            advanced = False
            for nxt in succs:
                if nxt == seed:
                    return [n for n, _ in stack]
                if nxt not in inner_seen:
                    inner_seen.add(nxt)
                    stack.append((nxt, iter(post(nxt))))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
        return None

    for start in starts:
        if start in outer_seen:
            continue
        outer_seen.add(start)
        stack = [(start, iter(post(start)))]
        while stack:
            node, succs = stack[-1]
            advanced = False
            for nxt in succs:
                if nxt not in outer_seen:
                    outer_seen.add(nxt)
                    stack.append((nxt, iter(post(nxt))))
                    advanced = True
                    break
            if advanced:
                continue
            stack.pop()
            if node[1] == 1:
                cycle = inner(node)
                if cycle is not None:
                    stem = [n for n, _ in stack]
                    states = [sid for sid, _ in stem] + [sid for sid, _ in cycle]
                    ce = normalize_lasso(states, len(stem))
                    log.debug("recurrence violated: %s", ce)
                    return ce
    return None


def check_property(abstract: AbstractModel, prop: Property) -> Counterexample | None:
    if prop.kind is PropertyKind.INVARIANT:
        return find_invariant_counterexample(abstract, prop.formula)
    return find_recurrence_counterexample(abstract, prop.formula)


def holds_concretely(prop: Property, valuation: Mapping[str, str]) -> bool:
    return prop.formula.holds(valuation)
