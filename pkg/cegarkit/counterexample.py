"""Abstract counterexamples, their Complete Finite Prefix view and path files.

Path file format, one path per line::

    finite: id id id ...
    lasso: id id ( id id ... )
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .abstraction import AbstractModel
from .errors import CounterexampleError, PathFormatError


class Kind(str, enum.Enum):
    FINITE = "finite"
    LASSO = "lasso"


@dataclass(frozen=True)
class Counterexample:
    kind: Kind
    states: tuple[str, ...]
    loop_start: int | None = None

    def __post_init__(self):
        if not self.states:
            raise CounterexampleError("counterexample is empty")
        if self.kind is Kind.LASSO:
            if self.loop_start is None or not 0 <= self.loop_start < len(self.states):
                raise CounterexampleError("lasso needs 0 <= loop_start <= n", self.loop_start)
        elif self.loop_start is not None:
            raise CounterexampleError("finite counterexample cannot have a loop_start")

    @classmethod
    def finite(cls, states: Sequence[str]) -> "Counterexample":
        return cls(Kind.FINITE, tuple(states))

    @classmethod
    def lasso(cls, states: Sequence[str], loop_start: int) -> "Counterexample":
        return cls(Kind.LASSO, tuple(states), loop_start)

    @property
    def is_lasso(self) -> bool:
        return self.kind is Kind.LASSO

    @property
    def stem(self) -> tuple[str, ...]:
        return self.states[: self.loop_start] if self.is_lasso else self.states

    @property
    def loop(self) -> tuple[str, ...]:
        return self.states[self.loop_start :] if self.is_lasso else ()

    def __len__(self) -> int:
        return len(self.states)

    def __str__(self) -> str:
        return render_path(self)


@dataclass(frozen=True)
class CFPView:
    states: tuple[str, ...]
    loop_start: int | None
    successor_of_last: str | None

    @property
    def last(self) -> int:
        return len(self.states) - 1

    def successor_index(self, i: int) -> int | None:
        if i < self.last:
            return i + 1
        return self.loop_start

    def __len__(self) -> int:
        return len(self.states)


def cfp(ce: Counterexample) -> CFPView:
    if ce.is_lasso:
        return CFPView(ce.states, ce.loop_start, ce.states[ce.loop_start])
    return CFPView(ce.states, None, None)


def validate_counterexample(abstract: AbstractModel, ce: Counterexample) -> None:
    amap = abstract.amap
    for k, sid in enumerate(ce.states):
        if sid not in amap:
            raise CounterexampleError(f"unknown abstract state {sid!r} at position {k}", k)
    if ce.states[0] not in abstract.initial:
        raise CounterexampleError("counterexample does not start in an initial abstract state", 0)
    for k in range(len(ce.states) - 1):
        if not abstract.has_edge(ce.states[k], ce.states[k + 1]):
            raise CounterexampleError(f"no abstract transition at position {k}", k)
    if ce.is_lasso and not abstract.has_edge(ce.states[-1], ce.states[ce.loop_start]):
        raise CounterexampleError("loop-back edge missing", len(ce.states) - 1)


def normalize_lasso(states: Sequence[str], loop_start: int) -> Counterexample:
    """Shrink the loop to its primitive period and rotate stem states into it."""
    states = list(states)
    loop = states[loop_start:]
    for period in range(1, len(loop) + 1):
        if len(loop) % period == 0 and loop == loop[:period] * (len(loop) // period):
            loop = loop[:period]
            break
    states = states[:loop_start] + loop
    while loop_start > 0 and states[loop_start - 1] == states[-1]:
        states.pop()
        loop_start -= 1
    return Counterexample.lasso(states, loop_start)


def render_path(ce: Counterexample) -> str:
    if ce.is_lasso:
        stem = " ".join(ce.stem)
        body = f"{stem} ( {' '.join(ce.loop)} )" if stem else f"( {' '.join(ce.loop)} )"
        return f"lasso: {body}"
    return f"finite: {' '.join(ce.states)}"


def render_concrete(stem: Sequence[str], cycle: Sequence[str] = ()) -> str:
    if cycle:
        return render_path(Counterexample.lasso([*stem, *cycle], len(stem)))
    return render_path(Counterexample.finite(stem))


def parse_path(line: str) -> Counterexample:
    head, colon, body = line.partition(":")
    if not colon:
        raise PathFormatError(f"expected 'finite:' or 'lasso:' prefix in {line!r}")
    tokens = body.replace("(", " ( ").replace(")", " ) ").split()
    kind = head.strip()
    if kind == "finite":
        if not tokens or "(" in tokens or ")" in tokens:
            raise PathFormatError(f"malformed finite path {line!r}")
        return Counterexample.finite(tokens)
    if kind == "lasso":
        if tokens.count("(") != 1 or tokens.count(")") != 1 or tokens[-1] != ")":
            raise PathFormatError(f"lasso needs exactly one trailing '( ... )' loop: {line!r}")
        open_at = tokens.index("(")
        stem, loop = tokens[:open_at], tokens[open_at + 1 : -1]
        if not loop:
            raise PathFormatError(f"lasso loop is empty: {line!r}")
        return Counterexample.lasso([*stem, *loop], len(stem))
    raise PathFormatError(f"unknown path kind {kind!r}")


def parse_path_file(text: str) -> list[Counterexample]:
    paths = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            paths.append(parse_path(line))
    return paths
