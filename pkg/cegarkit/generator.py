"""Seeded random models for benchmarks and randomized tests."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .errors import GeneratorError
from .model import KripkeStructure, build_model, parse_model, render_model, validate_model

log = logging.getLogger(__name__)

GROUP_VAR = "grp"


@dataclass(frozen=True)
class GenParams:
    num_states: int = 20
    num_vars: int = 3
    domain_size: int = 3
    edge_density: float = 0.1
    invisible_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.num_states < 1:
            raise GeneratorError("num_states must be at least 1")
        if self.num_vars < 1:
            raise GeneratorError("num_vars must be at least 1")
        if self.domain_size < 1:
            raise GeneratorError("domain_size must be at least 1")
        if not 0.0 <= self.edge_density <= 1.0:
            raise GeneratorError("edge_density must lie in [0, 1]")
        if not 0.0 <= self.invisible_fraction <= 1.0:
            raise GeneratorError("invisible_fraction must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise GeneratorError("seed must be an unsigned 64-bit value")


def var_names(params: GenParams) -> list[str]:
    # the group variable always stays visible
    return [GROUP_VAR] + [f"v{k}" for k in range(1, params.num_vars)]


def suggested_invisible(params: GenParams) -> list[str]:
    others = var_names(params)[1:]
    return others[: round(params.invisible_fraction * len(others))]


def generate_model(params: GenParams) -> KripkeStructure:
    rng = np.random.default_rng(params.seed)
    n = params.num_states
    names = var_names(params)
    domains = {
        name: [f"{'g' if name == GROUP_VAR else 'x'}{v}" for v in range(params.domain_size)]
        for name in names
    }
    values = rng.integers(0, params.domain_size, size=(n, len(names)))
    states = {
        f"s{i}": {name: domains[name][values[i, k]] for k, name in enumerate(names)}
        for i in range(n)
    }
    adjacency = rng.random((n, n)) < params.edge_density
    transitions = [(f"s{i}", f"s{j}") for i, j in zip(*np.nonzero(adjacency))]
    initial = [f"s{i}" for i in np.flatnonzero(rng.random(n) < 0.1)] or ["s0"]
    model = build_model(domains, states, initial, transitions)
    log.debug("generated %d states, %d transitions, %d initial", n, len(transitions), len(initial))
    return model


def gen_random_model(params: GenParams) -> str:
    """The model file text for ``params``; identical params give identical bytes."""
    model = generate_model(params)
    header = [f"{key}={value}" for key, value in asdict(params).items()]
    header.append(f"suggested invisible: {','.join(suggested_invisible(params)) or '-'}")
    text = render_model(model, header=["generated model", *header])
    validate_model(parse_model(text))
    return text
