from __future__ import annotations

import enum
from dataclasses import dataclass, replace


class LastMode(str, enum.Enum):
    # how Out is seeded at the last position of a finite counterexample
    UNCONSTRAINED = "unconstrained"
    PAPER_STRICT = "paper_strict"


class Detector(str, enum.Enum):
    FIRST = "first"
    HEAVIEST = "heaviest"
    SPLITPATH = "splitpath"
    ORACLE = "oracle"


class ParallelMode(str, enum.Enum):
    FIRST_DETECTED = "first_detected"
    HEAVIEST = "heaviest"


class Verdict(str, enum.Enum):
    REAL = "real"
    SPURIOUS = "spurious"


@dataclass(frozen=True)
class AnalysisOptions:
    """Knobs shared by the CLI, the explorer and the CEGAR loop.

    ``workers`` above 1 switches the first/heaviest detectors to their
    parallel variants. ``unwind`` of None lets SplitPath pick its default.
    """

    detector: Detector = Detector.FIRST
    last_mode: LastMode = LastMode.UNCONSTRAINED
    workers: int = 1
    barrier: bool = False
    unwind: int | None = None
    max_iterations: int = 50

    def __post_init__(self):
        # accept plain strings from widgets and flags
        object.__setattr__(self, "detector", Detector(self.detector))
        object.__setattr__(self, "last_mode", LastMode(self.last_mode))
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.unwind is not None and self.unwind < 1:
            raise ValueError("unwind must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")

    @property
    def parallel(self) -> bool:
        return self.workers > 1 and self.detector in (Detector.FIRST, Detector.HEAVIEST)

    def with_(self, **changes) -> "AnalysisOptions":
        return replace(self, **changes)
