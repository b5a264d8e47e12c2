from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Any


class Verdict(enum.Enum):
    RECOVERED = "recovered"
    NOT_IN_CLASS = "not_in_class"


@dataclass
class RecoveryStats:
    iterations: int = 0
    candidates: int = 0
    wall_time: float = 0.0
    converged: bool = True


@dataclass
class RecoveryOutcome:
    """Either a recovered object that passed SIS verification, or a NotInClass verdict."""

    verdict: Verdict
    value: Any = None
    stats: RecoveryStats = field(default_factory=RecoveryStats)

    @property
    def recovered(self) -> bool:
        return self.verdict is Verdict.RECOVERED

    @classmethod
    def ok(cls, value, stats=None) -> RecoveryOutcome:
        return cls(Verdict.RECOVERED, value, stats or RecoveryStats())

    @classmethod
    def none(cls, stats=None) -> RecoveryOutcome:
        return cls(Verdict.NOT_IN_CLASS, None, stats or RecoveryStats())


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        return False
