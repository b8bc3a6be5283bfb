"""Uniform verdict record shared by all solvers."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from .lagrangian import IterationTrace


class Status(str, Enum):
    SAFE = "safe"
    UNSAFE = "unsafe"
    TERMINATING = "terminating"
    VALID = "valid"
    INVALID = "invalid"
    UNKNOWN = "unknown"
    BUDGET = "budget"

    @property
    def polarity(self) -> int:
        """+1 for a witness, -1 for a counter-witness, 0 otherwise."""
        if self in (Status.SAFE, Status.TERMINATING, Status.VALID):
            return 1
        if self in (Status.UNSAFE, Status.INVALID):
            return -1
        return 0


@dataclass
class Result:
    status: Status
    witness: Any = None
    trace: IterationTrace = field(default_factory=IterationTrace)
    describe_x: Any = repr
    describe_y: Any = repr
    note: Optional[str] = None

    def json_trace(self) -> list[dict]:
        return self.trace.to_json(self.describe_x, self.describe_y)

    def __repr__(self) -> str:
        return f"Result({self.status.value}, {self.witness!r})"
