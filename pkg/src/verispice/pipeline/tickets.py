"""Review tickets: the handoff record between the pipeline and a human."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

from ..errors import InputError, StateError


class TicketTrigger(str, Enum):
    PERSISTENT_MISMATCH = "persistent-mismatch"
    EXTRACTION_ERROR = "extraction-error"
    NOT_SIMULABLE = "not-simulable"
    SIM_FAILURE_EXHAUSTED = "sim-failure-exhausted"


class ResolutionKind(str, Enum):
    CIRCUIT_CORRECTION = "circuit-correction"
    SOLUTION_FEEDBACK = "solution-feedback"
    ACCEPT = "accept"
    REJECT = "reject"
    NETLIST_PATCH = "netlist-patch"  # expert path, off unless explicitly enabled


# kinds that carry human text the pipeline feeds back into a retrial
TEXT_KINDS = frozenset(
    {
        ResolutionKind.CIRCUIT_CORRECTION,
        ResolutionKind.SOLUTION_FEEDBACK,
        ResolutionKind.NETLIST_PATCH,
    }
)


@dataclass
class Resolution:
    kind: ResolutionKind
    text: str = ""
    ts: float = field(default_factory=time.time)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "text": self.text, "ts": self.ts}

    @classmethod
    def from_dict(cls, data: dict) -> "Resolution":
        return cls(ResolutionKind(data["kind"]), data.get("text", ""), data.get("ts", 0.0))


@dataclass
class ReviewTicket:
    """One open question for a reviewer; immutable once closed."""

    id: str
    problem_id: str
    trigger: TicketTrigger
    review_request: str
    artifacts: list[str] = field(default_factory=list)
    created_at: float = field(default_factory=time.time)
    status: str = "open"
    resolution: Resolution | None = None

    def resolve(self, kind: ResolutionKind, text: str = "") -> Resolution:
        """Record the human's decision; a closed ticket never reopens."""
        if self.status == "closed":
            raise StateError(f"ticket {self.id} is already closed")
        if kind in TEXT_KINDS and not text.strip():
            raise InputError(f"resolution {kind.value} needs a non-empty text")
        self.resolution = Resolution(kind, text)
        self.status = "closed"
        return self.resolution

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "problem_id": self.problem_id,
            "trigger": self.trigger.value,
            "review_request": self.review_request,
            "artifacts": list(self.artifacts),
            "created_at": self.created_at,
            "status": self.status,
            "resolution": self.resolution.to_dict() if self.resolution else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReviewTicket":
        resolution = data.get("resolution")
        return cls(
            id=data["id"],
            problem_id=data["problem_id"],
            trigger=TicketTrigger(data["trigger"]),
            review_request=data.get("review_request", ""),
            artifacts=list(data.get("artifacts", [])),
            created_at=data.get("created_at", 0.0),
            status=data.get("status", "open"),
            resolution=Resolution.from_dict(resolution) if resolution else None,
        )
