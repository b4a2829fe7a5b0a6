"""Pipeline stages and the resumable per-problem state snapshot."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..errors import StateError
from .tickets import ReviewTicket

MAX_LLM_TRIALS = 4
MAX_SIM_TRIALS = 3
MAX_REVIEW_ROUNDS = 2


class Stage(str, Enum):
    INGEST = "ingest"
    RECOGNIZE = "recognize"
    SOLVE_LLM = "solve-llm"
    GEN_NETLIST = "gen-netlist"
    LINT = "lint"
    SIMULATE = "simulate"
    COMPARE = "compare"
    RETRY_LLM = "retry-llm"
    RETRY_SIM = "retry-sim"
    AWAIT_REVIEW = "await-review"
    ACCEPTED = "accepted"
    FAILED = "failed"


TERMINAL_STAGES = frozenset({Stage.ACCEPTED, Stage.FAILED})
# stages where the loop stops: terminal plus waiting on a human
RESTING_STAGES = TERMINAL_STAGES | {Stage.AWAIT_REVIEW}


@dataclass
class PipelineState:
    """Everything needed to resume a problem after a crash.

    Trial counters only move forward; a decrease means corrupted state and
    raises StateError. All artifact content lives in the workspace, so this
    snapshot stays small and JSON-friendly.
    """

    stage: Stage = Stage.INGEST
    llm_trial: int = 1
    sim_trial: int = 1
    await_count: int = 0
    category: str = ""
    tickets: list[ReviewTicket] = field(default_factory=list)
    failure_reason: str = ""
    accepted_via: str = ""
    pending_feedback: str = ""
    regen_pending: bool = False
    # each freshly generated deck gets at most one lint-driven repair turn
    lint_fix_used: bool = False
    # (llm_trial, sim_trial) of the previous comparison, for retry attribution
    last_compare: list[int] | None = None

    def bump_llm(self, to: int) -> None:
        if to < self.llm_trial:
            raise StateError(f"llm_trial cannot decrease ({self.llm_trial} -> {to})")
        if to > MAX_LLM_TRIALS:
            raise StateError(f"llm_trial capped at {MAX_LLM_TRIALS}, got {to}")
        self.llm_trial = to

    def bump_sim(self, to: int) -> None:
        if to < self.sim_trial:
            raise StateError(f"sim_trial cannot decrease ({self.sim_trial} -> {to})")
        if to > MAX_SIM_TRIALS:
            raise StateError(f"sim_trial capped at {MAX_SIM_TRIALS}, got {to}")
        self.sim_trial = to

    def ticket_by_id(self, ticket_id: str) -> ReviewTicket | None:
        for ticket in self.tickets:
            if ticket.id == ticket_id:
                return ticket
        return None

    @property
    def open_ticket(self) -> ReviewTicket | None:
        for ticket in self.tickets:
            if ticket.status == "open":
                return ticket
        return None

    def to_dict(self) -> dict:
        return {
            "stage": self.stage.value,
            "llm_trial": self.llm_trial,
            "sim_trial": self.sim_trial,
            "await_count": self.await_count,
            "category": self.category,
            "tickets": [t.to_dict() for t in self.tickets],
            "failure_reason": self.failure_reason,
            "accepted_via": self.accepted_via,
            "pending_feedback": self.pending_feedback,
            "regen_pending": self.regen_pending,
            "lint_fix_used": self.lint_fix_used,
            "last_compare": self.last_compare,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineState":
        return cls(
            stage=Stage(data["stage"]),
            llm_trial=data.get("llm_trial", 1),
            sim_trial=data.get("sim_trial", 1),
            await_count=data.get("await_count", 0),
            category=data.get("category", ""),
            tickets=[ReviewTicket.from_dict(t) for t in data.get("tickets", [])],
            failure_reason=data.get("failure_reason", ""),
            accepted_via=data.get("accepted_via", ""),
            pending_feedback=data.get("pending_feedback", ""),
            regen_pending=data.get("regen_pending", False),
            lint_fix_used=data.get("lint_fix_used", False),
            last_compare=data.get("last_compare"),
        )
