"""Problem-solving pipeline: stages, tickets, runner, and batch driver."""

from .runner import (
    ProblemRunner,
    batch_run,
    discover_problems,
    run_problem,
    summarize,
)
from .state import (
    MAX_LLM_TRIALS,
    MAX_REVIEW_ROUNDS,
    MAX_SIM_TRIALS,
    RESTING_STAGES,
    TERMINAL_STAGES,
    PipelineState,
    Stage,
)
from .tickets import Resolution, ResolutionKind, ReviewTicket, TicketTrigger

__all__ = [
    "MAX_LLM_TRIALS",
    "MAX_REVIEW_ROUNDS",
    "MAX_SIM_TRIALS",
    "PipelineState",
    "ProblemRunner",
    "RESTING_STAGES",
    "Resolution",
    "ResolutionKind",
    "ReviewTicket",
    "Stage",
    "TERMINAL_STAGES",
    "TicketTrigger",
    "batch_run",
    "discover_problems",
    "run_problem",
    "summarize",
]
