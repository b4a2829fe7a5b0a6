"""LLM orchestration: providers, sessions, prompt catalog, workflows."""

from .orchestrator import (
    RecognitionResult,
    SolutionText,
    extract_answer_expression,
    fix_netlist,
    generate_netlist,
    normalize_gate,
    recognize_circuit,
    refine_solution,
    repair_after_sim_failure,
    solve_problem,
    strip_code_fences,
)
from .provider import (
    HttpProvider,
    Message,
    MockProvider,
    RateLimiter,
    provider_from_config,
    reply_key,
)
from .session import ChatSession
from .templates import PromptTemplate, get_template, load_catalog

__all__ = [
    "ChatSession",
    "HttpProvider",
    "Message",
    "MockProvider",
    "PromptTemplate",
    "RateLimiter",
    "RecognitionResult",
    "SolutionText",
    "extract_answer_expression",
    "fix_netlist",
    "generate_netlist",
    "get_template",
    "load_catalog",
    "normalize_gate",
    "provider_from_config",
    "recognize_circuit",
    "refine_solution",
    "repair_after_sim_failure",
    "reply_key",
    "solve_problem",
    "strip_code_fences",
]
