"""Multi-turn LLM workflows: recognition, solving, netlist generation, extraction.

Each workflow drives one ChatSession through a fixed prompt sequence from the
template catalog. Nothing here touches the filesystem or the simulator; the
pipeline module owns persistence and sequencing across workflows.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ..compare import RationalNetworkFunction, TermSum, parse_expression
from ..errors import ExtractionError, GrammarError, InputError, ProtocolError
from ..model import (
    Category,
    CircuitDescription,
    DetectionBox,
    Provenance,
    SourceKind,
    Target,
    TargetKind,
)
from ..vision.raster import crop_inset, encode_png, load_gray
from .session import ChatSession
from .templates import get_template

# per-source wording for the inset recognition prompt
_INSET_WORDING = {
    SourceKind.INDEPENDENT_VOLTAGE: (
        "independent voltage source",
        "positive and negative terminals of this independent voltage source",
    ),
    SourceKind.INDEPENDENT_CURRENT: (
        "independent current source",
        "current direction through this independent current source",
    ),
    SourceKind.DEPENDENT: (
        "dependent source",
        "polarity/direction of this dependent source",
    ),
}

_REJECT_PREFIX = "not a match"

_GENERATE_TEMPLATES = {
    Category.CIRCUIT_ANALYSIS: "netlist.generate",
    Category.CIRCUIT_SYNTHESIS: "netlist.generate_synthesis",
    Category.NETWORK_FUNCTION_ANALYSIS: "netlist.generate_network",
    Category.NETWORK_FUNCTION_SYNTHESIS: "netlist.generate_network_synthesis",
}

_SYNTHESIS_CATEGORIES = (Category.CIRCUIT_SYNTHESIS, Category.NETWORK_FUNCTION_SYNTHESIS)


@dataclass(frozen=True)
class SolutionText:
    """Full step-by-step solution plus the concise final answer."""

    full: str
    concise: str

    def to_dict(self) -> dict:
        return {"full": self.full, "concise": self.concise}

    @staticmethod
    def from_dict(d: dict) -> "SolutionText":
        return SolutionText(d["full"], d["concise"])


@dataclass
class RecognitionResult:
    """Both description versions plus any inset rejections worth flagging."""

    v1: CircuitDescription
    v2: CircuitDescription
    inset_notes: list[str] = field(default_factory=list)


def normalize_gate(reply: str) -> str:
    """Trim, lowercase, strip punctuation; accept exactly "yes" or "no"."""
    norm = reply.strip().lower().strip(string.punctuation + string.whitespace)
    if norm not in ("yes", "no"):
        raise ProtocolError(f"expected Yes or No, got {reply!r}")
    return norm


def strip_code_fences(text: str) -> str:
    """Drop one surrounding ``` fence pair if the reply arrived wrapped."""
    stripped = text.strip()
    lines = stripped.splitlines()
    if len(lines) >= 2 and lines[0].startswith("```") and lines[-1].strip() == "```":
        return "\n".join(lines[1:-1]).strip()
    return stripped


def _diagram_bytes(diagram) -> bytes:
    if isinstance(diagram, (bytes, bytearray)):
        return bytes(diagram)
    path = Path(diagram)
    if not path.is_file():
        raise InputError(f"diagram not found: {path}")
    return path.read_bytes()


def recognize_circuit(
    session: ChatSession,
    diagram,
    detections: Sequence[DetectionBox] = (),
) -> RecognitionResult:
    """Walk the multi-step recognition dialogue over one diagram.

    The dialogue attaches the diagram, recognizes components and labeled
    currents (together forming the v1 description), asks the two strict
    yes/no source-existence gates, then re-identifies polarity from cropped
    insets for every detection whose kind the matching gate confirmed, and
    finally summarizes. The summary instructs the model to prefer inset
    results over the full-diagram reading, so the returned v2 carries the
    corrected polarities. An inset the model rejects ("Not a match") leaves
    the override unapplied and is reported in inset_notes for the reviewer.
    """
    raw = _diagram_bytes(diagram)
    session.ask(get_template("recognition.intro").render(), images=(raw,))
    components = session.ask(get_template("recognition.components").render())
    currents = session.ask(get_template("recognition.currents").render())

    gate = get_template("recognition.gate_independent").render()
    has_independent = normalize_gate(session.ask(gate)) == "yes"
    gate = get_template("recognition.gate_dependent").render()
    has_dependent = normalize_gate(session.ask(gate)) == "yes"

    v1 = CircuitDescription(components + "\n\n" + currents, 1, Provenance.RECOGNIZED)

    eligible = [
        d
        for d in detections
        if (has_dependent if d.kind is SourceKind.DEPENDENT else has_independent)
    ]
    notes: list[str] = []
    if eligible:
        image = load_gray(raw)
        counts = Counter(d.kind for d in eligible)
        template = get_template("recognition.inset")
        for detection in eligible:
            type_name, content = _INSET_WORDING[detection.kind]
            prompt = template.render(
                NUM_COMPONENTS=str(counts[detection.kind]),
                TYPE_COMPONENT=type_name,
                RECOGNITION_CONTENT=content,
                BBOX_XYXY=str(list(detection.box)),
            )
            crop = encode_png(crop_inset(image, detection.box))
            reply = session.ask(prompt, images=(crop,))
            if reply.strip().lower().startswith(_REJECT_PREFIX):
                notes.append(
                    f"inset at {list(detection.box)} rejected as {type_name}: {reply.strip()}"
                )

    summary = session.ask(get_template("recognition.summary").render())
    v2 = CircuitDescription(summary, 2, Provenance.POLARITY_CORRECTED)
    return RecognitionResult(v1, v2, notes)


def _summarize(session: ChatSession, full: str) -> SolutionText:
    concise = session.ask(get_template("solving.summarize").render())
    if not concise.strip():
        raise ProtocolError("summarization step returned an empty final answer")
    return SolutionText(full, concise)


def solve_problem(
    session: ChatSession,
    statement: str,
    description: CircuitDescription | None = None,
) -> SolutionText:
    """Two turns: full solution, then concise final-answer summarization.

    Without a description the statement-only prompt variant is used, for
    problems that never had a diagram.
    """
    if not statement.strip():
        raise InputError("problem statement is empty")
    if description is None:
        prompt = get_template("solving.direct").render(PROBLEM_STATEMENT=statement)
    else:
        prompt = get_template("solving.main").render(
            PROBLEM_STATEMENT=statement,
            CIRCUIT_INFORMATION=description.text,
        )
    return _summarize(session, session.ask(prompt))


def refine_solution(session: ChatSession, feedback: str) -> SolutionText:
    """Continue a solve session with reviewer feedback, then re-summarize."""
    if not feedback.strip():
        raise InputError("feedback text is empty")
    prompt = get_template("solving.feedback").render(FEEDBACK=feedback)
    return _summarize(session, session.ask(prompt))


def generate_netlist(
    session: ChatSession,
    statement: str,
    description: CircuitDescription,
    category: Category,
    solution: SolutionText | None = None,
) -> str:
    """Three turns: initial generation, format correction, accuracy check.

    Synthesis categories verify a worked solution, so they additionally embed
    the solved element values in the generation prompt.
    """
    if not category.simulable:
        raise InputError(f"category {category.value} is not simulable")
    bindings = {
        "PROBLEM_STATEMENT": statement,
        "CIRCUIT_INFORMATION": description.text,
    }
    if category in _SYNTHESIS_CATEGORIES:
        if solution is None:
            raise InputError("synthesis netlists need the solved element values")
        bindings["SOLVED_VALUES"] = solution.concise
    session.ask(get_template(_GENERATE_TEMPLATES[category]).render(**bindings))
    session.ask(get_template("netlist.format_check").render())
    final = session.ask(get_template("netlist.accuracy_check").render())
    return strip_code_fences(final)


def fix_netlist(session: ChatSession, findings: str) -> str:
    """One repair turn driven by a lint report."""
    reply = session.ask(get_template("netlist.lint_fix").render(LINT_FINDINGS=findings))
    return strip_code_fences(reply)


def repair_after_sim_failure(session: ChatSession, detail: str) -> str:
    """One repair turn driven by ngspice diagnostics."""
    reply = session.ask(get_template("netlist.sim_error").render(SIM_ERROR=detail))
    return strip_code_fences(reply)


def _clean_expression_reply(reply: str) -> str:
    text = strip_code_fences(reply).strip("` \t\r\n")
    for line in text.splitlines():
        if line.strip():
            return line.strip()
    return ""


def _parse_for_target(reply: str, target: Target) -> TermSum | RationalNetworkFunction:
    expr = parse_expression(_clean_expression_reply(reply))
    wants_rational = target.kind is TargetKind.NETWORK_FUNCTION
    if wants_rational and not isinstance(expr, RationalNetworkFunction):
        raise GrammarError("expected a rational network function in s for this target")
    if not wants_rational and not isinstance(expr, TermSum):
        raise GrammarError("expected a time-domain term sum for this target")
    return expr


def extract_answer_expression(
    session: ChatSession,
    solution: SolutionText,
    targets: Sequence[Target],
) -> dict[str, TermSum | RationalNetworkFunction]:
    """Restate each target's final answer in the closed answer grammar.

    A reply the grammar rejects earns exactly one reprompt carrying the
    parser's error message; a second rejection raises ExtractionError, which
    routes the problem to human review.
    """
    if not targets:
        raise InputError("no targets to extract")
    out: dict[str, TermSum | RationalNetworkFunction] = {}
    for target in targets:
        prompt = get_template("extract.expression").render(
            TARGET_NAME=target.name,
            SOLUTION_FULL=solution.full,
            SOLUTION_CONCISE=solution.concise,
        )
        reply = session.ask(prompt)
        try:
            out[target.name] = _parse_for_target(reply, target)
            continue
        except GrammarError as first_error:
            retry = get_template("extract.reprompt").render(
                GRAMMAR_ERROR=str(first_error),
                TARGET_NAME=target.name,
            )
        reply = session.ask(retry)
        try:
            out[target.name] = _parse_for_target(reply, target)
        except GrammarError as second_error:
            raise ExtractionError(
                f"target {target.name!r}: answer expression unparseable after a retry: "
                f"{second_error}"
            ) from second_error
    return out
