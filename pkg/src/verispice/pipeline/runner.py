"""Per-problem state machine and the batch driver.

The runner walks one problem through recognize -> solve -> netlist -> lint ->
simulate -> compare, escalating to a review ticket when automation runs out.
Every stage persists its artifacts before the state snapshot advances, so a
killed run resumes at the last completed stage with nothing lost.

Retry policy on a comparison mismatch: first rerun the solve (llm trial 2),
then regenerate the netlist (sim trial 2); if all three comparisons mismatch,
open the one persistent-mismatch ticket asking for recognition proofreading.
A circuit correction retries both sides (trial 3); solution feedback buys one
final solve retrial (trial 4). Simulation failures consume sim trials on
their own and never touch the solve side.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from ..compare.expr import (
    RationalNetworkFunction,
    evaluate,
    format_expression,
    parse_expression,
)
from ..compare.verdict import TolerancePolicy, compare
from ..config import RunConfig
from ..errors import ExtractionError, InputError, ParseError, StateError
from ..llm.orchestrator import (
    SolutionText,
    extract_answer_expression,
    fix_netlist,
    generate_netlist,
    recognize_circuit,
    refine_solution,
    repair_after_sim_failure,
    solve_problem,
)
from ..llm.provider import provider_from_config
from ..llm.session import ChatSession
from ..model import (
    TEMPERATURE_SCHEDULE,
    Category,
    CircuitDescription,
    Problem,
    Provenance,
    TargetKind,
    load_problem,
)
from ..netlist.lint import lint
from ..netlist.parse import parse_netlist
from ..sim.output import AxisKind, series_from_json, series_to_json
from ..sim.runner import run as run_simulation
from ..vision.detect import ExternalDetectorClient, detect_dependent_sources
from ..workspace import Workspace
from .state import (
    MAX_REVIEW_ROUNDS,
    MAX_SIM_TRIALS,
    RESTING_STAGES,
    PipelineState,
    Stage,
)
from .tickets import ResolutionKind, ReviewTicket, TicketTrigger

log = logging.getLogger(__name__)

# artifact names; the workspace versions repeats (name.v2.ext) automatically
STATEMENT = "statement.txt"
DETECTIONS = "detections.json"
DESCRIPTION_V1 = "description_v1.txt"
DESCRIPTION_V2 = "description_v2.txt"
DESCRIPTION_V3 = "description_v3.txt"
INSET_NOTES = "inset_notes.json"
RECOGNITION_SESSION = "recognition_session.json"
SOLUTION_FULL = "solution_full.txt"
SOLUTION_CONCISE = "solution_concise.txt"
SOLVE_SESSION = "solve_session.json"
EXPRESSIONS = "expressions.json"
NETLIST = "netlist.cir"
NETLIST_SESSION = "netlist_session.json"
LINT_REPORT = "lint_report.json"
SIM_STDOUT = "sim_stdout.txt"
SIM_STDERR = "sim_stderr.txt"
SERIES = "series.json"
EXPR_SERIES = "expr_series.json"
COMPARE_REPORT = "compare_report.json"
CORRECTION = "correction.txt"
FEEDBACK = "feedback.txt"

REQUEST_RECOGNITION_REVIEW = (
    "Simulation and the derived answer still disagree after a solve rerun and "
    "a netlist regeneration. Proofread the recognized circuit description "
    "against the diagram and submit a corrected description, or give solution "
    "feedback."
)
REQUEST_SOLUTION_REVIEW = (
    "The corrected description still produced a mismatch. Review the solution "
    "and the simulation; submit solution feedback for one final retrial, or "
    "reject."
)
REQUEST_EXTRACTION_REVIEW = (
    "The final answer could not be restated in the answer grammar even after "
    "a retry. Correct the circuit description or give solution feedback."
)
REQUEST_SIGN_OFF = (
    "This problem cannot be verified by simulation. Check the solution by "
    "hand, then accept or reject."
)
REQUEST_SIM_FAILURE_REVIEW = (
    "Every simulation attempt failed. Reject the problem, or repair the "
    "netlist by hand where that option is enabled."
)

_TICKET_ARTIFACT_CANDIDATES = (
    "diagram.png",
    "diagram.jpg",
    DESCRIPTION_V3,
    DESCRIPTION_V2,
    SOLUTION_CONCISE,
    SOLUTION_FULL,
    EXPRESSIONS,
    NETLIST,
    LINT_REPORT,
    SERIES,
    EXPR_SERIES,
    COMPARE_REPORT,
    SIM_STDOUT,
    SIM_STDERR,
)


class ProblemRunner:
    """Drives one problem from ingest to a resting stage."""

    def __init__(self, problem: Problem, workspace: Workspace, config: RunConfig, provider):
        self.problem = problem
        self.ws = workspace
        self.config = config
        self.provider = provider
        saved = workspace.load_state()
        self.state = PipelineState.from_dict(saved) if saved else PipelineState()
        self._policy = TolerancePolicy(config.rel_tolerance, config.abs_tolerance)

    # -- driving -------------------------------------------------------------

    def run(self) -> dict:
        """Advance until the problem rests (accepted, failed, or in review)."""
        handlers = {
            Stage.INGEST: self._ingest,
            Stage.RECOGNIZE: self._recognize,
            Stage.SOLVE_LLM: self._solve,
            Stage.RETRY_LLM: self._solve,
            Stage.GEN_NETLIST: self._generate,
            Stage.RETRY_SIM: self._generate,
            Stage.LINT: self._lint,
            Stage.SIMULATE: self._simulate,
            Stage.COMPARE: self._compare,
        }
        while self.state.stage not in RESTING_STAGES:
            handlers[self.state.stage]()
        return self.state.to_dict()

    def _save(self, stage: Stage | None = None, **updates) -> None:
        """Advance the snapshot; artifacts must already be on disk."""
        for key, value in updates.items():
            setattr(self.state, key, value)
        if stage is not None:
            self.state.stage = stage
        self.ws.save_state(self.state.to_dict())

    # -- review plumbing -----------------------------------------------------

    def _enter_review(self, trigger: TicketTrigger, request: str) -> None:
        """Open a ticket and park the problem, within the two-review budget."""
        if self.state.await_count >= MAX_REVIEW_ROUNDS:
            self._fail("review budget exhausted")
            return
        ticket = ReviewTicket(
            id=f"{self.problem.id}-t{len(self.state.tickets) + 1}",
            problem_id=self.problem.id,
            trigger=trigger,
            review_request=request,
            artifacts=[n for n in _TICKET_ARTIFACT_CANDIDATES if self.ws.has(n)],
        )
        self.state.tickets.append(ticket)
        self.ws.log_event(
            "ticket-opened",
            ticket=ticket.id,
            trigger=trigger.value,
            llm_trial=self.state.llm_trial,
            sim_trial=self.state.sim_trial,
        )
        self.ws.log_event("review-entered", count=self.state.await_count + 1)
        self._save(Stage.AWAIT_REVIEW, await_count=self.state.await_count + 1)

    def _fail(self, reason: str) -> None:
        self.ws.log_event("failed", reason=reason)
        self._save(Stage.FAILED, failure_reason=reason)

    def _accept(self, via: str) -> None:
        self.ws.log_event(
            "accepted",
            via=via,
            llm_trial=self.state.llm_trial,
            sim_trial=self.state.sim_trial,
        )
        self._save(Stage.ACCEPTED, accepted_via=via)

    # -- stage handlers ------------------------------------------------------

    def _ingest(self) -> None:
        problem = self.problem
        self.ws.persist(STATEMENT, problem.statement)
        if problem.diagram_path is not None:
            name = "diagram" + problem.diagram_path.suffix.lower()
            self.ws.persist(name, problem.diagram_path.read_bytes())
        self.ws.log_event("ingest", category=problem.category.value)
        next_stage = Stage.SOLVE_LLM if problem.diagram_path is None else Stage.RECOGNIZE
        self._save(next_stage, category=problem.category.value)

    def _diagram_name(self) -> str | None:
        for name in ("diagram.png", "diagram.jpg"):
            if self.ws.has(name):
                return name
        return None

    def _recognize(self) -> None:
        name = self._diagram_name()
        if name is None:
            raise StateError("recognize stage reached without a stored diagram")
        raw = self.ws.read(name)
        detections = detect_dependent_sources(raw)
        if self.config.detector_command or self.config.detector_url:
            client = ExternalDetectorClient(
                command=list(self.config.detector_command),
                url=self.config.detector_url,
                threshold=self.config.detector_threshold,
            )
            detections.extend(client.detect(self.ws.path_of(name)))
        self.ws.persist(
            DETECTIONS,
            json.dumps(
                [
                    {
                        "kind": d.kind.value,
                        "box": list(d.box),
                        "origin": d.origin.value,
                        "confidence": d.confidence,
                    }
                    for d in detections
                ],
                indent=1,
            ),
        )
        session = ChatSession(self.provider, temperature=0.0)
        result = recognize_circuit(session, raw, detections)
        self.ws.persist(DESCRIPTION_V1, result.v1.text, provenance=result.v1.provenance.value)
        self.ws.persist(DESCRIPTION_V2, result.v2.text, provenance=result.v2.provenance.value)
        self.ws.persist(INSET_NOTES, json.dumps(result.inset_notes, indent=1))
        self.ws.persist(RECOGNITION_SESSION, json.dumps(session.to_dict()))
        self.ws.log_event(
            "recognized", detections=len(detections), inset_notes=len(result.inset_notes)
        )
        self._save(Stage.SOLVE_LLM)

    def _current_description(self) -> CircuitDescription | None:
        for name, version, provenance in (
            (DESCRIPTION_V3, 3, Provenance.HUMAN_CORRECTED),
            (DESCRIPTION_V2, 2, Provenance.POLARITY_CORRECTED),
            (DESCRIPTION_V1, 1, Provenance.RECOGNIZED),
        ):
            if self.ws.has(name):
                return CircuitDescription(self.ws.read_text(name), version, provenance)
        return None

    def _solve(self) -> None:
        state = self.state
        category = Category(state.category)
        statement = self.ws.read_text(STATEMENT)
        temperature = TEMPERATURE_SCHEDULE[state.llm_trial]
        if state.pending_feedback:
            session = ChatSession.restore(
                self.provider, json.loads(self.ws.read_text(SOLVE_SESSION))
            )
            session.temperature = temperature
            solution = refine_solution(session, state.pending_feedback)
        else:
            session = ChatSession(self.provider, temperature)
            solution = solve_problem(session, statement, self._current_description())
        self.ws.persist(SOLUTION_FULL, solution.full, llm_trial=state.llm_trial)
        self.ws.persist(SOLUTION_CONCISE, solution.concise, llm_trial=state.llm_trial)
        self.ws.log_event(
            "solved", llm_trial=state.llm_trial, temperature=temperature,
            with_feedback=bool(state.pending_feedback),
        )
        state.pending_feedback = ""

        if not category.simulable:
            self.ws.persist(SOLVE_SESSION, json.dumps(session.to_dict()))
            self._enter_review(TicketTrigger.NOT_SIMULABLE, REQUEST_SIGN_OFF)
            return

        try:
            expressions = extract_answer_expression(session, solution, self.problem.targets)
        except ExtractionError as exc:
            self.ws.persist(SOLVE_SESSION, json.dumps(session.to_dict()))
            self.ws.log_event("extraction-failed", error=str(exc), llm_trial=state.llm_trial)
            self._enter_review(TicketTrigger.EXTRACTION_ERROR, REQUEST_EXTRACTION_REVIEW)
            return
        self.ws.persist(
            EXPRESSIONS,
            json.dumps(
                [
                    {
                        "name": target.name,
                        "kind": target.kind.value,
                        "text": format_expression(expressions[target.name]),
                    }
                    for target in self.problem.targets
                ],
                indent=1,
            ),
            llm_trial=state.llm_trial,
        )
        self.ws.persist(SOLVE_SESSION, json.dumps(session.to_dict()))
        self.ws.log_event("extracted", targets=len(expressions), llm_trial=state.llm_trial)

        if state.stage is Stage.SOLVE_LLM:
            self._save(Stage.GEN_NETLIST)
        elif state.regen_pending:
            self.state.bump_sim(state.sim_trial + 1)
            self._save(Stage.RETRY_SIM, regen_pending=False, lint_fix_used=False)
        elif self.ws.has(SERIES):
            self._save(Stage.COMPARE)
        else:
            self._save(Stage.GEN_NETLIST)

    def _solution(self) -> SolutionText:
        return SolutionText(
            self.ws.read_text(SOLUTION_FULL), self.ws.read_text(SOLUTION_CONCISE)
        )

    def _generate(self) -> None:
        state = self.state
        category = Category(state.category)
        description = self._current_description()
        if description is None:
            raise StateError("netlist generation reached without a circuit description")
        session = ChatSession(self.provider, TEMPERATURE_SCHEDULE[state.llm_trial])
        deck = generate_netlist(
            session,
            self.ws.read_text(STATEMENT),
            description,
            category,
            solution=self._solution(),
        )
        self.ws.persist(NETLIST, deck, llm_trial=state.llm_trial, sim_trial=state.sim_trial)
        self.ws.persist(NETLIST_SESSION, json.dumps(session.to_dict()))
        self.ws.log_event(
            "netlist-generated", llm_trial=state.llm_trial, sim_trial=state.sim_trial
        )
        self._save(Stage.LINT, lint_fix_used=False)

    def _lint_findings(self, deck: str) -> tuple[list[str], list[str]]:
        """Returns (error lines, warning lines); a parse failure is an error."""
        try:
            report = lint(parse_netlist(deck))
        except ParseError as exc:
            return [f"parse error: {exc}"], []
        errors = [f"{f.rule} line {f.line}: {f.message}" for f in report.errors]
        warnings = [
            f"{f.rule} line {f.line}: {f.message}"
            for f in report.findings
            if f.severity != "error"
        ]
        return errors, warnings

    def _lint(self) -> None:
        deck = self.ws.read_text(NETLIST)
        errors, warnings = self._lint_findings(deck)
        self.ws.persist(
            LINT_REPORT,
            json.dumps({"errors": errors, "warnings": warnings}, indent=1),
            sim_trial=self.state.sim_trial,
        )
        self.ws.log_event("lint", errors=len(errors), warnings=len(warnings))
        if errors and not self.state.lint_fix_used:
            session = ChatSession.restore(
                self.provider, json.loads(self.ws.read_text(NETLIST_SESSION))
            )
            fixed = fix_netlist(session, "\n".join(errors + warnings))
            self.ws.persist(NETLIST, fixed, sim_trial=self.state.sim_trial, repaired="lint")
            self.ws.persist(NETLIST_SESSION, json.dumps(session.to_dict()))
            remaining, _ = self._lint_findings(fixed)
            self.ws.log_event("lint-fixed", remaining_errors=len(remaining))
            self._save(Stage.SIMULATE, lint_fix_used=True)
            return
        # ngspice is the authority; unresolved findings go along as context
        self._save(Stage.SIMULATE)

    def _simulate(self) -> None:
        state = self.state
        outcome = run_simulation(
            self.ws.path_of(NETLIST), self.config.ngspice, self.config.sim_timeout
        )
        self.ws.persist(SIM_STDOUT, outcome.stdout, sim_trial=state.sim_trial)
        self.ws.persist(SIM_STDERR, outcome.stderr, sim_trial=state.sim_trial)
        if outcome.ok:
            self.ws.persist(SERIES, series_to_json(outcome.series), sim_trial=state.sim_trial)
            self.ws.log_event(
                "simulated", status=outcome.status.value, sim_trial=state.sim_trial,
                points=len(outcome.series),
            )
            self._save(Stage.COMPARE)
            return
        self.ws.log_event(
            "sim-failure", status=outcome.status.value, sim_trial=state.sim_trial,
            detail=outcome.detail,
        )
        if state.sim_trial >= MAX_SIM_TRIALS:
            self._enter_review(
                TicketTrigger.SIM_FAILURE_EXHAUSTED, REQUEST_SIM_FAILURE_REVIEW
            )
            return
        session = ChatSession.restore(
            self.provider, json.loads(self.ws.read_text(NETLIST_SESSION))
        )
        detail = outcome.detail or outcome.status.value
        repaired = repair_after_sim_failure(session, detail)
        self.ws.persist(
            NETLIST, repaired, sim_trial=state.sim_trial + 1, repaired="sim-failure"
        )
        self.ws.persist(NETLIST_SESSION, json.dumps(session.to_dict()))
        self.ws.log_event("netlist-repaired", sim_trial=state.sim_trial + 1)
        self.state.bump_sim(state.sim_trial + 1)
        self._save(Stage.LINT, lint_fix_used=False)

    # -- comparison ----------------------------------------------------------

    def _series_variable(self, series, name: str) -> str | None:
        for candidate in (name, f"v({name})", f"i({name})"):
            try:
                series.variable(candidate)
                return candidate
            except KeyError:
                continue
        if len(series.variables) == 1:
            return None
        raise InputError(
            f"simulation printed {sorted(series.variables)} but target {name!r} "
            "matches none of them"
        )

    def _compare_target(self, series, entry: dict) -> dict:
        expr = parse_expression(entry["text"])
        kind = TargetKind(entry["kind"])
        if kind is TargetKind.NETWORK_FUNCTION or isinstance(expr, RationalNetworkFunction):
            if series.axis_kind is not AxisKind.FREQUENCY:
                raise InputError(
                    f"target {entry['name']!r} needs a frequency sweep, "
                    f"got a {series.axis_kind.value} axis"
                )
            magnitude, phase = evaluate(expr, series.axis, AxisKind.FREQUENCY)
            mag_report = compare(series, magnitude, self._policy, variable="magout")
            phase_report = compare(
                series, phase, self._policy, variable="phout", angular=True
            )
            match = mag_report.is_match and phase_report.is_match
            if mag_report.matched_by == "Global" and phase_report.matched_by == "Global":
                matched_by = "Global"
            elif match:
                matched_by = "TailOnly"
            else:
                matched_by = None
            return {
                "name": entry["name"],
                "kind": kind.value,
                "match": match,
                "matched_by": matched_by,
                "magnitude": mag_report.to_dict(),
                "phase": phase_report.to_dict(),
                "values": {
                    "magnitude": [float(v) for v in magnitude],
                    "phase": [float(v) for v in phase],
                },
            }
        if series.axis_kind is not AxisKind.TIME:
            raise InputError(
                f"target {entry['name']!r} needs a transient result, "
                f"got a {series.axis_kind.value} axis"
            )
        values = evaluate(expr, series.axis, AxisKind.TIME)
        variable = self._series_variable(series, entry["name"])
        report = compare(series, values, self._policy, variable=variable)
        return {
            "name": entry["name"],
            "kind": kind.value,
            "match": report.is_match,
            "matched_by": report.matched_by,
            "report": report.to_dict(),
            "values": [float(v) for v in values],
        }

    def _changed_side(self) -> str:
        prev = self.state.last_compare
        if not prev:
            return ""
        solve_changed = self.state.llm_trial > prev[0]
        sim_changed = self.state.sim_trial > prev[1]
        if solve_changed and sim_changed:
            return "both"
        if solve_changed:
            return "solve"
        if sim_changed:
            return "netlist"
        return "none"

    def _compare(self) -> None:
        state = self.state
        series = series_from_json(self.ws.read_text(SERIES))
        entries = json.loads(self.ws.read_text(EXPRESSIONS))
        targets = [self._compare_target(series, entry) for entry in entries]
        # derived curves go to their own artifact so viewers can overlay them
        # without redoing the evaluation
        expr_series = {t["name"]: t.pop("values") for t in targets}
        self.ws.persist(
            EXPR_SERIES, json.dumps(expr_series, indent=1),
            llm_trial=state.llm_trial, sim_trial=state.sim_trial,
        )
        match = all(t["match"] for t in targets)
        if match:
            matched_by = (
                "Global" if all(t["matched_by"] == "Global" for t in targets) else "TailOnly"
            )
        else:
            matched_by = None
        changed_side = self._changed_side()
        report = {
            "overall": "match" if match else "mismatch",
            "matched_by": matched_by,
            "llm_trial": state.llm_trial,
            "sim_trial": state.sim_trial,
            "changed_side": changed_side,
            "rel_tolerance": self._policy.rel_tolerance,
            "abs_tolerance": self._policy.abs_tolerance,
            "targets": targets,
        }
        path = self.ws.persist(
            COMPARE_REPORT, json.dumps(report, indent=1),
            llm_trial=state.llm_trial, sim_trial=state.sim_trial,
        )
        self.ws.log_event(
            "compared",
            outcome="match" if match else "mismatch",
            matched_by=matched_by,
            llm_trial=state.llm_trial,
            sim_trial=state.sim_trial,
            changed_side=changed_side,
            report=path.name,
        )
        state.last_compare = [state.llm_trial, state.sim_trial]
        if match:
            self._accept(f"match:{matched_by}")
            return
        self._route_mismatch(path.name)

    def _route_mismatch(self, report_name: str) -> None:
        """Attach the fresh mismatch to a retry, a ticket, or the failure."""
        state = self.state
        if state.llm_trial == 1:
            self.ws.log_event("mismatch-routed", to="retry-llm", report=report_name)
            state.bump_llm(2)
            self._save(Stage.RETRY_LLM)
        elif state.llm_trial == 2 and state.sim_trial == 1:
            self.ws.log_event("mismatch-routed", to="retry-sim", report=report_name)
            state.bump_sim(2)
            self._save(Stage.RETRY_SIM, lint_fix_used=False)
        elif state.llm_trial in (2, 3):
            if state.await_count >= MAX_REVIEW_ROUNDS:
                self.ws.log_event("mismatch-routed", to="failed", report=report_name)
                self._fail("review budget exhausted")
                return
            ticket_id = f"{self.problem.id}-t{len(state.tickets) + 1}"
            self.ws.log_event("mismatch-routed", to=f"ticket:{ticket_id}", report=report_name)
            request = (
                REQUEST_RECOGNITION_REVIEW
                if state.llm_trial == 2
                else REQUEST_SOLUTION_REVIEW
            )
            self._enter_review(TicketTrigger.PERSISTENT_MISMATCH, request)
        else:
            self.ws.log_event("mismatch-routed", to="failed", report=report_name)
            self._fail("mismatch after all retrials")

    # -- resolutions ---------------------------------------------------------

    def _validate_resolution(
        self, ticket: ReviewTicket, kind: ResolutionKind, text: str
    ) -> None:
        state = self.state
        category = Category(state.category)
        if kind is ResolutionKind.CIRCUIT_CORRECTION:
            if category is Category.NO_DIAGRAM:
                raise InputError("problem has no diagram, so there is no circuit to correct")
            if ticket.trigger is TicketTrigger.SIM_FAILURE_EXHAUSTED:
                raise InputError(
                    "simulation budget is exhausted; a corrected description "
                    "cannot be verified"
                )
            if state.llm_trial >= 3:
                raise InputError("the correction retrial was already used")
        elif kind is ResolutionKind.SOLUTION_FEEDBACK:
            if state.llm_trial >= 4:
                raise InputError("the feedback retrial was already used")
            if (
                ticket.trigger is TicketTrigger.SIM_FAILURE_EXHAUSTED
                and not self.ws.has(SERIES)
            ):
                raise InputError(
                    "no simulation result exists to compare a revised solution against"
                )
        elif kind is ResolutionKind.ACCEPT:
            if category.simulable:
                raise InputError(
                    "accept requires a matched comparison; only problems that "
                    "cannot be simulated are signed off directly"
                )
            if not self.ws.has(SOLUTION_FULL):
                raise InputError("no solution exists to sign off")
        elif kind is ResolutionKind.NETLIST_PATCH:
            if ticket.trigger is not TicketTrigger.SIM_FAILURE_EXHAUSTED:
                raise InputError(
                    "a netlist patch applies only to simulation-failure tickets"
                )

    def apply_resolution(self, ticket_id: str, kind: ResolutionKind, text: str = "") -> dict:
        """Record a reviewer decision and stage its retrial; does not run it.

        Raises InputError for an unknown ticket or an inapplicable kind, and
        StateError when the ticket is already closed.
        """
        state = self.state
        ticket = state.ticket_by_id(ticket_id)
        if ticket is None:
            raise InputError(f"unknown ticket {ticket_id!r}")
        self._validate_resolution(ticket, kind, text)
        ticket.resolve(kind, text)

        if kind is ResolutionKind.ACCEPT:
            self.ws.log_event("ticket-resolved", ticket=ticket.id, kind=kind.value)
            self._accept("sign-off")
        elif kind is ResolutionKind.REJECT:
            self.ws.log_event("ticket-resolved", ticket=ticket.id, kind=kind.value)
            self._fail("rejected by reviewer")
        elif kind is ResolutionKind.CIRCUIT_CORRECTION:
            self.ws.persist(CORRECTION, text)
            self.ws.persist(
                DESCRIPTION_V3, text, provenance=Provenance.HUMAN_CORRECTED.value
            )
            self.ws.log_event("ticket-resolved", ticket=ticket.id, kind=kind.value)
            state.bump_llm(3)
            regen = (
                Category(state.category).simulable
                and self.ws.has(SERIES)
                and state.sim_trial < MAX_SIM_TRIALS
            )
            self._save(Stage.RETRY_LLM, regen_pending=regen)
        elif kind is ResolutionKind.NETLIST_PATCH:
            self.ws.persist(NETLIST, text, repaired="human")
            self.ws.log_event("ticket-resolved", ticket=ticket.id, kind=kind.value)
            self._save(Stage.LINT, lint_fix_used=False)
        else:
            self.ws.persist(FEEDBACK, text)
            self.ws.log_event("ticket-resolved", ticket=ticket.id, kind=kind.value)
            state.bump_llm(4)
            self._save(Stage.RETRY_LLM, pending_feedback=text)
        return self.state.to_dict()

    def resolve_ticket(self, ticket_id: str, kind: ResolutionKind, text: str = "") -> dict:
        """Apply a resolution and run the scheduled retrial to its next rest."""
        self.apply_resolution(ticket_id, kind, text)
        return self.run()


# -- module-level conveniences ----------------------------------------------


def run_problem(
    problem_dir: str | Path,
    workspace_root: str | Path,
    config: RunConfig,
    provider=None,
) -> dict:
    """Load, run (or resume) one problem; returns the final state snapshot."""
    problem = load_problem(problem_dir)
    workspace = Workspace(workspace_root, problem.id)
    provider = provider or provider_from_config(config)
    return ProblemRunner(problem, workspace, config, provider).run()


def discover_problems(problems_dir: str | Path) -> list[Path]:
    root = Path(problems_dir)
    if not root.is_dir():
        raise InputError(f"problems directory not found: {root}")
    return sorted(d for d in root.iterdir() if d.is_dir() and (d / "statement.txt").is_file())


def batch_run(
    problems_dir: str | Path,
    workspace_root: str | Path,
    config: RunConfig,
    provider=None,
    resume: bool = False,
) -> dict:
    """Run every problem under problems_dir with one worker per problem.

    Without resume the workspace must be fresh; with resume, problems already
    at rest are left untouched and interrupted ones continue from their last
    persisted stage. The returned summary is derived purely from final states,
    so an interrupted-then-resumed batch reports exactly what an uninterrupted
    one would.
    """
    dirs = discover_problems(problems_dir)
    root = Path(workspace_root)
    if not resume:
        existing = sorted(p.parent.name for p in root.glob("*/state.json"))
        if existing:
            raise InputError(
                f"workspace {root} already holds state for {existing}; "
                "pass resume to continue it"
            )
    if not dirs:
        log.warning("no problems found under %s", problems_dir)
        summary = summarize(root)
        summary["warnings"] = ["no problems found"]
        return summary
    provider = provider or provider_from_config(config)
    errors: dict[str, str] = {}

    def work(problem_dir: Path) -> None:
        try:
            run_problem(problem_dir, root, config, provider)
        except Exception as exc:
            log.exception("problem %s errored", problem_dir.name)
            errors[problem_dir.name] = str(exc)

    workers = max(1, config.parallelism)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(work, dirs))
    summary = summarize(root)
    if errors:
        summary["errors"] = dict(sorted(errors.items()))
    return summary


def summarize(workspace_root: str | Path) -> dict:
    """Aggregate final states into the acceptance-count summary.

    Deterministic over the stored states only (no timestamps), so two runs
    that end in the same states summarize identically.
    """
    root = Path(workspace_root)
    accepted_by_trial: Counter = Counter()
    ticket_triggers: Counter = Counter()
    failure_reasons: Counter = Counter()
    awaiting_triggers: Counter = Counter()
    per_problem: dict[str, dict] = {}
    accepted = awaiting = failed = in_progress = 0

    for state_path in sorted(root.glob("*/state.json")):
        data = json.loads(state_path.read_text(encoding="utf-8"))
        state = PipelineState.from_dict(data)
        pid = state_path.parent.name
        per_problem[pid] = {
            "stage": state.stage.value,
            "llm_trial": state.llm_trial,
            "sim_trial": state.sim_trial,
            "tickets": len(state.tickets),
        }
        for ticket in state.tickets:
            ticket_triggers[ticket.trigger.value] += 1
        if state.stage is Stage.ACCEPTED:
            accepted += 1
            accepted_by_trial[state.llm_trial] += 1
        elif state.stage is Stage.FAILED:
            failed += 1
            failure_reasons[state.failure_reason or "unspecified"] += 1
        elif state.stage is Stage.AWAIT_REVIEW:
            awaiting += 1
            open_ticket = state.open_ticket
            awaiting_triggers[open_ticket.trigger.value if open_ticket else "none"] += 1
        else:
            in_progress += 1

    running_total = 0
    cumulative: dict[str, int] = {}
    for trial in range(1, 5):
        running_total += accepted_by_trial.get(trial, 0)
        cumulative[str(trial)] = running_total

    return {
        "problems": len(per_problem),
        "accepted": accepted,
        "awaiting_review": awaiting,
        "failed": failed,
        "in_progress": in_progress,
        "accepted_by_trial": {str(k): v for k, v in sorted(accepted_by_trial.items())},
        "accepted_cumulative": cumulative,
        "tickets": sum(ticket_triggers.values()),
        "ticket_triggers": dict(sorted(ticket_triggers.items())),
        "awaiting_triggers": dict(sorted(awaiting_triggers.items())),
        "failure_reasons": dict(sorted(failure_reasons.items())),
        "per_problem": per_problem,
    }
