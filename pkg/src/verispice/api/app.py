"""HTTP facade over the review queue: tickets, resolutions, artifacts.

Every write goes through pipeline operations; no endpoint touches workspace
files directly. Resolutions are serialized per problem, and the retrial a
resolution schedules runs on a background thread so the request returns as
soon as the decision is recorded.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from ..config import RunConfig
from ..errors import InputError, StateError, StorageError
from ..llm.provider import provider_from_config
from ..model import load_problem
from ..pipeline.runner import ProblemRunner, summarize
from ..pipeline.state import RESTING_STAGES, PipelineState
from ..pipeline.tickets import ResolutionKind, ReviewTicket
from ..workspace import Workspace

# kinds a reviewer may post to the resolution endpoint; the expert netlist
# patch rides its own opt-in endpoint instead
REVIEWER_KINDS = {
    kind.value: kind
    for kind in (
        ResolutionKind.CIRCUIT_CORRECTION,
        ResolutionKind.SOLUTION_FEEDBACK,
        ResolutionKind.ACCEPT,
        ResolutionKind.REJECT,
    )
}

_CONTENT_TYPES = {
    ".png": "image/png",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".json": "application/json",
    ".jsonl": "application/x-ndjson",
    ".txt": "text/plain; charset=utf-8",
    ".cir": "text/plain; charset=utf-8",
}


def _content_type(name: str) -> str:
    suffix = name[name.rfind(".") :].lower() if "." in name else ""
    return _CONTENT_TYPES.get(suffix, "application/octet-stream")


class ResolutionBody(BaseModel):
    kind: str
    text: str = ""


class NetlistPatchBody(BaseModel):
    text: str


class ReviewService:
    """Ticket queue over one workspace root.

    Reads rescan the persisted states on every call so the queue always
    reflects what the pipeline last wrote, including writes from a batch
    runner sharing the workspace.
    """

    def __init__(
        self,
        problems_dir: str | Path,
        workspace_root: str | Path,
        config: RunConfig | None = None,
        provider=None,
        allow_netlist_patch: bool = False,
        access_token: str = "",
    ):
        self.problems_dir = Path(problems_dir)
        self.root = Path(workspace_root)
        self.config = config or RunConfig()
        self.allow_netlist_patch = allow_netlist_patch
        self.access_token = access_token
        self._provider = provider
        self._guard = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        self._retrials: dict[str, threading.Thread] = {}

    @property
    def provider(self):
        # built on first resolution so a read-only queue needs no provider config
        if self._provider is None:
            self._provider = provider_from_config(self.config)
        return self._provider

    def _lock_for(self, problem_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(problem_id, threading.Lock())

    def retrial_running(self, problem_id: str) -> bool:
        with self._guard:
            thread = self._retrials.get(problem_id)
            return thread is not None and thread.is_alive()

    def wait_idle(self, timeout: float = 30.0) -> None:
        """Join every scheduled retrial; lets tests assert final states."""
        with self._guard:
            threads = list(self._retrials.values())
        for thread in threads:
            thread.join(timeout)

    # -- reading ---------------------------------------------------------

    def state_of(self, problem_id: str) -> PipelineState | None:
        path = self.root / problem_id / "state.json"
        if not path.is_file():
            return None
        return PipelineState.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def _states(self) -> dict[str, PipelineState]:
        out = {}
        for path in sorted(self.root.glob("*/state.json")):
            out[path.parent.name] = PipelineState.from_dict(
                json.loads(path.read_text(encoding="utf-8"))
            )
        return out

    def trial_status(self, problem_id: str, state: PipelineState | None = None) -> dict:
        state = state or self.state_of(problem_id)
        if state is None:
            raise KeyError(problem_id)
        return {
            "stage": state.stage.value,
            "llm_trial": state.llm_trial,
            "sim_trial": state.sim_trial,
            "retrial_running": self.retrial_running(problem_id),
        }

    def _view(self, problem_id: str, ticket: ReviewTicket, state: PipelineState) -> dict:
        return {
            "id": ticket.id,
            "problem_id": problem_id,
            "trigger": ticket.trigger.value,
            "created_at": ticket.created_at,
            "status": ticket.status,
            "review_request": ticket.review_request,
            "artifacts": [
                {"name": name, "url": f"/problems/{problem_id}/artifacts/{name}"}
                for name in ticket.artifacts
            ],
            "resolution": ticket.resolution.to_dict() if ticket.resolution else None,
            "trial_status": self.trial_status(problem_id, state),
        }

    def tickets(self, status: str | None = None) -> list[dict]:
        views = [
            self._view(pid, ticket, state)
            for pid, state in self._states().items()
            for ticket in state.tickets
            if status is None or ticket.status == status
        ]
        views.sort(key=lambda v: (v["created_at"], v["id"]))
        return views

    def ticket(self, ticket_id: str) -> dict | None:
        for pid, state in self._states().items():
            ticket = state.ticket_by_id(ticket_id)
            if ticket is not None:
                return self._view(pid, ticket, state)
        return None

    def problems(self) -> list[dict]:
        return [
            {
                "id": pid,
                "stage": state.stage.value,
                "llm_trial": state.llm_trial,
                "sim_trial": state.sim_trial,
                "tickets": len(state.tickets),
                "open_tickets": sum(1 for t in state.tickets if t.status == "open"),
            }
            for pid, state in self._states().items()
        ]

    # -- writing ---------------------------------------------------------

    def _runner(self, problem_id: str) -> ProblemRunner:
        problem = load_problem(self.problems_dir / problem_id)
        workspace = Workspace(self.root, problem_id)
        return ProblemRunner(problem, workspace, self.config, self.provider)

    def _problem_for_ticket(self, ticket_id: str) -> str:
        for pid, state in self._states().items():
            if state.ticket_by_id(ticket_id) is not None:
                return pid
        raise KeyError(ticket_id)

    def resolve(self, ticket_id: str, kind: ResolutionKind, text: str = "") -> dict:
        """Record one resolution; concurrent posts on a ticket leave one winner."""
        problem_id = self._problem_for_ticket(ticket_id)
        with self._lock_for(problem_id):
            runner = self._runner(problem_id)
            state = runner.apply_resolution(ticket_id, kind, text)
            scheduled = runner.state.stage not in RESTING_STAGES
            if scheduled:
                self._start_retrial(problem_id, runner)
        return {
            "ticket_id": ticket_id,
            "problem_id": problem_id,
            "kind": kind.value,
            "stage": state["stage"],
            "llm_trial": state["llm_trial"],
            "sim_trial": state["sim_trial"],
            "trial_status": {
                "stage": state["stage"],
                "llm_trial": state["llm_trial"],
                "sim_trial": state["sim_trial"],
                "retrial_running": scheduled,
            },
        }

    def _start_retrial(self, problem_id: str, runner: ProblemRunner) -> None:
        def work():
            lock = self._lock_for(problem_id)
            with lock:
                runner.run()

        thread = threading.Thread(target=work, name=f"retrial-{problem_id}", daemon=True)
        with self._guard:
            self._retrials[problem_id] = thread
        thread.start()


def create_app(service: ReviewService) -> FastAPI:
    app = FastAPI(title="circuit review queue", docs_url=None, redoc_url=None)

    if service.access_token:

        @app.middleware("http")
        async def require_token(request, call_next):
            expected = f"Bearer {service.access_token}"
            if request.headers.get("authorization") != expected:
                return JSONResponse(
                    {"detail": "missing or invalid access token"}, status_code=401
                )
            return await call_next(request)

    @app.exception_handler(InputError)
    async def _input_error(request, exc):
        return JSONResponse({"detail": str(exc)}, status_code=422)

    @app.exception_handler(StateError)
    async def _state_error(request, exc):
        return JSONResponse({"detail": str(exc)}, status_code=409)

    @app.get("/tickets")
    def list_tickets(status: str | None = None):
        if status not in (None, "", "open", "closed"):
            raise HTTPException(400, f"unknown status filter {status!r}")
        return service.tickets(status or None)

    @app.get("/tickets/{ticket_id}")
    def get_ticket(ticket_id: str):
        view = service.ticket(ticket_id)
        if view is None:
            raise HTTPException(404, f"unknown ticket {ticket_id!r}")
        return view

    @app.post("/tickets/{ticket_id}/resolution")
    def post_resolution(ticket_id: str, body: ResolutionBody):
        kind = REVIEWER_KINDS.get(body.kind)
        if kind is None:
            raise HTTPException(422, f"unknown resolution kind {body.kind!r}")
        try:
            return service.resolve(ticket_id, kind, body.text)
        except KeyError:
            raise HTTPException(404, f"unknown ticket {ticket_id!r}")

    @app.get("/problems")
    def list_problems():
        return service.problems()

    @app.get("/problems/{problem_id}/state")
    def problem_state(problem_id: str):
        state = service.state_of(problem_id)
        if state is None:
            raise HTTPException(404, f"unknown problem {problem_id!r}")
        data = state.to_dict()
        data["trial_status"] = service.trial_status(problem_id, state)
        return data

    # {name:path} so an encoded ../ still reaches the guard instead of a bare 404
    @app.get("/problems/{problem_id}/artifacts/{name:path}")
    def artifact(problem_id: str, name: str):
        for part in (problem_id, name):
            if "/" in part or "\\" in part or ".." in part:
                raise HTTPException(400, "path components may not traverse directories")
        if service.state_of(problem_id) is None:
            raise HTTPException(404, f"unknown problem {problem_id!r}")
        workspace = Workspace(service.root, problem_id)
        try:
            data = workspace.read(name)
        except StorageError:
            raise HTTPException(404, f"no artifact named {name!r}")
        return Response(content=data, media_type=_content_type(name))

    @app.post("/problems/{problem_id}/netlist")
    def patch_netlist(problem_id: str, body: NetlistPatchBody):
        if not service.allow_netlist_patch:
            raise HTTPException(
                403, "netlist patching is disabled; start the service with it enabled"
            )
        state = service.state_of(problem_id)
        if state is None:
            raise HTTPException(404, f"unknown problem {problem_id!r}")
        ticket = state.open_ticket
        if ticket is None:
            raise StateError(f"problem {problem_id} has no open ticket")
        return service.resolve(ticket.id, ResolutionKind.NETLIST_PATCH, body.text)

    @app.get("/summary")
    def summary():
        return summarize(service.root)

    return app
