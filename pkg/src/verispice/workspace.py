"""Per-problem workspace: artifacts, event log, resumable state.

Layout under ``<workspace_root>/<problem_id>/``:

    state.json      latest pipeline state snapshot
    events.jsonl    append-only event log
    index.json      ordered record of every persisted artifact
    artifacts/      the artifact files themselves

Writes are atomic (temp file + rename in the same directory). Persisting an
artifact name that already exists never overwrites: the new blob lands in a
versioned sibling (``name.v2.ext``, ``name.v3.ext``, ...).
"""

from __future__ import annotations

import json
import os
import tempfile
import time
from pathlib import Path

from .errors import StorageError

_SAFE_SEGMENT = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._-")


def _check_name(name: str) -> None:
    if not name or name.startswith(".") or not set(name) <= _SAFE_SEGMENT:
        raise StorageError(f"bad artifact name {name!r}")


def atomic_write(path: Path, data: bytes) -> None:
    """Write bytes so readers never observe a partial file."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise StorageError(f"write failed for {path}: {exc}") from exc


class Workspace:
    """Artifact store for one problem."""

    def __init__(self, root: str | Path, problem_id: str):
        self.problem_id = problem_id
        self.dir = Path(root) / problem_id
        self.artifacts_dir = self.dir / "artifacts"
        self.artifacts_dir.mkdir(parents=True, exist_ok=True)
        self._index_path = self.dir / "index.json"
        self._events_path = self.dir / "events.jsonl"
        self._state_path = self.dir / "state.json"

    # -- artifacts ---------------------------------------------------------

    def persist(self, name: str, data: bytes | str, **meta) -> Path:
        """Store an artifact; returns the actual file path.

        A repeated name gets a versioned sibling, the original stays intact.
        ``meta`` (e.g. llm_trial, sim_trial) is recorded in the index.
        """
        _check_name(name)
        if isinstance(data, str):
            data = data.encode("utf-8")
        actual = self._next_filename(name)
        atomic_write(self.artifacts_dir / actual, data)
        entries = self.index()
        entries.append(
            {
                "name": name,
                "file": actual,
                "bytes": len(data),
                "ts": time.time(),
                **{k: v for k, v in meta.items() if v is not None},
            }
        )
        atomic_write(self._index_path, json.dumps(entries, indent=1).encode("utf-8"))
        return self.artifacts_dir / actual

    def _next_filename(self, name: str) -> str:
        if not (self.artifacts_dir / name).exists():
            return name
        stem, dot, ext = name.rpartition(".")
        if not dot:
            stem, ext = name, ""
        version = 2
        while True:
            candidate = f"{stem}.v{version}" + (f".{ext}" if ext else "")
            if not (self.artifacts_dir / candidate).exists():
                return candidate
            version += 1

    def read(self, name: str) -> bytes:
        """Read the latest version of an artifact by its logical name."""
        for entry in reversed(self.index()):
            if entry["name"] == name:
                return (self.artifacts_dir / entry["file"]).read_bytes()
        raise StorageError(f"no artifact named {name!r} in {self.dir}")

    def read_text(self, name: str) -> str:
        return self.read(name).decode("utf-8")

    def has(self, name: str) -> bool:
        return any(entry["name"] == name for entry in self.index())

    def path_of(self, name: str) -> Path:
        for entry in reversed(self.index()):
            if entry["name"] == name:
                return self.artifacts_dir / entry["file"]
        raise StorageError(f"no artifact named {name!r} in {self.dir}")

    def index(self) -> list[dict]:
        if not self._index_path.exists():
            return []
        try:
            return json.loads(self._index_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise StorageError(f"corrupt index {self._index_path}: {exc}") from exc

    # -- events ------------------------------------------------------------

    def log_event(self, event: str, **fields) -> dict:
        record = {"ts": time.time(), "problem": self.problem_id, "event": event, **fields}
        line = json.dumps(record, sort_keys=True)
        with open(self._events_path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
        return record

    def events(self) -> list[dict]:
        if not self._events_path.exists():
            return []
        out = []
        with open(self._events_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out

    # -- state -------------------------------------------------------------

    def save_state(self, state: dict) -> None:
        atomic_write(self._state_path, json.dumps(state, indent=1, sort_keys=True).encode("utf-8"))

    def load_state(self) -> dict | None:
        if not self._state_path.exists():
            return None
        try:
            return json.loads(self._state_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise StorageError(f"corrupt state {self._state_path}: {exc}") from exc
