"""Batch-mode ngspice invocation and outcome classification."""

from __future__ import annotations

import re
import shutil
import subprocess
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from ..errors import ConfigError, InputError, ParseError
from .output import SimulationSeries, parse_output

__all__ = ["SimOutcome", "SimStatus", "run"]

_ERROR_LINE_RE = re.compile(r"\berror\b", re.IGNORECASE)


class SimStatus(str, Enum):
    OK = "ok"
    EXEC_FAILURE = "exec_failure"
    NO_DATA = "no_data"


@dataclass(eq=False)
class SimOutcome:
    status: SimStatus
    series: SimulationSeries | None
    stdout: str
    stderr: str
    exit_code: int | None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status is SimStatus.OK


def _error_lines(text: str) -> list[str]:
    return [line.strip() for line in text.splitlines() if _ERROR_LINE_RE.search(line)]


def run(netlist_path: str | Path, ngspice: str = "ngspice", timeout: float = 60.0) -> SimOutcome:
    """Run `ngspice -b <file>` and classify the result.

    Nonzero exit or Error lines on stderr give ExecFailure; a clean run
    whose stdout holds no parsable table gives NoData. A missing binary
    raises ConfigError, a missing netlist raises InputError.
    """
    path = Path(netlist_path)
    if not path.is_file():
        raise InputError(f"netlist not found: {path}")
    binary = shutil.which(ngspice)
    if binary is None:
        raise ConfigError(f"ngspice executable not found: {ngspice!r}")

    try:
        proc = subprocess.run(
            [binary, "-b", str(path)],
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired as exc:
        stdout = exc.stdout.decode() if isinstance(exc.stdout, bytes) else (exc.stdout or "")
        stderr = exc.stderr.decode() if isinstance(exc.stderr, bytes) else (exc.stderr or "")
        return SimOutcome(
            SimStatus.EXEC_FAILURE, None, stdout, stderr, None,
            detail=f"timeout after {timeout:g}s",
        )

    errors = _error_lines(proc.stderr)
    if proc.returncode != 0 or errors:
        detail = "; ".join(errors[:5]) or f"exit code {proc.returncode}"
        return SimOutcome(
            SimStatus.EXEC_FAILURE, None, proc.stdout, proc.stderr, proc.returncode, detail
        )

    try:
        series = parse_output(proc.stdout)
    except ParseError as exc:
        return SimOutcome(
            SimStatus.NO_DATA, None, proc.stdout, proc.stderr, proc.returncode, detail=str(exc)
        )
    return SimOutcome(SimStatus.OK, series, proc.stdout, proc.stderr, proc.returncode)
