"""Parsing of ngspice batch-mode print tables into numeric series."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import ParseError

__all__ = ["AxisKind", "SimulationSeries", "parse_output", "series_from_json", "series_to_json"]


class AxisKind(str, Enum):
    TIME = "time"
    FREQUENCY = "frequency"


_HEADER_RE = re.compile(r"^Index\s+(time|frequency)\s+(\S.*?)\s*$", re.IGNORECASE)
_RULE_RE = re.compile(r"^-{5,}\s*$")
_DECLARED_RE = re.compile(r"^No\. of Data Rows\s*:\s*(\d+)\s*$")


@dataclass(eq=False)
class SimulationSeries:
    """One analysis result: a strictly increasing axis plus named value vectors."""

    axis_kind: AxisKind
    axis: np.ndarray
    variables: dict[str, np.ndarray]
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.axis = np.asarray(self.axis, dtype=float)
        if self.axis.ndim != 1:
            raise ParseError("axis must be one-dimensional")
        n = len(self.axis)
        if self.axis_kind is AxisKind.TIME and n < 2:
            raise ParseError("transient series needs at least 2 samples")
        if n == 0:
            raise ParseError("series has no samples")
        if not self.variables:
            raise ParseError("series has no variables")
        if np.any(np.diff(self.axis) <= 0):
            raise ParseError(f"{self.axis_kind.value} axis is not strictly increasing")
        clean = {}
        for name, values in self.variables.items():
            values = np.asarray(values, dtype=float)
            if len(values) != n:
                raise ParseError(f"variable {name} has {len(values)} samples, axis has {n}")
            if not np.all(np.isfinite(values)):
                raise ParseError(f"variable {name} contains non-finite values")
            clean[name] = values
        if not np.all(np.isfinite(self.axis)):
            raise ParseError("axis contains non-finite values")
        self.variables = clean

    def __len__(self) -> int:
        return len(self.axis)

    def variable(self, name: str) -> np.ndarray:
        """Look up a printed vector, case-insensitively."""
        lowered = name.lower()
        for key, values in self.variables.items():
            if key.lower() == lowered:
                return values
        raise KeyError(name)


class _Table:
    def __init__(self, axis_name: str, names: tuple[str, ...], declared: int | None, line: int):
        self.axis_name = axis_name
        self.names = names
        self.declared = declared
        self.line = line
        self.axis: list[float] = []
        self.columns: list[list[float]] = [[] for _ in names]

    @property
    def signature(self) -> tuple[str, tuple[str, ...]]:
        return (self.axis_name, self.names)


def _parse_row(line: str, lineno: int, width: int) -> tuple[float, list[float]]:
    tokens = line.split()
    try:
        values = [float(t) for t in tokens[1:]]
    except ValueError as exc:
        raise ParseError(f"line {lineno}: malformed data row: {line.strip()!r}") from exc
    if len(values) != width + 1:
        raise ParseError(
            f"line {lineno}: expected {width + 1} values after the index, got {len(values)}"
        )
    return values[0], values[1:]


def parse_output(stdout: str) -> SimulationSeries:
    """Extract the print table(s) from batch-run stdout as one series.

    Page-broken segments (repeated identical headers) are concatenated.
    Distinct tables are merged when they share the axis samples exactly.
    A declared row count that disagrees with the parsed rows is recorded
    as a warning; a missing table raises ParseError.
    """
    tables: list[_Table] = []
    current: _Table | None = None
    pending_declared: int | None = None
    after_header = False

    for lineno, line in enumerate(stdout.splitlines(), start=1):
        declared = _DECLARED_RE.match(line)
        if declared:
            pending_declared = int(declared.group(1))
            current = None
            continue
        header = _HEADER_RE.match(line)
        if header:
            axis_name = header.group(1).lower()
            names = tuple(header.group(2).split())
            for table in tables:
                if table.signature == (axis_name, names):
                    current = table
                    break
            else:
                current = _Table(axis_name, names, pending_declared, lineno)
                tables.append(current)
                pending_declared = None
            after_header = True
            continue
        if current is None:
            continue
        if not line.strip():
            continue
        if _RULE_RE.match(line):
            if not after_header:
                current = None
            continue
        after_header = False
        first = line.split(None, 1)[0] if line.split() else ""
        if first.isdigit():
            axis_value, values = _parse_row(line, lineno, len(current.names))
            current.axis.append(axis_value)
            for column, value in zip(current.columns, values):
                column.append(value)
        else:
            current = None

    if not tables:
        raise ParseError("no print table found in simulator output")

    warnings = []
    for table in tables:
        if table.declared is not None and table.declared != len(table.axis):
            warnings.append(
                f"declared {table.declared} data rows, parsed {len(table.axis)}"
            )

    base = tables[0]
    axis = np.asarray(base.axis, dtype=float)
    variables: dict[str, list[float]] = {}
    for table in tables:
        if table.axis_name != base.axis_name:
            raise ParseError(
                f"line {table.line}: table axis {table.axis_name!r} conflicts with {base.axis_name!r}"
            )
        if table is not base and not np.array_equal(np.asarray(table.axis), axis):
            raise ParseError(f"line {table.line}: table axis samples differ; cannot merge")
        for name, column in zip(table.names, table.columns):
            if name in variables:
                raise ParseError(f"line {table.line}: duplicate variable {name!r}")
            variables[name] = column

    return SimulationSeries(AxisKind(base.axis_name), axis, variables, warnings=warnings)


def series_to_json(series: SimulationSeries) -> str:
    """Serialize as {"time"|"frequency": [...], "<var>": [...]}, lossless for float64."""
    payload: dict[str, list[float]] = {series.axis_kind.value: series.axis.tolist()}
    for name, values in series.variables.items():
        payload[name] = values.tolist()
    return json.dumps(payload)


def series_from_json(text: str) -> SimulationSeries:
    payload = json.loads(text)
    axis_kind = None
    for kind in AxisKind:
        if kind.value in payload:
            axis_kind = kind
            break
    if axis_kind is None:
        raise ParseError("series JSON lacks a time or frequency axis")
    axis = payload.pop(axis_kind.value)
    if not payload:
        raise ParseError("series JSON has no variables")
    return SimulationSeries(axis_kind, axis, {k: np.asarray(v, float) for k, v in payload.items()})
