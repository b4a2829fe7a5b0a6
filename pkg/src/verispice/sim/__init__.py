"""ngspice batch invocation and output-table parsing."""

from .output import AxisKind, SimulationSeries, parse_output, series_from_json, series_to_json
from .runner import SimOutcome, SimStatus, run

__all__ = [
    "AxisKind",
    "SimOutcome",
    "SimStatus",
    "SimulationSeries",
    "parse_output",
    "run",
    "series_from_json",
    "series_to_json",
]
