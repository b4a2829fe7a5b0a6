"""Pointwise waveform comparison with a global check and a 5%-tail fallback."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError
from ..model import Outcome
from ..sim.output import SimulationSeries

__all__ = [
    "ComparisonReport",
    "TolerancePolicy",
    "align",
    "compare",
    "tail_window",
]


@dataclass(frozen=True)
class TolerancePolicy:
    rel_tolerance: float = 0.02
    abs_tolerance: float = 1e-6

    def __post_init__(self):
        if not (math.isfinite(self.rel_tolerance) and self.rel_tolerance >= 0):
            raise InputError(f"rel_tolerance must be >= 0, got {self.rel_tolerance}")
        if not (math.isfinite(self.abs_tolerance) and self.abs_tolerance >= 0):
            raise InputError(f"abs_tolerance must be >= 0, got {self.abs_tolerance}")


def tail_window(n: int) -> int:
    """Number of points in the final-5% window; at least 1 for any n >= 1."""
    if n < 1:
        raise InputError("series must have at least one point")
    return math.ceil(0.05 * n)


def align(source_axis, target_axis, values) -> np.ndarray:
    """Linearly interpolate values from source_axis onto target_axis.

    Target points outside the source range are clamped to the endpoint
    values.
    """
    source_axis = np.asarray(source_axis, dtype=float)
    values = np.asarray(values, dtype=float)
    if source_axis.ndim != 1 or len(source_axis) < 2:
        raise InputError("source axis needs at least 2 points")
    if len(values) != len(source_axis):
        raise InputError("values and source axis differ in length")
    if np.any(np.diff(source_axis) <= 0):
        raise InputError("source axis must be strictly increasing")
    return np.interp(np.asarray(target_axis, dtype=float), source_axis, values)


@dataclass(eq=False)
class ComparisonReport:
    rel_tolerance: float
    abs_tolerance: float
    deviations: np.ndarray
    point_pass: np.ndarray
    global_pass: bool
    tail_pass: bool
    tail_window: int
    outcome: Outcome
    matched_by: str | None
    max_deviation: float
    max_deviation_index: int
    angular: bool = False
    warnings: list[str] = field(default_factory=list)

    @property
    def is_match(self) -> bool:
        return self.outcome is Outcome.MATCH

    def to_dict(self) -> dict:
        return {
            "rel_tolerance": self.rel_tolerance,
            "abs_tolerance": self.abs_tolerance,
            "deviations": [float(d) for d in self.deviations],
            "point_pass": [bool(p) for p in self.point_pass],
            "global_pass": self.global_pass,
            "tail_pass": self.tail_pass,
            "tail_window": self.tail_window,
            "outcome": self.outcome.value,
            "matched_by": self.matched_by,
            "max_deviation": self.max_deviation,
            "max_deviation_index": self.max_deviation_index,
            "angular": self.angular,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ComparisonReport":
        return cls(
            rel_tolerance=data["rel_tolerance"],
            abs_tolerance=data["abs_tolerance"],
            deviations=np.asarray(data["deviations"], dtype=float),
            point_pass=np.asarray(data["point_pass"], dtype=bool),
            global_pass=data["global_pass"],
            tail_pass=data["tail_pass"],
            tail_window=data["tail_window"],
            outcome=Outcome(data["outcome"]),
            matched_by=data["matched_by"],
            max_deviation=data["max_deviation"],
            max_deviation_index=data["max_deviation_index"],
            angular=data.get("angular", False),
            warnings=list(data.get("warnings", [])),
        )


def _angular_distance_deg(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    delta = np.abs(a - b) % 360.0
    return np.minimum(delta, 360.0 - delta)


def _pick_values(sim, variable: str | None) -> np.ndarray:
    if isinstance(sim, SimulationSeries):
        if variable is not None:
            return sim.variable(variable)
        if len(sim.variables) != 1:
            raise InputError(
                f"series has {len(sim.variables)} variables; name the one to compare"
            )
        return next(iter(sim.variables.values()))
    return np.asarray(sim, dtype=float)


def compare(
    sim,
    expr_values,
    policy: TolerancePolicy | None = None,
    variable: str | None = None,
    angular: bool = False,
) -> ComparisonReport:
    """Decide Match/Mismatch between simulated and derived values.

    A point passes iff |delta| <= a + r*max(|sim|, |expr|). Match iff all
    points pass (Global) or all points in the final-5% window pass
    (TailOnly). With angular=True both vectors are phases in degrees and
    deltas use the shortest angular distance.
    """
    policy = policy or TolerancePolicy()
    sim_values = _pick_values(sim, variable)
    expr_values = np.asarray(expr_values, dtype=float)
    if sim_values.shape != expr_values.shape or sim_values.ndim != 1:
        raise InputError(
            f"vectors must be equal-length 1-D, got {sim_values.shape} and {expr_values.shape}"
        )
    n = len(sim_values)
    if n == 0:
        raise InputError("cannot compare empty vectors")

    if angular:
        deviations = _angular_distance_deg(sim_values, expr_values)
    else:
        deviations = np.abs(sim_values - expr_values)
    scale = np.maximum(np.abs(sim_values), np.abs(expr_values))
    allowed = policy.abs_tolerance + policy.rel_tolerance * scale
    point_pass = deviations <= allowed

    window = tail_window(n)
    global_pass = bool(np.all(point_pass))
    tail_pass = bool(np.all(point_pass[-window:]))
    if global_pass:
        matched_by = "Global"
    elif tail_pass:
        matched_by = "TailOnly"
    else:
        matched_by = None
    outcome = Outcome.MATCH if (global_pass or tail_pass) else Outcome.MISMATCH
    worst = int(np.argmax(deviations))
    return ComparisonReport(
        rel_tolerance=policy.rel_tolerance,
        abs_tolerance=policy.abs_tolerance,
        deviations=deviations,
        point_pass=point_pass,
        global_pass=global_pass,
        tail_pass=tail_pass,
        tail_window=window,
        outcome=outcome,
        matched_by=matched_by,
        max_deviation=float(deviations[worst]),
        max_deviation_index=worst,
        angular=angular,
        warnings=[],
    )
