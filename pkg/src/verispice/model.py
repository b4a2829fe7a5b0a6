"""Domain model: problems, descriptions, detections, trial records.

Every type serializes to plain dicts (``to_dict``/``from_dict``) so pipeline
state survives a process restart byte-for-byte.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import InputError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class Category(Enum):
    CIRCUIT_ANALYSIS = "CircuitAnalysis"
    CIRCUIT_SYNTHESIS = "CircuitSynthesis"
    NETWORK_FUNCTION_ANALYSIS = "NetworkFunctionAnalysis"
    NETWORK_FUNCTION_SYNTHESIS = "NetworkFunctionSynthesis"
    NO_DIAGRAM = "NoDiagram"
    NOT_SIMULABLE = "NotSimulable"

    @property
    def simulable(self) -> bool:
        return self not in (Category.NO_DIAGRAM, Category.NOT_SIMULABLE)


class TargetKind(Enum):
    TIME_SERIES = "time-series"
    NETWORK_FUNCTION = "network-function"
    SCALAR = "scalar"


@dataclass(frozen=True)
class Target:
    """One quantity the answer must state and the simulation must print."""

    name: str
    kind: TargetKind

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind.value}

    @staticmethod
    def from_dict(d: dict) -> "Target":
        return Target(d["name"], TargetKind(d["kind"]))

    @staticmethod
    def parse(text: str) -> "Target":
        """Parse the ``name:kind`` shorthand used in meta files."""
        name, sep, kind = text.partition(":")
        name = name.strip()
        if not sep or not name:
            raise InputError(f"bad target {text!r}, expected name:kind")
        try:
            return Target(name, TargetKind(kind.strip()))
        except ValueError:
            kinds = ", ".join(k.value for k in TargetKind)
            raise InputError(f"bad target kind in {text!r}, expected one of {kinds}") from None


@dataclass
class Problem:
    """A loaded problem directory."""

    id: str
    statement: str
    category: Category
    diagram_path: Path | None = None
    targets: list[Target] = field(default_factory=list)
    not_simulable_reason: str | None = None
    overrides: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "statement": self.statement,
            "category": self.category.value,
            "diagram_path": str(self.diagram_path) if self.diagram_path else None,
            "targets": [t.to_dict() for t in self.targets],
            "not_simulable_reason": self.not_simulable_reason,
            "overrides": dict(self.overrides),
        }

    @staticmethod
    def from_dict(d: dict) -> "Problem":
        return Problem(
            id=d["id"],
            statement=d["statement"],
            category=Category(d["category"]),
            diagram_path=Path(d["diagram_path"]) if d.get("diagram_path") else None,
            targets=[Target.from_dict(t) for t in d.get("targets", [])],
            not_simulable_reason=d.get("not_simulable_reason"),
            overrides=dict(d.get("overrides", {})),
        )


DIAGRAM_NAMES = ("diagram.png", "diagram.jpg")


def load_problem(directory: str | Path) -> Problem:
    """Load a problem directory: statement.txt, optional diagram, optional meta.toml.

    The category defaults from diagram presence and must stay consistent
    with it: NoDiagram if and only if no diagram file exists.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"not a problem directory: {directory}")

    statement_path = directory / "statement.txt"
    if not statement_path.is_file():
        raise InputError(f"{directory.name}: missing statement.txt")
    statement = statement_path.read_text(encoding="utf-8")
    if not statement.strip():
        raise InputError(f"{directory.name}: statement.txt is empty")

    diagrams = [directory / n for n in DIAGRAM_NAMES if (directory / n).is_file()]
    if len(diagrams) > 1:
        raise InputError(f"{directory.name}: both diagram.png and diagram.jpg present")
    diagram = diagrams[0] if diagrams else None

    meta: dict = {}
    meta_path = directory / "meta.toml"
    if meta_path.is_file():
        try:
            meta = tomllib.loads(meta_path.read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise InputError(f"{directory.name}: bad meta.toml: {exc}") from exc

    if "category" in meta:
        try:
            category = Category(meta["category"])
        except ValueError:
            names = ", ".join(c.value for c in Category)
            raise InputError(
                f"{directory.name}: unknown category {meta['category']!r}, expected one of {names}"
            ) from None
    else:
        category = Category.CIRCUIT_ANALYSIS if diagram else Category.NO_DIAGRAM

    if (category is Category.NO_DIAGRAM) != (diagram is None):
        raise InputError(
            f"{directory.name}: category {category.value} inconsistent with diagram "
            f"{'present' if diagram else 'absent'}"
        )

    reason = meta.get("reason")
    if category is Category.NOT_SIMULABLE and not reason:
        raise InputError(f"{directory.name}: NotSimulable requires a reason in meta.toml")

    raw_targets = meta.get("targets", [])
    if not isinstance(raw_targets, list):
        raise InputError(f"{directory.name}: targets must be a list")
    targets = []
    for raw in raw_targets:
        if isinstance(raw, str):
            targets.append(Target.parse(raw))
        elif isinstance(raw, dict) and "name" in raw and "kind" in raw:
            targets.append(Target.parse(f"{raw['name']}:{raw['kind']}"))
        else:
            raise InputError(f"{directory.name}: bad target entry {raw!r}")
    if category.simulable and not targets:
        raise InputError(f"{directory.name}: simulable categories require a targets list in meta.toml")

    overrides = meta.get("overrides", {})
    if not isinstance(overrides, dict):
        raise InputError(f"{directory.name}: overrides must be a table")

    return Problem(
        id=directory.name,
        statement=statement,
        category=category,
        diagram_path=diagram,
        targets=targets,
        not_simulable_reason=reason,
        overrides=overrides,
    )


class Provenance(Enum):
    RECOGNIZED = "Recognized"
    POLARITY_CORRECTED = "PolarityCorrected"
    HUMAN_CORRECTED = "HumanCorrected"


@dataclass(frozen=True)
class CircuitDescription:
    """Textual circuit description, versioned across correction rounds."""

    text: str
    version: int
    provenance: Provenance

    def __post_init__(self):
        if self.version not in (1, 2, 3):
            raise InputError(f"description version must be 1..3, got {self.version}")

    def to_dict(self) -> dict:
        return {"text": self.text, "version": self.version, "provenance": self.provenance.value}

    @staticmethod
    def from_dict(d: dict) -> "CircuitDescription":
        return CircuitDescription(d["text"], d["version"], Provenance(d["provenance"]))


class SourceKind(Enum):
    DEPENDENT = "DependentSource"
    INDEPENDENT_VOLTAGE = "IndependentVoltage"
    INDEPENDENT_CURRENT = "IndependentCurrent"


class DetectionOrigin(Enum):
    RULE_BASED = "RuleBased"
    EXTERNAL_DETECTOR = "ExternalDetector"


@dataclass(frozen=True)
class DetectionBox:
    """One detected source symbol, pixel coordinates x1 < x2, y1 < y2."""

    kind: SourceKind
    box: tuple[int, int, int, int]
    origin: DetectionOrigin
    confidence: float = 1.0

    def __post_init__(self):
        x1, y1, x2, y2 = self.box
        if not (x2 > x1 and y2 > y1):
            raise InputError(f"degenerate detection box {self.box}")
        if not 0.0 <= self.confidence <= 1.0:
            raise InputError(f"confidence {self.confidence} outside [0, 1]")
        if self.origin is DetectionOrigin.RULE_BASED and self.confidence != 1.0:
            raise InputError("rule-based detections carry confidence 1.0")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "box": list(self.box),
            "origin": self.origin.value,
            "confidence": self.confidence,
        }

    @staticmethod
    def from_dict(d: dict) -> "DetectionBox":
        return DetectionBox(
            SourceKind(d["kind"]),
            tuple(d["box"]),
            DetectionOrigin(d["origin"]),
            d.get("confidence", 1.0),
        )


class Outcome(Enum):
    MATCH = "Match"
    MISMATCH = "Mismatch"
    SIM_FAILURE = "SimFailure"
    AWAITING_HUMAN = "AwaitingHuman"
    ACCEPTED = "Accepted"
    FAILED = "Failed"


TEMPERATURE_SCHEDULE = {1: 0.0, 2: 0.2, 3: 0.2, 4: 0.2}


@dataclass
class TrialRecord:
    """Outcome of one solve/simulate round."""

    llm_trial: int
    sim_trial: int
    temperature: float
    outcome: Outcome
    human_artifact: str | None = None

    def __post_init__(self):
        if not 1 <= self.llm_trial <= 4:
            raise InputError(f"llm_trial must be 1..4, got {self.llm_trial}")
        if not 1 <= self.sim_trial <= 3:
            raise InputError(f"sim_trial must be 1..3, got {self.sim_trial}")
        if self.temperature < 0:
            raise InputError(f"temperature must be >= 0, got {self.temperature}")
        if self.llm_trial == 2 and self.temperature != 0.2:
            raise InputError("llm_trial 2 runs at temperature 0.2")
        if self.llm_trial >= 3 and not self.human_artifact:
            raise InputError(f"llm_trial {self.llm_trial} requires an attached human correction")

    def to_dict(self) -> dict:
        return {
            "llm_trial": self.llm_trial,
            "sim_trial": self.sim_trial,
            "temperature": self.temperature,
            "outcome": self.outcome.value,
            "human_artifact": self.human_artifact,
        }

    @staticmethod
    def from_dict(d: dict) -> "TrialRecord":
        return TrialRecord(
            d["llm_trial"],
            d["sim_trial"],
            d["temperature"],
            Outcome(d["outcome"]),
            d.get("human_artifact"),
        )
