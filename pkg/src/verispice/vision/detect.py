"""Source symbol detection.

Dependent sources (rhombus symbols) come from a rule-based geometric
pipeline: edge map, outer contours, polygon approximation at 1% of the
contour perimeter, then convex 4-gon + near-equal-side filtering with
centroid deduplication. Independent sources come from a pluggable external
detector process or HTTP endpoint.
"""

from __future__ import annotations

import json
import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

import httpx
import numpy as np

from ..errors import DetectorError, ParseError
from ..model import DetectionBox, DetectionOrigin, SourceKind
from . import contours as ct
from . import edges as eg
from .raster import clamp_box, load_gray

APPROX_EPS_FRACTION = 0.01
SIDE_RATIO_LIMIT = 1.1
DEDUP_DISTANCE = 10.0
BOX_MARGIN = 10
DEFAULT_CONFIDENCE_THRESHOLD = 0.25


@dataclass(frozen=True)
class QuadCandidate:
    """A convex quadrilateral pulled out of the contour stage."""

    vertices: tuple[tuple[float, float], ...]
    centroid: tuple[float, float]
    sides: tuple[float, float, float, float]

    @staticmethod
    def from_vertices(verts: np.ndarray) -> "QuadCandidate":
        sides = tuple(
            float(np.hypot(*(verts[(i + 1) % 4] - verts[i]))) for i in range(4)
        )
        if min(sides) <= 0.0:
            raise ValueError(f"degenerate quad sides {sides}")
        cx, cy = verts.mean(axis=0)
        return QuadCandidate(
            vertices=tuple((float(x), float(y)) for x, y in verts),
            centroid=(float(cx), float(cy)),
            sides=sides,
        )

    @property
    def side_ratio(self) -> float:
        return max(self.sides) / min(self.sides)


def quad_candidates(edge_map: np.ndarray) -> list[QuadCandidate]:
    """Convex 4-gons from the contour + approximation stage, unfiltered."""
    out = []
    for contour in ct.outer_contours(edge_map):
        eps = APPROX_EPS_FRACTION * ct.perimeter(contour, closed=True)
        poly = ct.approx_polygon(contour, eps)
        if len(poly) != 4 or not ct.is_convex(poly):
            continue
        try:
            out.append(QuadCandidate.from_vertices(poly))
        except ValueError:
            continue
    return out


def filter_rhombi(quads: list[QuadCandidate], limit: float = SIDE_RATIO_LIMIT
                  ) -> list[QuadCandidate]:
    """Keep quads whose longest/shortest side ratio stays under the limit."""
    return [q for q in quads if q.side_ratio < limit]


def dedup_by_centroid(quads: list[QuadCandidate], min_distance: float = DEDUP_DISTANCE
                      ) -> list[QuadCandidate]:
    """Drop quads whose centroid sits within min_distance of an earlier one."""
    kept: list[QuadCandidate] = []
    for q in quads:
        if all(
            np.hypot(q.centroid[0] - k.centroid[0], q.centroid[1] - k.centroid[1])
            >= min_distance
            for k in kept
        ):
            kept.append(q)
    return kept


def boxes_from_quads(quads: list[QuadCandidate], shape: tuple[int, int],
                     margin: int = BOX_MARGIN) -> list[DetectionBox]:
    boxes = []
    for q in quads:
        xs = [v[0] for v in q.vertices]
        ys = [v[1] for v in q.vertices]
        raw = (
            int(np.floor(min(xs))),
            int(np.floor(min(ys))),
            int(np.ceil(max(xs))),
            int(np.ceil(max(ys))),
        )
        boxes.append(
            DetectionBox(
                kind=SourceKind.DEPENDENT,
                box=clamp_box(raw, shape, margin),
                origin=DetectionOrigin.RULE_BASED,
                confidence=1.0,
            )
        )
    return boxes


def detect_dependent_sources(image: np.ndarray | bytes | str | Path) -> list[DetectionBox]:
    """Find rhombus-shaped dependent source symbols in a schematic image."""
    gray = image if isinstance(image, np.ndarray) else load_gray(image)
    edge_map = eg.canny(gray)
    quads = dedup_by_centroid(filter_rhombi(quad_candidates(edge_map)))
    return boxes_from_quads(quads, gray.shape)


# -- external detector ------------------------------------------------------

# Detector class labels mapped onto source kinds; non-source classes are
# dropped. Matching is case-insensitive on the substrings below.
_CLASS_SUBSTRINGS = (
    ("voltage source", SourceKind.INDEPENDENT_VOLTAGE),
    ("current source", SourceKind.INDEPENDENT_CURRENT),
)


def classify_label(label: str) -> SourceKind | None:
    low = label.lower()
    for fragment, kind in _CLASS_SUBSTRINGS:
        if fragment in low:
            return kind
    return None


@dataclass
class ExternalDetectorClient:
    """Client for an out-of-process independent-source detector.

    Exactly one of ``command`` (argv prefix; the image path is appended) or
    ``url`` (POST of the raw image bytes, JSON detections back) must be set.
    """

    command: list[str] = field(default_factory=list)
    url: str = ""
    threshold: float = DEFAULT_CONFIDENCE_THRESHOLD
    timeout: float = 30.0

    def __post_init__(self):
        if bool(self.command) == bool(self.url):
            raise DetectorError("configure exactly one of detector command or url")

    def detect(self, image_path: str | Path) -> list[DetectionBox]:
        image_path = Path(image_path)
        shape = load_gray(image_path).shape
        if self.command:
            records = self._run_command(image_path)
        else:
            records = self._post(image_path.read_bytes())
        boxes = []
        for label, coords, confidence in records:
            if confidence < self.threshold:
                continue
            kind = classify_label(label)
            if kind is None:
                continue
            boxes.append(
                DetectionBox(
                    kind=kind,
                    box=clamp_box(tuple(int(round(c)) for c in coords), shape),
                    origin=DetectionOrigin.EXTERNAL_DETECTOR,
                    confidence=confidence,
                )
            )
        return boxes

    def _run_command(self, image_path: Path) -> list[tuple[str, list[float], float]]:
        if shutil.which(self.command[0]) is None and not Path(self.command[0]).exists():
            raise DetectorError(f"detector command not found: {self.command[0]}")
        try:
            proc = subprocess.run(
                [*self.command, str(image_path)],
                capture_output=True,
                text=True,
                timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise DetectorError(f"detector failed to run: {exc}") from exc
        if proc.returncode != 0:
            raise DetectorError(
                f"detector exited {proc.returncode}: {proc.stderr.strip()[:500]}"
            )
        return [parse_record(line) for line in proc.stdout.splitlines() if line.strip()]

    def _post(self, image_bytes: bytes) -> list[tuple[str, list[float], float]]:
        try:
            resp = httpx.post(
                self.url,
                content=image_bytes,
                headers={"content-type": "application/octet-stream"},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
        except httpx.HTTPError as exc:
            raise DetectorError(f"detector endpoint failed: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"detector endpoint returned non-JSON: {exc}") from exc
        records = []
        for det in payload.get("detections", []):
            label = det.get("class", det.get("label"))
            coords = det.get("box", det.get("bbox"))
            confidence = det.get("confidence")
            if label is None or coords is None or confidence is None or len(coords) != 4:
                raise ParseError(f"malformed detection record: {det!r}")
            records.append((str(label), [float(c) for c in coords], float(confidence)))
        return records


def parse_record(line: str) -> tuple[str, list[float], float]:
    """Parse ``class x1 y1 x2 y2 confidence``; class names may hold spaces."""
    parts = line.split()
    if len(parts) < 6:
        raise ParseError(f"short detection record: {line!r}")
    label = " ".join(parts[:-5])
    try:
        numbers = [float(p) for p in parts[-5:]]
    except ValueError:
        raise ParseError(f"non-numeric fields in detection record: {line!r}") from None
    return label, numbers[:4], numbers[4]
