"""Rule-based rhombus detection and the external detector client."""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import shapes
from verispice.errors import DetectorError, InputError, ParseError
from verispice.model import DetectionOrigin, SourceKind
from verispice.vision import contours as ct
from verispice.vision import edges as eg
from verispice.vision import crop_inset, detect_dependent_sources, encode_png
from verispice.vision.detect import (
    ExternalDetectorClient,
    QuadCandidate,
    boxes_from_quads,
    classify_label,
    dedup_by_centroid,
    filter_rhombi,
    parse_record,
    quad_candidates,
)


def quad(cx, cy, a, b, rotation_deg=0.0):
    """Parallelogram with exact side lengths a and b, centered at (cx, cy)."""
    rot = math.radians(rotation_deg)
    ux, uy = math.cos(rot), math.sin(rot)
    vx, vy = -math.sin(rot), math.cos(rot)
    half_a, half_b = a / 2, b / 2
    verts = np.array(
        [
            (cx - half_a * ux - half_b * vx, cy - half_a * uy - half_b * vy),
            (cx + half_a * ux - half_b * vx, cy + half_a * uy - half_b * vy),
            (cx + half_a * ux + half_b * vx, cy + half_a * uy + half_b * vy),
            (cx - half_a * ux + half_b * vx, cy - half_a * uy + half_b * vy),
        ]
    )
    return QuadCandidate.from_vertices(verts)


class TestEdges:
    def test_auto_sigma_for_5x5(self):
        assert eg.auto_sigma(5) == pytest.approx(1.1)

    def test_blank_image_has_no_edges(self):
        img = np.full((64, 64), 255, dtype=np.uint8)
        assert not eg.canny(img).any()

    def test_step_edge_detected(self):
        img = np.full((40, 40), 255, dtype=np.uint8)
        img[:, 20:] = 0
        edge = eg.canny(img)
        cols = np.nonzero(edge.any(axis=0))[0]
        assert len(cols) > 0
        assert all(18 <= c <= 21 for c in cols)


class TestContours:
    def test_square_border_and_perimeter(self):
        mask = np.zeros((30, 30), dtype=bool)
        mask[5:25, 5] = mask[5:25, 24] = True
        mask[5, 5:25] = mask[24, 5:25] = True
        conts = ct.outer_contours(mask)
        assert len(conts) == 1
        per = ct.perimeter(conts[0])
        assert per == pytest.approx(4 * 19, rel=0.05)

    def test_approx_square_to_four_vertices(self):
        mask = np.zeros((40, 40), dtype=bool)
        mask[8:33, 8] = mask[8:33, 32] = True
        mask[8, 8:33] = mask[32, 8:33] = True
        contour = ct.outer_contours(mask)[0]
        poly = ct.approx_polygon(contour, 0.01 * ct.perimeter(contour))
        assert len(poly) == 4
        assert ct.is_convex(poly)

    def test_convexity(self):
        square = np.array([(0, 0), (10, 0), (10, 10), (0, 10)], dtype=float)
        dart = np.array([(0, 0), (10, 0), (2, 2), (0, 10)], dtype=float)
        assert ct.is_convex(square)
        assert not ct.is_convex(dart)


class TestQuadFilters:
    def test_rhombus_side_oracle(self):
        # 3-4-5 rhombus: all four sides are exactly 5.
        verts = np.array([(0, 0), (4, 3), (8, 0), (4, -3)], dtype=float)
        q = QuadCandidate.from_vertices(verts)
        assert q.sides == pytest.approx((5.0, 5.0, 5.0, 5.0))
        assert q.side_ratio == pytest.approx(1.0)
        assert q.centroid == pytest.approx((4.0, 0.0))

    @settings(max_examples=60, deadline=None)
    @given(
        rotation=st.floats(0, 180),
        scale=st.floats(20, 200),
        ratio=st.sampled_from([1.09, 1.11]),
    )
    def test_side_ratio_boundary(self, rotation, scale, ratio):
        q = quad(300, 300, scale * ratio, scale, rotation)
        kept = filter_rhombi([q])
        assert bool(kept) == (ratio < 1.1)

    def test_dedup_five_pixel_centroids(self):
        a = quad(100, 100, 40, 40)
        b = quad(103, 104, 40, 40)  # centroid distance 5
        assert len(dedup_by_centroid([a, b])) == 1

    def test_dedup_keeps_distant_quads(self):
        a = quad(100, 100, 40, 40)
        b = quad(160, 100, 40, 40)
        assert len(dedup_by_centroid([a, b])) == 2

    def test_boxes_margin_and_clamp(self):
        q = quad(15, 15, 20, 20)
        (box,) = boxes_from_quads([q], shape=(60, 60), margin=10)
        assert box.box == (0, 0, 35, 35)
        assert box.kind is SourceKind.DEPENDENT
        assert box.origin is DetectionOrigin.RULE_BASED
        assert box.confidence == 1.0


class TestDetectDependentSources:
    @pytest.mark.parametrize("rotation", [0.0, 15.0, 45.0])
    def test_single_rhombus_rotations(self, rotation):
        img, truth = shapes.render_single("rhombus", rotation, side=80, vertex_angle_deg=75)
        boxes = detect_dependent_sources(img)
        assert shapes.boxes_match_truth(boxes, truth)

    @pytest.mark.parametrize("shape,kwargs", [
        ("circle", {}),
        ("rect", {"ratio": 1.2}),
        ("rect", {"ratio": 1.8, "rotation_deg": 30}),
        ("wire", {"rotation_deg": 40}),
        ("blank", {}),
    ])
    def test_no_false_positives(self, shape, kwargs):
        img, _ = shapes.render_single(shape, **kwargs)
        assert detect_dependent_sources(img) == []

    def test_detection_is_deterministic(self):
        img, _ = shapes.render_schematic(7)
        png = encode_png(img)
        assert detect_dependent_sources(png) == detect_dependent_sources(png)

    def test_boxes_stay_inside_image(self):
        for seed in range(12):
            img, _ = shapes.render_schematic(seed)
            h, w = img.shape
            for b in detect_dependent_sources(img):
                x1, y1, x2, y2 = b.box
                assert 0 <= x1 < x2 <= w
                assert 0 <= y1 < y2 <= h

    def test_quad_stage_sees_rendered_rhombus(self):
        img, _ = shapes.render_single("rhombus", 30, side=80)
        quads = quad_candidates(eg.canny(img))
        assert quads
        assert all(q.side_ratio < 1.1 for q in quads)


class TestCropInset:
    def test_margin_clamped_at_border(self):
        img = np.arange(100 * 100, dtype=np.uint8).reshape(100, 100)
        inset = crop_inset(img, (0, 0, 20, 20), margin=10)
        assert inset.shape == (30, 30)

    def test_interior_box_gets_full_margin(self):
        img = np.zeros((100, 100), dtype=np.uint8)
        inset = crop_inset(img, (40, 40, 60, 60), margin=10)
        assert inset.shape == (40, 40)

    def test_zero_area_rejected(self):
        img = np.zeros((50, 50), dtype=np.uint8)
        with pytest.raises(InputError):
            crop_inset(img, (60, 60, 70, 70), margin=0)


STUB = """\
import sys
print("DC Voltage Source 10 20 60 80 0.91")
print("Current Source 100 20 150 80 0.55")
print("Resistor 10 100 60 140 0.99")
print("AC Voltage Source 200 20 260 90 0.12")
"""


class TestExternalDetector:
    @pytest.fixture
    def image_path(self, tmp_path):
        img, _ = shapes.render_single("blank")
        p = tmp_path / "diagram.png"
        p.write_bytes(encode_png(img))
        return p

    def make_stub(self, tmp_path, body=STUB):
        script = tmp_path / "stub_detector.py"
        script.write_text(body)
        return [sys.executable, str(script)]

    def test_records_classes_and_threshold(self, tmp_path, image_path):
        client = ExternalDetectorClient(command=self.make_stub(tmp_path), threshold=0.25)
        boxes = client.detect(image_path)
        # Resistor is not a source; the 0.12 detection is under threshold.
        assert [b.kind for b in boxes] == [
            SourceKind.INDEPENDENT_VOLTAGE,
            SourceKind.INDEPENDENT_CURRENT,
        ]
        assert boxes[0].box == (10, 20, 60, 80)
        assert boxes[0].confidence == pytest.approx(0.91)
        assert all(b.origin is DetectionOrigin.EXTERNAL_DETECTOR for b in boxes)

    def test_class_names_with_spaces(self):
        label, coords, conf = parse_record("DC Voltage Source 1 2 3 4 0.5")
        assert label == "DC Voltage Source"
        assert coords == [1.0, 2.0, 3.0, 4.0]
        assert conf == 0.5

    def test_malformed_record(self):
        with pytest.raises(ParseError):
            parse_record("Voltage Source 1 2 3")
        with pytest.raises(ParseError):
            parse_record("Voltage Source 1 2 3 4 high")

    def test_unknown_class_dropped(self):
        assert classify_label("Inductor") is None
        assert classify_label("dc voltage source") is SourceKind.INDEPENDENT_VOLTAGE

    def test_missing_command_raises(self, image_path):
        client = ExternalDetectorClient(command=["/nonexistent/detector"])
        with pytest.raises(DetectorError):
            client.detect(image_path)

    def test_failing_command_raises(self, tmp_path, image_path):
        cmd = self.make_stub(tmp_path, "import sys; sys.exit(3)")
        with pytest.raises(DetectorError):
            ExternalDetectorClient(command=cmd).detect(image_path)

    def test_requires_exactly_one_transport(self):
        with pytest.raises(DetectorError):
            ExternalDetectorClient()
        with pytest.raises(DetectorError):
            ExternalDetectorClient(command=["x"], url="http://127.0.0.1:1/d")

    def test_http_transport(self, monkeypatch, image_path):
        import httpx

        payload = {
            "detections": [
                {"class": "DC Voltage Source", "box": [5, 5, 40, 40], "confidence": 0.8},
                {"class": "Capacitor", "box": [50, 5, 90, 40], "confidence": 0.9},
            ]
        }

        def fake_post(url, content=None, headers=None, timeout=None):
            request = httpx.Request("POST", url)
            return httpx.Response(200, json=payload, request=request)

        monkeypatch.setattr(httpx, "post", fake_post)
        client = ExternalDetectorClient(url="http://127.0.0.1:9/detect")
        boxes = client.detect(image_path)
        assert len(boxes) == 1
        assert boxes[0].kind is SourceKind.INDEPENDENT_VOLTAGE

    def test_http_unreachable(self, image_path):
        client = ExternalDetectorClient(url="http://127.0.0.1:9/detect", timeout=0.2)
        with pytest.raises(DetectorError):
            client.detect(image_path)
