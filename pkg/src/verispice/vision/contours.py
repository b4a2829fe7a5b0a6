"""Contour tracing and polygon approximation on binary edge maps."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

# Clockwise Moore neighborhood, y axis growing downward: (dy, dx).
_RING = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))
_RING_INDEX = {off: i for i, off in enumerate(_RING)}


def outer_contours(edges: np.ndarray, min_pixels: int = 4) -> list[np.ndarray]:
    """Trace the outer border of every 8-connected component.

    Returns one (n, 2) array of (x, y) points per component, in image scan
    order of the component start pixel, so output order is deterministic.
    Components smaller than ``min_pixels`` are dropped.
    """
    labels, count = ndimage.label(edges, structure=np.ones((3, 3), dtype=bool))
    if count == 0:
        return []
    contours = []
    slices = ndimage.find_objects(labels)
    sizes = ndimage.sum_labels(edges, labels, index=np.arange(1, count + 1))
    for lab in range(1, count + 1):
        if sizes[lab - 1] < min_pixels:
            continue
        window = slices[lab - 1]
        local = labels[window] == lab
        ys, xs = np.nonzero(local)  # row-major scan order: first hit is topmost-leftmost
        start = (int(ys[0]), int(xs[0]))
        trace = _trace_border(local, start)
        oy, ox = window[0].start, window[1].start
        contours.append(np.array([(x + ox, y + oy) for y, x in trace], dtype=np.float64))
    return contours


def _trace_border(mask: np.ndarray, start: tuple[int, int]) -> list[tuple[int, int]]:
    """Moore-neighbor border following with state-repeat termination."""
    h, w = mask.shape

    def on(p: tuple[int, int]) -> bool:
        return 0 <= p[0] < h and 0 <= p[1] < w and mask[p]

    # The scan finds the topmost-leftmost pixel, so west of it is background.
    backtrack = (0, -1)
    current = start
    border = [start]
    seen = {(current, backtrack)}
    while True:
        base = _RING_INDEX[backtrack]
        nxt = None
        for step in range(1, 9):
            off = _RING[(base + step) % 8]
            cand = (current[0] + off[0], current[1] + off[1])
            if on(cand):
                prev_off = _RING[(base + step - 1) % 8]
                nxt = cand
                # Backtrack for the next pixel: where we stood relative to it.
                backtrack = (
                    current[0] + prev_off[0] - cand[0],
                    current[1] + prev_off[1] - cand[1],
                )
                break
        if nxt is None:
            return border  # isolated pixel
        current = nxt
        state = (current, backtrack)
        if state in seen:
            return border
        seen.add(state)
        border.append(current)


def perimeter(points: np.ndarray, closed: bool = True) -> float:
    if len(points) < 2:
        return 0.0
    diffs = np.diff(points, axis=0)
    total = float(np.hypot(diffs[:, 0], diffs[:, 1]).sum())
    if closed:
        total += float(np.hypot(*(points[0] - points[-1])))
    return total


def _segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.hypot(*(points - a).T)
    t = np.clip((points - a) @ ab / denom, 0.0, 1.0)
    proj = a + np.outer(t, ab)
    return np.hypot(*(points - proj).T)


def _dp_open(points: np.ndarray, eps: float) -> list[int]:
    """Indices kept by Douglas-Peucker on an open chain."""
    keep = {0, len(points) - 1}
    stack = [(0, len(points) - 1)]
    while stack:
        i, j = stack.pop()
        if j - i < 2:
            continue
        inner = points[i + 1 : j]
        d = _segment_distances(inner, points[i], points[j])
        k = int(np.argmax(d))
        if d[k] > eps:
            mid = i + 1 + k
            keep.add(mid)
            stack.append((i, mid))
            stack.append((mid, j))
    return sorted(keep)


def approx_polygon(points: np.ndarray, eps: float) -> np.ndarray:
    """Closed-curve Douglas-Peucker.

    Splits the ring at two diameter-ish anchor points (farthest from point
    0, then farthest from that), approximates both chains, and joins them.
    Anchoring on the diameter keeps both split points at true corners
    instead of mid-edge, which would leak extra vertices.
    """
    n = len(points)
    if n <= 2:
        return points.copy()
    a = int(np.argmax(np.hypot(*(points - points[0]).T)))
    b = int(np.argmax(np.hypot(*(points - points[a]).T)))
    if a == b:
        return points[:1].copy()
    a, b = min(a, b), max(a, b)
    chain1 = points[a : b + 1]
    chain2 = np.concatenate([points[b:], points[: a + 1]], axis=0)
    idx1 = _dp_open(chain1, eps)
    idx2 = _dp_open(chain2, eps)
    verts = [chain1[i] for i in idx1[:-1]] + [chain2[i] for i in idx2[:-1]]
    return np.array(verts, dtype=np.float64)


def is_convex(verts: np.ndarray) -> bool:
    """Strict convexity: all turn cross-products share one sign."""
    n = len(verts)
    if n < 3:
        return False
    sign = 0
    for i in range(n):
        a, b, c = verts[i], verts[(i + 1) % n], verts[(i + 2) % n]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if abs(cross) < 1e-9:
            return False
        s = 1 if cross > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return True
