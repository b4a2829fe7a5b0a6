"""Image loading, grayscale conversion, inset cropping."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import InputError


def load_gray(source: str | Path | bytes) -> np.ndarray:
    """Decode a PNG/JPEG into a uint8 grayscale array (rows x cols)."""
    try:
        if isinstance(source, bytes):
            img = Image.open(io.BytesIO(source))
        else:
            img = Image.open(source)
        img.load()
    except (OSError, UnidentifiedImageError) as exc:
        raise InputError(f"cannot decode image: {exc}") from exc
    return np.asarray(img.convert("L"), dtype=np.uint8)


def clamp_box(box: tuple[int, int, int, int], shape: tuple[int, int], margin: int = 0
              ) -> tuple[int, int, int, int]:
    """Expand a box by a margin and clamp it to image bounds.

    Boxes are (x1, y1, x2, y2) with exclusive right/bottom edges.
    """
    h, w = shape[:2]
    x1, y1, x2, y2 = box
    x1 = max(0, int(x1) - margin)
    y1 = max(0, int(y1) - margin)
    x2 = min(w, int(x2) + margin)
    y2 = min(h, int(y2) + margin)
    return x1, y1, x2, y2


def crop_inset(image: np.ndarray, box: tuple[int, int, int, int], margin: int = 10) -> np.ndarray:
    """Cut the margin-padded sub-image around a detection box."""
    x1, y1, x2, y2 = clamp_box(box, image.shape, margin)
    if x2 <= x1 or y2 <= y1:
        raise InputError(f"box {box} leaves no area inside image {image.shape[1]}x{image.shape[0]}")
    return image[y1:y2, x1:x2]


def encode_png(image: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(image).save(buf, format="PNG")
    return buf.getvalue()
