from .detect import (
    ExternalDetectorClient,
    QuadCandidate,
    detect_dependent_sources,
)
from .raster import crop_inset, encode_png, load_gray

__all__ = [
    "ExternalDetectorClient",
    "QuadCandidate",
    "detect_dependent_sources",
    "crop_inset",
    "encode_png",
    "load_gray",
]
