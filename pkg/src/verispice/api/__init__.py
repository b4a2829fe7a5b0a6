"""HTTP review service: ticket queue, resolutions, artifact serving."""

from .app import ReviewService, create_app

__all__ = ["ReviewService", "create_app"]
