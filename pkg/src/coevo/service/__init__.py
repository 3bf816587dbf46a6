"""Operation browser service: HTTP/JSON facade over the engine."""

from .app import create_app

__all__ = ["create_app"]
