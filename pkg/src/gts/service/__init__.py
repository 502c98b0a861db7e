"""FastAPI service wrapping the benchmark engine and pipeline."""

from .app import create_app

__all__ = ["create_app"]
