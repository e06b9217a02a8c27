"""HTTP layer: pydantic schemas and the FastAPI app."""

from .app import app  # noqa: F401
