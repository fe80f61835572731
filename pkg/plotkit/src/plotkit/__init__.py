"""Figures for intersketch sweep results."""

from .render import (
    EXPECTED_HEADER,
    EmptySelectionError,
    FigureSpec,
    SchemaError,
    build_series,
    load_rows,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "EXPECTED_HEADER",
    "EmptySelectionError",
    "FigureSpec",
    "SchemaError",
    "build_series",
    "load_rows",
    "render",
]
