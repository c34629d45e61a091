"""Deterministic figure rendering for harness CSV outputs."""

from __future__ import annotations

from .figures import KINDS, FigureSpec, build_figure, render
from .schema import (
    BREAKDOWN_COLUMNS,
    REQUIRED_COLUMNS,
    SWEEP_COLUMNS,
    TRACE_COLUMNS,
    TRADEOFF_COLUMNS,
    EmptyInputError,
    PlotkitError,
    SchemaError,
    load_rows,
)

__all__ = [
    "BREAKDOWN_COLUMNS",
    "EmptyInputError",
    "FigureSpec",
    "KINDS",
    "PlotkitError",
    "REQUIRED_COLUMNS",
    "SWEEP_COLUMNS",
    "SchemaError",
    "TRACE_COLUMNS",
    "TRADEOFF_COLUMNS",
    "build_figure",
    "load_rows",
    "render",
]

__version__ = "0.1.0"
