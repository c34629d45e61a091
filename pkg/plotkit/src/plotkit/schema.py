"""CSV schemas for harness outputs and their validation.

The columns listed here mirror the files written by the ``mecoff`` command
line tool (``sweep``, ``convergence``, ``breakdown`` and ``tradeoff``).
Extra columns are tolerated; missing ones are reported by name.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path


class PlotkitError(Exception):
    """Base class for all plotkit failures."""


class SchemaError(PlotkitError):
    """Input CSV does not match the expected column schema."""


class EmptyInputError(PlotkitError):
    """Input CSV contains no usable data rows."""


SWEEP_COLUMNS = [
    "vary",
    "value",
    "scheme",
    "seed",
    "avg_cost",
    "avg_delay_s",
    "avg_energy_j",
    "avg_accuracy",
    "offload_rate",
    "wall_time_s",
    "error",
]

TRACE_COLUMNS = [
    "iter",
    "objective",
    "primal_res_f",
    "primal_res_t",
    "offload_rate",
    "converged",
]

BREAKDOWN_COLUMNS = [
    "set",
    "count",
    "avg_delay_s",
    "avg_energy_j",
    "avg_accuracy",
    "offload_fraction",
]

TRADEOFF_COLUMNS = [
    "beta1",
    "beta2",
    "beta3",
    "avg_delay_s",
    "avg_energy_j",
    "avg_accuracy",
]

#: Columns each figure kind requires in its input CSV.
REQUIRED_COLUMNS = {
    "cost_vs_axis": SWEEP_COLUMNS,
    "runtime": SWEEP_COLUMNS,
    "convergence": TRACE_COLUMNS,
    "metric_panels": BREAKDOWN_COLUMNS,
    "tradeoff_surface": TRADEOFF_COLUMNS,
}


def load_rows(path: str | Path, required: list[str]) -> list[dict[str, str]]:
    """Read ``path`` as CSV and return its rows as dictionaries.

    Raises :class:`PlotkitError` if the file cannot be read,
    :class:`EmptyInputError` if it has no content or no data rows, and
    :class:`SchemaError` (naming the offending columns) if any required
    column is absent from the header.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise PlotkitError(f"cannot read {path}: {exc}") from exc
    if not text.strip():
        raise EmptyInputError(f"{path}: file is empty")
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    missing = [column for column in required if column not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing required column(s): " + ", ".join(missing)
        )
    rows = list(reader)
    if not rows:
        raise EmptyInputError(f"{path}: no data rows")
    return rows


def parse_float(row: dict[str, str], column: str, source: str) -> float:
    """Parse ``row[column]`` as a float with a descriptive failure."""
    value = row.get(column, "")
    try:
        return float(value)
    except ValueError as exc:
        raise SchemaError(
            f"{source}: column '{column}' has non-numeric value {value!r}"
        ) from exc
