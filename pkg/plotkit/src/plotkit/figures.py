"""Figure construction and rendering for harness CSV outputs.

Five figure kinds are supported:

``cost_vs_axis``
    Average cost versus the swept axis, one series per scheme
    (``sweep`` CSV).
``runtime``
    Solver wall time versus the swept axis, one series per scheme
    (``sweep`` CSV).
``convergence``
    Objective value per iteration of the splitting solver
    (``convergence`` trace CSV); the x axis spans exactly the recorded
    iteration range.
``metric_panels``
    Side-by-side delay / energy / accuracy panels per execution site
    (``breakdown`` CSV).
``tradeoff_surface``
    3-D scatter of (avg delay, avg energy, avg accuracy) triples over
    the weight grid (``tradeoff`` CSV).

Rendering is deterministic: with identical inputs, writing the same
vector image twice produces byte-identical files.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
# Fixed salt keeps the ids inside SVG output stable across runs.
matplotlib.rcParams["svg.hashsalt"] = "plotkit"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .schema import (  # noqa: E402
    REQUIRED_COLUMNS,
    EmptyInputError,
    PlotkitError,
    load_rows,
    parse_float,
)

#: Supported figure kinds, in a stable order.
KINDS = tuple(REQUIRED_COLUMNS)


@dataclass
class FigureSpec:
    """One figure to draw: what kind, from which CSV, to which file."""

    kind: str
    csv_path: str | Path
    out_path: str | Path


def _sweep_series(
    rows: list[dict[str, str]], ycol: str, source: str
) -> tuple[list[str], dict[str, dict[str, list[float]]], str]:
    """Group sweep rows into per-scheme series keyed by axis value.

    Rows from failed runs (non-empty ``error`` or empty metric cell) are
    skipped.  Returns the axis values in first-appearance order, the
    per-scheme ``{value: [samples]}`` mapping, and the axis label.
    """
    usable = [r for r in rows if not r.get("error") and r.get(ycol)]
    if not usable:
        raise EmptyInputError(f"{source}: no usable data rows for '{ycol}'")
    order = list(dict.fromkeys(r["value"] for r in usable))
    series: dict[str, dict[str, list[float]]] = {}
    for row in usable:
        bucket = series.setdefault(row["scheme"], {})
        bucket.setdefault(row["value"], []).append(
            parse_float(row, ycol, source)
        )
    xlabel = usable[0].get("vary") or "value"
    return order, series, xlabel


def _axis_positions(order: list[str]) -> tuple[dict[str, float], bool]:
    """Map axis values to x positions, numeric when possible."""
    try:
        return {v: float(v) for v in order}, True
    except ValueError:
        return {v: float(i) for i, v in enumerate(order)}, False


def _sweep_figure(rows: list[dict[str, str]], ycol: str, source: str):
    order, series, xlabel = _sweep_series(rows, ycol, source)
    positions, numeric = _axis_positions(order)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for scheme in sorted(series):
        values = [v for v in order if v in series[scheme]]
        xs = [positions[v] for v in values]
        ys = [statistics.fmean(series[scheme][v]) for v in values]
        ax.plot(xs, ys, marker="o", label=scheme)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ycol)
    ax.grid(True, alpha=0.3)
    ax.legend()
    if not numeric:
        ax.set_xticks([positions[v] for v in order])
        ax.set_xticklabels(order, rotation=30, ha="right")
    fig.tight_layout()
    return fig


def _cost_vs_axis(rows: list[dict[str, str]], source: str):
    return _sweep_figure(rows, "avg_cost", source)


def _runtime(rows: list[dict[str, str]], source: str):
    return _sweep_figure(rows, "wall_time_s", source)


def _convergence(rows: list[dict[str, str]], source: str):
    points = sorted(
        (
            int(parse_float(row, "iter", source)),
            parse_float(row, "objective", source),
        )
        for row in rows
    )
    iters = [it for it, _ in points]
    objectives = [obj for _, obj in points]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(iters, objectives, marker="o")
    ax.set_xlabel("iter")
    ax.set_ylabel("objective")
    ax.grid(True, alpha=0.3)
    if iters[0] != iters[-1]:
        ax.set_xlim(iters[0], iters[-1])
    fig.tight_layout()
    return fig


_PANEL_METRICS = ["avg_delay_s", "avg_energy_j", "avg_accuracy"]


def _metric_panels(rows: list[dict[str, str]], source: str):
    labels = [row.get("set", "") for row in rows]
    fig, axes = plt.subplots(1, len(_PANEL_METRICS), figsize=(9.0, 3.5))
    for ax, metric in zip(axes, _PANEL_METRICS):
        heights = [parse_float(row, metric, source) for row in rows]
        ax.bar(range(len(rows)), heights)
        ax.set_xticks(range(len(rows)))
        ax.set_xticklabels(labels)
        ax.set_ylabel(metric)
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    return fig


def _tradeoff_surface(rows: list[dict[str, str]], source: str):
    delays = [parse_float(row, "avg_delay_s", source) for row in rows]
    energies = [parse_float(row, "avg_energy_j", source) for row in rows]
    accuracies = [parse_float(row, "avg_accuracy", source) for row in rows]
    weights = [parse_float(row, "beta3", source) for row in rows]
    fig = plt.figure(figsize=(6.0, 5.0))
    ax = fig.add_subplot(projection="3d")
    scatter = ax.scatter(
        delays, energies, accuracies, c=weights, cmap="viridis", depthshade=False
    )
    ax.set_xlabel("avg_delay_s")
    ax.set_ylabel("avg_energy_j")
    ax.set_zlabel("avg_accuracy")
    fig.colorbar(scatter, ax=ax, shrink=0.7, label="beta3")
    return fig


_BUILDERS = {
    "cost_vs_axis": _cost_vs_axis,
    "runtime": _runtime,
    "convergence": _convergence,
    "metric_panels": _metric_panels,
    "tradeoff_surface": _tradeoff_surface,
}


def build_figure(kind: str, rows: list[dict[str, str]], source: str = "input"):
    """Build (but do not save) the matplotlib figure for ``kind``."""
    if kind not in _BUILDERS:
        raise PlotkitError(
            f"unknown figure kind '{kind}', expected one of: " + ", ".join(KINDS)
        )
    return _BUILDERS[kind](rows, source)


def render(spec: FigureSpec) -> Path:
    """Validate, draw and save the figure described by ``spec``.

    Returns the path of the written image.  The input CSV is only read;
    on any failure no partial output handling is attempted beyond what
    matplotlib itself guarantees.
    """
    if spec.kind not in _BUILDERS:
        raise PlotkitError(
            f"unknown figure kind '{spec.kind}', expected one of: "
            + ", ".join(KINDS)
        )
    rows = load_rows(spec.csv_path, REQUIRED_COLUMNS[spec.kind])
    fig = build_figure(spec.kind, rows, source=str(spec.csv_path))
    out = Path(spec.out_path)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    try:
        if out.suffix.lower() == ".svg":
            # Dropping the date stamp keeps repeat renders byte-identical.
            fig.savefig(out, format="svg", metadata={"Date": None})
        else:
            fig.savefig(out)
    finally:
        plt.close(fig)
    return out
