"""Calibration of the complexity / accuracy models from profiler output.

Input measurements arrive as ``(frames, value)`` pairs, e.g. exported by a
profiler that ran the target network at several frame resolutions.  The
complexity fit is an ordinary least-squares line; the accuracy fit reduces
to a one-dimensional search over the shift parameter because the other two
coefficients enter linearly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InputDataError
from .models import AccuracyModel, ComplexityModel

# Admissible range for the accuracy shift parameter during fitting.  The
# lower end keeps phi finite for every frame count >= 1.
_A1_LO = -0.99
_A1_HI = 100.0


@dataclass
class ComplexityFit:
    model: ComplexityModel
    rmse: float


@dataclass
class AccuracyFit:
    model: AccuracyModel
    rmse: float


def load_frame_value_csv(path: str | Path) -> list[tuple[float, float]]:
    """Read measurement pairs from a CSV file with header ``frames,value``."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise InputDataError(f"{path}: file is empty")
            header = [h.strip().lower() for h in header]
            if header != ["frames", "value"]:
                raise InputDataError(
                    f"{path}: expected header 'frames,value', got "
                    f"{','.join(header)}")
            samples = []
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != 2:
                    raise InputDataError(
                        f"{path}:{lineno}: expected two columns, got {len(row)}")
                try:
                    samples.append((float(row[0]), float(row[1])))
                except ValueError as exc:
                    raise InputDataError(
                        f"{path}:{lineno}: non-numeric entry") from exc
    except OSError as exc:
        raise InputDataError(f"cannot read {path}: {exc}") from exc
    if not samples:
        raise InputDataError(f"{path}: no data rows")
    return samples


def _as_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise InputDataError("samples must be a non-empty sequence of pairs")
    return arr[:, 0], arr[:, 1]


def fit_complexity(samples) -> ComplexityFit:
    """Least-squares affine fit of MACs versus frame resolution.

    The slope is clamped to zero if the data trends downward, since the
    complexity model requires ``m_c0 >= 0``.
    """
    m, y = _as_arrays(samples)
    if np.unique(m).size < 2:
        raise InputDataError(
            "complexity fit needs samples at >= 2 distinct frame counts")
    design = np.column_stack([m, np.ones_like(m)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    if slope < 0.0:
        slope = 0.0
        intercept = float(np.mean(y))
    pred = slope * m + intercept
    rmse = float(np.sqrt(np.mean((y - pred) ** 2)))
    return ComplexityFit(ComplexityModel(m_c0=float(slope),
                                         m_c1=float(max(intercept, 0.0))),
                         rmse=rmse)


def _accuracy_sse_at(a1: float, m: np.ndarray, y: np.ndarray
                     ) -> tuple[float, float, float]:
    """Best (a0, a2) for a fixed shift a1, honouring a0 >= 0.

    Returns (sse, a0, a2).  For fixed a1 the model is linear in (a0, a2)
    with regressor u = -1/(m + a1).
    """
    u = -1.0 / (m + a1)
    design = np.column_stack([u, np.ones_like(u)])
    (a0, a2), *_ = np.linalg.lstsq(design, y, rcond=None)
    if a0 < 0.0:
        a0 = 0.0
        a2 = float(np.mean(y))
    resid = y - (a0 * u + a2)
    return float(resid @ resid), float(a0), float(a2)


def fit_accuracy(samples) -> AccuracyFit:
    """Fit the saturating accuracy model by scanning the shift parameter.

    A coarse grid over the admissible shift range is followed by a bounded
    scalar refinement around the best grid point.  Constant observations
    are handled as the degenerate model ``m_a0 = 0``, ``m_a2 = const``.
    """
    m, y = _as_arrays(samples)
    if np.any(m < 1.0):
        raise InputDataError("accuracy fit requires frame counts >= 1")
    if float(np.ptp(y)) == 0.0:
        return AccuracyFit(AccuracyModel(m_a0=0.0, m_a1=1.0,
                                         m_a2=float(y[0])), rmse=0.0)
    if np.unique(m).size < 3:
        raise InputDataError(
            "accuracy fit needs samples at >= 3 distinct frame counts")
    grid = np.concatenate([
        np.arange(_A1_LO + 0.01, 5.0, 0.02),
        np.arange(5.0, _A1_HI + 1e-9, 0.25),
    ])
    sse = np.array([_accuracy_sse_at(a1, m, y)[0] for a1 in grid])
    best = int(np.argmin(sse))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]
    if hi > lo:
        res = minimize_scalar(lambda a1: _accuracy_sse_at(a1, m, y)[0],
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        a1 = float(res.x)
        if _accuracy_sse_at(a1, m, y)[0] > sse[best]:
            a1 = float(grid[best])
    else:
        a1 = float(grid[best])
    final_sse, a0, a2 = _accuracy_sse_at(a1, m, y)
    rmse = float(np.sqrt(final_sse / m.size))
    return AccuracyFit(AccuracyModel(m_a0=a0, m_a1=a1, m_a2=a2), rmse=rmse)


def estimate_rho(latencies_s, macs, clock_hz: float) -> float:
    """Cycles-per-MAC estimate from timed inference runs.

    Total cycles spent are ``clock_hz * sum(latencies)``; dividing by the
    total MAC count gives the per-MAC cycle cost.
    """
    lat = np.asarray(latencies_s, dtype=float)
    ops = np.asarray(macs, dtype=float)
    if lat.shape != ops.shape or lat.size == 0:
        raise InputDataError("latency and MAC arrays must match and be non-empty")
    if clock_hz <= 0:
        raise InputDataError("clock_hz must be positive")
    total_ops = float(np.sum(ops))
    if total_ops <= 0:
        raise InputDataError("total MAC count must be positive")
    return float(clock_hz * np.sum(lat) / total_ops)
