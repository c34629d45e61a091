"""Scenario generation, experiment sweeps and result persistence.

A scenario places N devices uniformly in a square cell with the base
station at the centre, draws channel gains from a log-distance path-loss
model, and instantiates the system/model parameter containers.  The sweep
driver varies one axis (device count, bandwidth, edge compute budget, or
the cost weights), runs the requested schemes over seeded replications and
persists one CSV row per run.  Failures of individual runs are recorded in
an ``error`` column instead of aborting the sweep.

Reproducibility: all randomness flows from numpy's ``default_rng`` (PCG64)
seeded via ``SeedSequence``.  The scenario of replication ``r`` derives
from entropy ``(seed, r)`` so that every point of a sweep sees the same
device draw, while each run additionally owns an independent stream from
``(seed, value index, r)`` for scheme-internal randomness.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .admm import AdmmOptions, AdmmTrace, admm_solve
from .errors import ConfigError, MecoffError
from .models import (AccuracyModel, Allocation, ComplexityModel,
                     DeviceProfile, SystemParams, accuracy,
                     evaluate_allocation)
from .policies import solve_baseline, solve_channel_aware, solve_exhaustive

SWEEP_AXES = ("n_devices", "bandwidth", "edge_compute", "weights")
SCHEMES = ("channel_aware", "exhaustive", "all_local", "all_edge", "random",
           "admm")

SWEEP_COLUMNS = ["vary", "value", "scheme", "seed", "avg_cost", "avg_delay_s",
                 "avg_energy_j", "avg_accuracy", "offload_rate",
                 "wall_time_s", "error"]
TRACE_COLUMNS = ["iter", "objective", "primal_res_f", "primal_res_t",
                 "offload_rate", "converged"]
BREAKDOWN_COLUMNS = ["set", "count", "avg_delay_s", "avg_energy_j",
                     "avg_accuracy", "offload_fraction"]
TRADEOFF_COLUMNS = ["beta1", "beta2", "beta3", "avg_delay_s", "avg_energy_j",
                    "avg_accuracy"]


@dataclass
class ScenarioConfig:
    """Complete experiment description, JSON round-trippable."""

    n_devices: int = 8
    region_m: float = 500.0
    min_distance_m: float = 1.0
    seed: int = 0
    beta1: float = 0.2
    beta2: float = 0.2
    beta3: float = 0.6
    bandwidth_hz: float = 5e6
    noise_density_dbm_hz: float = -174.0
    kappa: float = 1e-28
    rho_cycles_per_mac: float = 0.12
    frame_bits: float = 2000.0
    edge_compute_hz: float = 22e9
    radio_frame_s: float = 1.0
    device_compute_hz: float = 1.8e9
    tx_power_w: float = 0.1
    accuracy_floor: float = 0.86
    m_max: int = 16
    m_c0: float = 1.0e8
    m_c1: float = 1.5e10
    m_a0: float = 1.2
    m_a1: float = 2.0
    m_a2: float = 0.95

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2) + "\n")

    @classmethod
    def from_json(cls, path: str | Path) -> "ScenarioConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top-level JSON must be an object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(
                f"{path}: unknown config keys {', '.join(unknown)}")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


@dataclass
class Scenario:
    """A generated instance: parameter containers plus device geometry."""

    config: ScenarioConfig
    params: SystemParams
    cmodel: ComplexityModel
    amodel: AccuracyModel
    devices: list[DeviceProfile]
    positions_m: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    distances_m: np.ndarray = field(default_factory=lambda: np.zeros(0))


def path_loss_db(distance_km: float) -> float:
    """Log-distance path loss for a BS-device separation in kilometres."""
    if distance_km <= 0:
        raise ConfigError("distance must be positive")
    return 128.1 + 37.6 * math.log10(distance_km)


def derive_m_min(amodel: AccuracyModel, accuracy_floor: float,
                 m_max: int) -> int:
    """Smallest admissible frame count meeting the accuracy floor."""
    for m in range(1, m_max + 1):
        if accuracy(amodel, m) >= accuracy_floor - 1e-12:
            return m
    raise ConfigError(
        f"accuracy floor {accuracy_floor} unreachable within m_max={m_max}")


def generate_scenario(config: ScenarioConfig, seed=None) -> Scenario:
    """Draw device positions and build all parameter containers.

    ``seed`` overrides ``config.seed`` and may be an int or a sequence of
    ints (entropy for a ``SeedSequence``).  Devices closer to the base
    station than ``min_distance_m`` are clamped to that distance.
    """
    if config.n_devices < 1:
        raise ConfigError("n_devices must be at least 1")
    params = SystemParams(
        beta1=config.beta1, beta2=config.beta2, beta3=config.beta3,
        bandwidth_hz=config.bandwidth_hz,
        noise_density_dbm_hz=config.noise_density_dbm_hz,
        kappa=config.kappa, rho=config.rho_cycles_per_mac,
        frame_bits=config.frame_bits, edge_compute_hz=config.edge_compute_hz,
        radio_frame_s=config.radio_frame_s)
    cmodel = ComplexityModel(m_c0=config.m_c0, m_c1=config.m_c1)
    amodel = AccuracyModel(m_a0=config.m_a0, m_a1=config.m_a1,
                           m_a2=config.m_a2)
    m_min = derive_m_min(amodel, config.accuracy_floor, config.m_max)
    entropy = config.seed if seed is None else seed
    rng = np.random.default_rng(np.random.SeedSequence(entropy))
    half = config.region_m / 2.0
    positions = rng.uniform(-half, half, size=(config.n_devices, 2))
    distances = np.maximum(np.hypot(positions[:, 0], positions[:, 1]),
                           config.min_distance_m)
    devices = []
    for dist in distances:
        gain = 10.0 ** (-path_loss_db(float(dist) / 1000.0) / 10.0)
        devices.append(DeviceProfile(
            channel_gain=gain, tx_power_w=config.tx_power_w,
            local_compute_hz=config.device_compute_hz,
            m_min=m_min, m_max=config.m_max,
            accuracy_floor=config.accuracy_floor))
    return Scenario(config=config, params=params, cmodel=cmodel,
                    amodel=amodel, devices=devices, positions_m=positions,
                    distances_m=distances)


def run_scheme(scenario: Scenario, scheme: str, seed=None,
               admm_opts: AdmmOptions | None = None) -> Allocation:
    """Dispatch a scheme name to its solver on a generated scenario."""
    params, cmodel, amodel, devices = (scenario.params, scenario.cmodel,
                                       scenario.amodel, scenario.devices)
    if scheme == "channel_aware":
        return solve_channel_aware(params, cmodel, amodel, devices,
                                   edge_inner="gp")
    if scheme == "exhaustive":
        return solve_exhaustive(params, cmodel, amodel, devices,
                                edge_inner="search")
    if scheme == "admm":
        alloc, _trace = admm_solve(params, cmodel, amodel, devices, admm_opts)
        return alloc
    if scheme in ("all_local", "all_edge", "random"):
        return solve_baseline(params, cmodel, amodel, devices, scheme,
                              seed=seed, edge_inner="gp")
    raise ConfigError(
        f"unknown scheme '{scheme}', expected one of {', '.join(SCHEMES)}")


def _parse_weights(token) -> tuple[float, float, float]:
    if isinstance(token, (tuple, list)) and len(token) == 3:
        b = tuple(float(v) for v in token)
    elif isinstance(token, str):
        parts = token.split(":")
        if len(parts) != 3:
            raise ConfigError(
                f"weights value '{token}' must look like 'b1:b2:b3'")
        b = tuple(float(p) for p in parts)
    else:
        raise ConfigError(f"cannot interpret weights value {token!r}")
    if any(v < 0 for v in b):
        raise ConfigError("weights must be non-negative")
    return b  # type: ignore[return-value]


def _config_for_value(config: ScenarioConfig, vary: str, value):
    if vary == "n_devices":
        return replace(config, n_devices=int(value)), value
    if vary == "bandwidth":
        return replace(config, bandwidth_hz=float(value)), value
    if vary == "edge_compute":
        return replace(config, edge_compute_hz=float(value)), value
    if vary == "weights":
        b1, b2, b3 = _parse_weights(value)
        token = f"{b1:g}:{b2:g}:{b3:g}"
        return replace(config, beta1=b1, beta2=b2, beta3=b3), token
    raise ConfigError(
        f"unknown sweep axis '{vary}', expected one of {', '.join(SWEEP_AXES)}")


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            out = {}
            for col in columns:
                v = row.get(col, "")
                if isinstance(v, float):
                    out[col] = repr(v)
                else:
                    out[col] = v
            writer.writerow(out)


def run_sweep(config: ScenarioConfig, vary: str, values, schemes,
              reps: int = 3, out_dir: str | Path | None = None,
              csv_name: str = "sweep.csv") -> tuple[list[dict], Path | None]:
    """Run ``schemes`` over ``values`` of one axis with seeded replications.

    Returns the rows (one dict per run) and the CSV path if ``out_dir`` was
    given.  Per-run metric fields are device averages; solver failures
    leave the metric fields empty and fill the ``error`` column.
    """
    if reps < 1:
        raise ConfigError("reps must be at least 1")
    schemes = list(schemes)
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ConfigError(
                f"unknown scheme '{scheme}', expected one of "
                f"{', '.join(SCHEMES)}")
    rows: list[dict] = []
    for vi, value in enumerate(values):
        cfg_v, value_token = _config_for_value(config, vary, value)
        for rep in range(reps):
            scenario = generate_scenario(cfg_v, seed=[config.seed, rep])
            run_seed = int(np.random.SeedSequence(
                [config.seed, vi, rep]).generate_state(1, np.uint64)[0])
            for scheme in schemes:
                row = {"vary": vary, "value": value_token, "scheme": scheme,
                       "seed": run_seed, "error": ""}
                t0 = time.perf_counter()
                try:
                    alloc = run_scheme(scenario, scheme, seed=run_seed)
                    metrics = evaluate_allocation(
                        scenario.params, scenario.cmodel, scenario.amodel,
                        scenario.devices, alloc)
                    row.update(
                        avg_cost=metrics.total_cost / cfg_v.n_devices,
                        avg_delay_s=metrics.avg_delay_s,
                        avg_energy_j=metrics.avg_energy_j,
                        avg_accuracy=metrics.avg_accuracy,
                        offload_rate=metrics.offload_rate)
                except MecoffError as exc:
                    row["error"] = str(exc)
                row["wall_time_s"] = time.perf_counter() - t0
                rows.append(row)
    path = None
    if out_dir is not None:
        path = Path(out_dir) / csv_name
        _write_csv(path, SWEEP_COLUMNS, rows)
    return rows, path


def convergence_trace(config: ScenarioConfig,
                      opts: AdmmOptions | None = None,
                      out_dir: str | Path | None = None,
                      csv_name: str = "admm_trace.csv"
                      ) -> tuple[AdmmTrace, Path | None]:
    """Run the decomposition solver once and persist its iteration trace."""
    scenario = generate_scenario(config)
    _alloc, trace = admm_solve(scenario.params, scenario.cmodel,
                               scenario.amodel, scenario.devices, opts)
    path = None
    if out_dir is not None:
        path = Path(out_dir) / csv_name
        rows = [{"iter": i + 1,
                 "objective": trace.objective[i],
                 "primal_res_f": trace.primal_res_f[i],
                 "primal_res_t": trace.primal_res_t[i],
                 "offload_rate": trace.offload_rate[i],
                 "converged": trace.converged}
                for i in range(len(trace))]
        _write_csv(path, TRACE_COLUMNS, rows)
    return trace, path


def local_edge_breakdown(config: ScenarioConfig,
                         scheme: str = "channel_aware", reps: int = 1,
                         out_dir: str | Path | None = None,
                         csv_name: str = "breakdown.csv"
                         ) -> tuple[list[dict], Path | None]:
    """Average delay/energy/accuracy split by execution site.

    Pools the devices of ``reps`` seeded replications into a local and an
    edge set; ``count`` is the number of pooled device-runs per set and
    ``offload_fraction`` the mean per-replication offload rate.  A set that
    stays empty across all replications is omitted from the table rather
    than reported as zero.
    """
    if reps < 1:
        raise ConfigError("reps must be at least 1")
    buckets = {"local": {"delay": [], "energy": [], "acc": []},
               "edge": {"delay": [], "energy": [], "acc": []}}
    fractions = []
    for rep in range(reps):
        scenario = generate_scenario(config, seed=[config.seed, rep])
        run_seed = int(np.random.SeedSequence(
            [config.seed, 0, rep]).generate_state(1, np.uint64)[0])
        alloc = run_scheme(scenario, scheme, seed=run_seed)
        metrics = evaluate_allocation(scenario.params, scenario.cmodel,
                                      scenario.amodel, scenario.devices,
                                      alloc)
        fractions.append(metrics.offload_rate)
        for name, mask in (("local", ~alloc.offload), ("edge", alloc.offload)):
            bucket = buckets[name]
            for i in np.flatnonzero(mask):
                bucket["delay"].append(metrics.per_device[i].delay_s)
                bucket["energy"].append(metrics.per_device[i].energy_j)
                bucket["acc"].append(metrics.per_device[i].accuracy)
    rows = []
    for name in ("local", "edge"):
        bucket = buckets[name]
        if not bucket["delay"]:
            continue
        rows.append({
            "set": name,
            "count": len(bucket["delay"]),
            "avg_delay_s": float(np.mean(bucket["delay"])),
            "avg_energy_j": float(np.mean(bucket["energy"])),
            "avg_accuracy": float(np.mean(bucket["acc"])),
            "offload_fraction": float(np.mean(fractions)),
        })
    path = None
    if out_dir is not None:
        path = Path(out_dir) / csv_name
        _write_csv(path, BREAKDOWN_COLUMNS, rows)
    return rows, path


def weight_simplex(grid: int) -> list[tuple[float, float, float]]:
    """Strictly positive weight triples (i, j, grid-i-j)/grid, i, j >= 1."""
    if grid < 3:
        raise ConfigError("weights grid must be at least 3")
    triples = []
    for i in range(1, grid - 1):
        for j in range(1, grid - i):
            triples.append((i / grid, j / grid, (grid - i - j) / grid))
    return triples


def tradeoff_sweep(config: ScenarioConfig, weights_grid: int,
                   out_dir: str | Path | None = None,
                   csv_name: str = "tradeoff.csv",
                   scheme: str = "channel_aware"
                   ) -> tuple[list[dict], Path | None]:
    """Trace the delay/energy/accuracy surface over the weight simplex.

    Keeps the device draw fixed (config seed) and re-solves for every
    strictly positive weight triple on the grid.
    """
    rows = []
    for b1, b2, b3 in weight_simplex(weights_grid):
        cfg_w = replace(config, beta1=b1, beta2=b2, beta3=b3)
        scenario = generate_scenario(cfg_w)
        run_seed = int(np.random.SeedSequence(
            [config.seed, 0, 0]).generate_state(1, np.uint64)[0])
        alloc = run_scheme(scenario, scheme, seed=run_seed)
        metrics = evaluate_allocation(scenario.params, scenario.cmodel,
                                      scenario.amodel, scenario.devices,
                                      alloc)
        rows.append({"beta1": b1, "beta2": b2, "beta3": b3,
                     "avg_delay_s": metrics.avg_delay_s,
                     "avg_energy_j": metrics.avg_energy_j,
                     "avg_accuracy": metrics.avg_accuracy})
    path = None
    if out_dir is not None:
        path = Path(out_dir) / csv_name
        _write_csv(path, TRADEOFF_COLUMNS, rows)
    return rows, path
