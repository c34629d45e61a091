"""Core system model: parameter containers and per-device cost primitives.

The setting is a single-cell mobile edge computing system.  Each device runs
video-based DNN inference on a stream of frames and either executes the
network locally or offloads the (compressed) frames to the base station over
TDMA and lets the edge server run the inference.  The tunable knobs per
device are the offload decision, the input frame resolution ``M`` (number of
frames stacked into one 3-D inference input), the local CPU speed, and - for
offloaded devices - the edge CPU share and the fraction of the radio frame
used for uplink transmission.

Inference complexity grows affinely in ``M`` while accuracy saturates, which
is what creates the latency/energy/accuracy trade-off that the solvers in
the sibling modules optimise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InfeasibleAllocationError

# Relative tolerance used when checking the coupled resource constraints
# (time shares summing to one, edge cycles summing to the budget).
FEASIBILITY_RTOL = 1e-9


@dataclass
class SystemParams:
    """System-wide constants.

    Parameters
    ----------
    beta1, beta2, beta3 : float
        Non-negative scalarisation weights for delay, energy and accuracy.
    bandwidth_hz : float
        Uplink bandwidth shared by the devices (TDMA).
    noise_density_dbm_hz : float
        Noise power spectral density at the base station in dBm/Hz.
    kappa : float
        Effective switched-capacitance coefficient of the device CPUs
        (energy per cycle scales with ``kappa * f**2``).
    rho : float
        Processor cycles needed per multiply-accumulate operation.
    frame_bits : float
        Size of one compressed video frame in bits.
    edge_compute_hz : float
        Total CPU frequency budget of the edge server.
    radio_frame_s : float
        Duration of one radio frame; time shares are fractions of it.
    """

    beta1: float = 0.2
    beta2: float = 0.2
    beta3: float = 0.6
    bandwidth_hz: float = 5e6
    noise_density_dbm_hz: float = -174.0
    kappa: float = 1e-28
    rho: float = 0.12
    frame_bits: float = 2000.0
    edge_compute_hz: float = 22e9
    radio_frame_s: float = 1.0

    def __post_init__(self) -> None:
        for name in ("beta1", "beta2", "beta3"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        for name in ("bandwidth_hz", "kappa", "rho", "frame_bits",
                     "edge_compute_hz", "radio_frame_s"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")

    @property
    def noise_density_w_hz(self) -> float:
        """Noise power spectral density converted to W/Hz."""
        return 10.0 ** ((self.noise_density_dbm_hz - 30.0) / 10.0)


@dataclass
class DeviceProfile:
    """Per-device characteristics.

    ``m_min``/``m_max`` bound the admissible integer frame resolution;
    ``m_min`` is normally derived from ``accuracy_floor`` by the scenario
    generator but can be set directly.
    """

    channel_gain: float
    tx_power_w: float = 0.1
    local_compute_hz: float = 1.8e9
    m_min: int = 1
    m_max: int = 16
    accuracy_floor: float = 0.0

    def __post_init__(self) -> None:
        if self.channel_gain <= 0:
            raise ConfigError("channel_gain must be positive")
        if self.tx_power_w <= 0:
            raise ConfigError("tx_power_w must be positive")
        if self.local_compute_hz <= 0:
            raise ConfigError("local_compute_hz must be positive")
        if not (1 <= self.m_min <= self.m_max):
            raise ConfigError(
                f"frame bounds must satisfy 1 <= m_min <= m_max, "
                f"got [{self.m_min}, {self.m_max}]")


@dataclass
class ComplexityModel:
    """Affine model of inference MACs as a function of frame resolution.

    ``macs(M) = m_c0 * M + m_c1`` with ``m_c0 >= 0`` (3-D convolutions scale
    with the temporal extent of the input; the offset collects the
    M-independent layers).
    """

    m_c0: float = 1.0e8
    m_c1: float = 1.5e10

    def __post_init__(self) -> None:
        if self.m_c0 < 0:
            raise ConfigError("m_c0 must be non-negative")
        if self.m_c1 < 0:
            raise ConfigError("m_c1 must be non-negative")


@dataclass
class AccuracyModel:
    """Saturating accuracy model ``phi(M) = -m_a0/(M + m_a1) + m_a2``.

    Increasing the frame resolution improves accuracy with diminishing
    returns; ``m_a2`` is the asymptote.  Requires ``m_a0 >= 0`` and
    ``m_a1 > -1`` so the model is increasing and finite for ``M >= 1``.
    """

    m_a0: float = 1.2
    m_a1: float = 2.0
    m_a2: float = 0.95

    def __post_init__(self) -> None:
        if self.m_a0 < 0:
            raise ConfigError("m_a0 must be non-negative")
        if self.m_a1 <= -1.0:
            raise ConfigError("m_a1 must be greater than -1")


@dataclass
class Conv3dLayerSpec:
    """Shape of a single 3-D convolution layer (channels-first)."""

    in_channels: int
    out_channels: int
    kernel: tuple[int, int, int]
    stride: tuple[int, int, int] = (1, 1, 1)
    padding: tuple[int, int, int] = (0, 0, 0)

    def __post_init__(self) -> None:
        if self.in_channels <= 0 or self.out_channels <= 0:
            raise ConfigError("channel counts must be positive")
        for name in ("kernel", "stride", "padding"):
            value = tuple(getattr(self, name))
            setattr(self, name, value)
            if len(value) != 3:
                raise ConfigError(f"{name} must have three entries")
        if any(k <= 0 for k in self.kernel) or any(s <= 0 for s in self.stride):
            raise ConfigError("kernel and stride entries must be positive")
        if any(p < 0 for p in self.padding):
            raise ConfigError("padding entries must be non-negative")


@dataclass
class Allocation:
    """A complete resource assignment for all devices.

    Arrays are aligned with the device list: ``offload`` holds the binary
    decisions, ``frames`` the integer resolutions, ``time_share`` the TDMA
    fractions, ``local_hz``/``edge_hz`` the CPU frequencies.  Entries of
    ``time_share`` and ``edge_hz`` are only meaningful where ``offload`` is
    set, and ``local_hz`` where it is not.
    """

    offload: np.ndarray
    frames: np.ndarray
    time_share: np.ndarray
    local_hz: np.ndarray
    edge_hz: np.ndarray

    def __post_init__(self) -> None:
        self.offload = np.asarray(self.offload, dtype=bool)
        self.frames = np.asarray(self.frames, dtype=np.int64)
        self.time_share = np.asarray(self.time_share, dtype=float)
        self.local_hz = np.asarray(self.local_hz, dtype=float)
        self.edge_hz = np.asarray(self.edge_hz, dtype=float)
        n = self.offload.shape[0]
        for name in ("frames", "time_share", "local_hz", "edge_hz"):
            if getattr(self, name).shape != (n,):
                raise ConfigError(f"allocation field {name} has wrong shape")

    @property
    def n_devices(self) -> int:
        return int(self.offload.shape[0])


@dataclass
class DeviceMetrics:
    """Per-device outcome of an allocation."""

    delay_s: float
    energy_j: float
    accuracy: float
    cost: float


@dataclass
class AllocationMetrics:
    """Aggregate outcome of an allocation over all devices."""

    per_device: list[DeviceMetrics] = field(default_factory=list)
    total_cost: float = 0.0
    avg_delay_s: float = 0.0
    avg_energy_j: float = 0.0
    avg_accuracy: float = 0.0
    offload_rate: float = 0.0


def conv3d_output_dims(input_dims: tuple[int, int, int],
                       layer: Conv3dLayerSpec) -> tuple[int, int, int]:
    """Spatio-temporal output size of a 3-D convolution.

    ``input_dims`` is ``(T, H, W)``; the per-axis output extent is
    ``floor((n - k + 2p) / s) + 1``.
    """
    out = []
    for n, k, s, p in zip(input_dims, layer.kernel, layer.stride, layer.padding):
        extent = (n - k + 2 * p) // s + 1
        if extent <= 0:
            raise ConfigError(
                f"layer produces empty output for input extent {n} "
                f"(kernel {k}, stride {s}, padding {p})")
        out.append(int(extent))
    return tuple(out)  # type: ignore[return-value]


def conv3d_macs(layer: Conv3dLayerSpec,
                output_dims: tuple[int, int, int]) -> int:
    """Multiply-accumulate count of one 3-D convolution layer.

    Each output element needs ``in_channels * prod(kernel)`` MACs and there
    are ``out_channels * prod(output_dims)`` output elements.
    """
    k_prod = math.prod(layer.kernel)
    o_prod = math.prod(output_dims)
    return int(layer.in_channels * layer.out_channels * k_prod * o_prod)


def linear_complexity(cmodel: ComplexityModel, frames: float) -> float:
    """Total inference MACs at frame resolution ``frames``."""
    return cmodel.m_c0 * frames + cmodel.m_c1


def accuracy(amodel: AccuracyModel, frames: float) -> float:
    """Inference accuracy at frame resolution ``frames``."""
    if frames + amodel.m_a1 <= 0:
        raise ConfigError(
            f"accuracy model undefined at frames={frames} "
            f"(requires frames + m_a1 > 0)")
    return -amodel.m_a0 / (frames + amodel.m_a1) + amodel.m_a2


def achievable_rate(params: SystemParams, device: DeviceProfile) -> float:
    """Uplink rate in bit/s when the device transmits over the full band."""
    n0 = params.noise_density_w_hz
    snr = device.tx_power_w * device.channel_gain / (params.bandwidth_hz * n0)
    return params.bandwidth_hz * math.log2(1.0 + snr)


def local_cost(params: SystemParams, cmodel: ComplexityModel,
               amodel: AccuracyModel, device: DeviceProfile,
               frames: float, local_hz: float) -> float:
    """Weighted cost of executing inference on the device itself.

    Delay is ``rho * macs / f``, energy ``kappa * rho * macs * f**2``; the
    accuracy term enters with negative weight, so higher accuracy lowers
    the cost.
    """
    if local_hz <= 0:
        raise ConfigError("local_hz must be positive for local execution")
    cycles = params.rho * linear_complexity(cmodel, frames)
    delay = cycles / local_hz
    energy = params.kappa * cycles * local_hz ** 2
    return (params.beta1 * delay + params.beta2 * energy
            - params.beta3 * accuracy(amodel, frames))


def edge_cost(params: SystemParams, cmodel: ComplexityModel,
              amodel: AccuracyModel, device: DeviceProfile,
              frames: float, edge_hz: float, time_share: float) -> float:
    """Weighted cost of offloading inference to the edge server.

    Delay combines edge execution with uplink transmission of ``frames``
    compressed frames inside the device's TDMA share; device energy is
    spent on transmission only.
    """
    if edge_hz <= 0:
        raise ConfigError("edge_hz must be positive for offloaded execution")
    if time_share <= 0:
        raise ConfigError("time_share must be positive for offloaded execution")
    rate = achievable_rate(params, device)
    cycles = params.rho * linear_complexity(cmodel, frames)
    tx_bits = frames * params.frame_bits
    delay = cycles / edge_hz + tx_bits / (rate * time_share)
    energy = tx_bits * device.tx_power_w / rate
    return (params.beta1 * delay + params.beta2 * energy
            - params.beta3 * accuracy(amodel, frames))


def _device_metrics(params: SystemParams, cmodel: ComplexityModel,
                    amodel: AccuracyModel, device: DeviceProfile,
                    offload: bool, frames: int, time_share: float,
                    local_hz: float, edge_hz: float) -> DeviceMetrics:
    cycles = params.rho * linear_complexity(cmodel, frames)
    acc = accuracy(amodel, frames)
    if offload:
        rate = achievable_rate(params, device)
        tx_bits = frames * params.frame_bits
        delay = cycles / edge_hz + tx_bits / (rate * time_share)
        energy = tx_bits * device.tx_power_w / rate
    else:
        delay = cycles / local_hz
        energy = params.kappa * cycles * local_hz ** 2
    cost = params.beta1 * delay + params.beta2 * energy - params.beta3 * acc
    return DeviceMetrics(delay_s=delay, energy_j=energy, accuracy=acc, cost=cost)


def check_allocation(params: SystemParams, devices: list[DeviceProfile],
                     allocation: Allocation) -> list[str]:
    """Return a list of constraint-violation messages (empty if feasible)."""
    violations: list[str] = []
    n = allocation.n_devices
    if n != len(devices):
        return [f"allocation covers {n} devices, expected {len(devices)}"]
    off = allocation.offload
    for i, dev in enumerate(devices):
        m = int(allocation.frames[i])
        if not (dev.m_min <= m <= dev.m_max):
            violations.append(
                f"device {i}: frames {m} outside [{dev.m_min}, {dev.m_max}]")
        if off[i]:
            if allocation.time_share[i] <= 0:
                violations.append(
                    f"device {i}: offloaded with non-positive time share")
            if allocation.edge_hz[i] <= 0:
                violations.append(
                    f"device {i}: offloaded with non-positive edge frequency")
        else:
            f_loc = allocation.local_hz[i]
            if f_loc <= 0:
                violations.append(
                    f"device {i}: local execution with non-positive frequency")
            elif f_loc > dev.local_compute_hz * (1.0 + FEASIBILITY_RTOL):
                violations.append(
                    f"device {i}: local frequency {f_loc:.6g} exceeds cap "
                    f"{dev.local_compute_hz:.6g}")
        if allocation.time_share[i] < 0:
            violations.append(f"device {i}: negative time share")
        if allocation.edge_hz[i] < 0:
            violations.append(f"device {i}: negative edge frequency")
    share_sum = float(np.sum(allocation.time_share[off]))
    if share_sum > 1.0 + FEASIBILITY_RTOL:
        violations.append(
            f"offloaded time shares sum to {share_sum:.12g} > 1")
    edge_sum = float(np.sum(allocation.edge_hz[off]))
    budget = params.edge_compute_hz
    if edge_sum > budget * (1.0 + FEASIBILITY_RTOL):
        violations.append(
            f"edge frequencies sum to {edge_sum:.12g} > budget {budget:.12g}")
    return violations


def evaluate_allocation(params: SystemParams, cmodel: ComplexityModel,
                        amodel: AccuracyModel, devices: list[DeviceProfile],
                        allocation: Allocation) -> AllocationMetrics:
    """Compute per-device and aggregate metrics of a feasible allocation.

    Raises
    ------
    InfeasibleAllocationError
        If any constraint is violated; the error lists all violations.
    """
    violations = check_allocation(params, devices, allocation)
    if violations:
        raise InfeasibleAllocationError(violations)
    per_device = [
        _device_metrics(params, cmodel, amodel, dev,
                        bool(allocation.offload[i]),
                        int(allocation.frames[i]),
                        float(allocation.time_share[i]),
                        float(allocation.local_hz[i]),
                        float(allocation.edge_hz[i]))
        for i, dev in enumerate(devices)
    ]
    n = len(per_device)
    return AllocationMetrics(
        per_device=per_device,
        total_cost=float(sum(m.cost for m in per_device)),
        avg_delay_s=float(sum(m.delay_s for m in per_device) / n),
        avg_energy_j=float(sum(m.energy_j for m in per_device) / n),
        avg_accuracy=float(sum(m.accuracy for m in per_device) / n),
        offload_rate=float(np.count_nonzero(allocation.offload) / n),
    )
