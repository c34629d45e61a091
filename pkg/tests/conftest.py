"""Shared fixtures for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from mecoff import AccuracyModel, ComplexityModel, DeviceProfile, SystemParams


@pytest.fixture
def params() -> SystemParams:
    return SystemParams()


@pytest.fixture
def cmodel() -> ComplexityModel:
    return ComplexityModel()


@pytest.fixture
def amodel() -> AccuracyModel:
    return AccuracyModel()


@pytest.fixture
def make_devices():
    """Factory for random device lists with gains spanning the cell."""

    def _make(seed: int, n: int, m_min: int = 12, m_max: int = 16
              ) -> list[DeviceProfile]:
        rng = np.random.default_rng(seed)
        gains = 10.0 ** rng.uniform(-13.0, -9.0, size=n)
        return [DeviceProfile(channel_gain=float(g), m_min=m_min, m_max=m_max)
                for g in gains]

    return _make


@pytest.fixture
def device_for_snr():
    """Device whose uplink SNR at full band equals the requested value."""

    def _make(params: SystemParams, snr: float, tx_power_w: float = 0.1,
              **kwargs) -> DeviceProfile:
        gain = snr * params.bandwidth_hz * params.noise_density_w_hz / tx_power_w
        return DeviceProfile(channel_gain=gain, tx_power_w=tx_power_w, **kwargs)

    return _make
