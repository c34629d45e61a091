"""Unit tests for the closed-form single-device local optimizer."""

from __future__ import annotations

import math

import numpy as np
import pytest

from mecoff import (AccuracyModel, ComplexityModel, ConfigError,
                    DeviceProfile, SystemParams, local_cost,
                    local_kkt_residual, solve_local)


def _random_problem(rng):
    params = SystemParams(
        beta1=float(rng.uniform(0.05, 1.0)),
        beta2=float(rng.uniform(0.05, 1.0)),
        beta3=float(rng.uniform(0.0, 1.5)),
        kappa=float(10.0 ** rng.uniform(-29, -27)),
        rho=float(rng.uniform(0.05, 0.5)))
    cmodel = ComplexityModel(m_c0=float(10.0 ** rng.uniform(7, 9)),
                             m_c1=float(10.0 ** rng.uniform(9, 11)))
    amodel = AccuracyModel(m_a0=float(rng.uniform(0.2, 3.0)),
                           m_a1=float(rng.uniform(0.0, 4.0)),
                           m_a2=float(rng.uniform(0.8, 1.0)))
    m_min = int(rng.integers(1, 8))
    device = DeviceProfile(channel_gain=1e-10,
                           local_compute_hz=float(10.0 ** rng.uniform(8.5, 9.5)),
                           m_min=m_min,
                           m_max=int(rng.integers(m_min, 17)))
    return params, cmodel, amodel, device


class TestOptimalSpeed:
    def test_interior_cube_root(self, cmodel, amodel):
        params = SystemParams(beta1=0.2, beta2=0.2, kappa=1e-28)
        device = DeviceProfile(channel_gain=1e-10, local_compute_hz=1.8e9,
                               m_min=12, m_max=16)
        sol = solve_local(params, cmodel, amodel, device)
        # beta1 / (2 beta2 kappa) = 5e27, whose cube root sits below the cap.
        assert sol.local_hz == pytest.approx(1709975946.6766949, rel=1e-12)
        assert sol.local_hz < device.local_compute_hz

    def test_tiny_cap_clamps(self, cmodel, amodel, params):
        device = DeviceProfile(channel_gain=1e-10, local_compute_hz=1e6,
                               m_min=12, m_max=16)
        sol = solve_local(params, cmodel, amodel, device)
        assert sol.local_hz == 1e6

    def test_no_energy_price_runs_at_cap(self, cmodel, amodel):
        params = SystemParams(beta1=0.3, beta2=0.0, beta3=0.6)
        device = DeviceProfile(channel_gain=1e-10, local_compute_hz=1.8e9,
                               m_min=12, m_max=16)
        sol = solve_local(params, cmodel, amodel, device)
        assert sol.local_hz == device.local_compute_hz

    def test_zero_delay_weight_with_energy_price_rejected(self, cmodel,
                                                          amodel):
        params = SystemParams(beta1=0.0, beta2=0.5, beta3=0.5)
        device = DeviceProfile(channel_gain=1e-10)
        with pytest.raises(ConfigError):
            solve_local(params, cmodel, amodel, device)

    def test_speed_monotone_in_weights(self, cmodel, amodel):
        device = DeviceProfile(channel_gain=1e-10, local_compute_hz=1e12,
                               m_min=1, m_max=16)
        f_base = solve_local(SystemParams(beta1=0.2, beta2=0.2), cmodel,
                             amodel, device).local_hz
        f_delay = solve_local(SystemParams(beta1=0.4, beta2=0.2), cmodel,
                              amodel, device).local_hz
        f_energy = solve_local(SystemParams(beta1=0.2, beta2=0.4), cmodel,
                               amodel, device).local_hz
        f_kappa = solve_local(SystemParams(beta1=0.2, beta2=0.2, kappa=4e-28),
                              cmodel, amodel, device).local_hz
        assert f_delay > f_base
        assert f_energy < f_base
        assert f_kappa < f_base


class TestOptimalFrames:
    def test_accuracy_dominant_maxes_frames(self, cmodel):
        params = SystemParams(beta1=0.1, beta2=0.1, beta3=50.0)
        amodel = AccuracyModel(m_a0=1.2, m_a1=2.0, m_a2=0.95)
        device = DeviceProfile(channel_gain=1e-10, m_min=1, m_max=16)
        sol = solve_local(params, cmodel, amodel, device)
        assert sol.frames == 16
        assert sol.frames_real == 16.0

    def test_no_accuracy_reward_mins_frames(self, cmodel):
        params = SystemParams(beta1=0.2, beta2=0.2, beta3=0.0)
        device = DeviceProfile(channel_gain=1e-10, m_min=3, m_max=16)
        sol = solve_local(params, cmodel, AccuracyModel(), device)
        assert sol.frames == 3

    def test_flat_complexity_maxes_frames(self, amodel):
        params = SystemParams(beta1=0.2, beta2=0.2, beta3=0.6)
        cmodel = ComplexityModel(m_c0=0.0, m_c1=1e10)
        device = DeviceProfile(channel_gain=1e-10, m_min=1, m_max=16)
        sol = solve_local(params, cmodel, amodel, device)
        assert sol.frames == 16

    def test_integer_choice_beats_other_neighbour(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            params, cmodel, amodel, device = _random_problem(rng)
            sol = solve_local(params, cmodel, amodel, device)
            lo = max(int(math.floor(sol.frames_real)), device.m_min)
            hi = min(int(math.ceil(sol.frames_real)), device.m_max)
            assert sol.frames in (lo, hi)
            for m in {lo, hi}:
                assert sol.cost <= local_cost(params, cmodel, amodel, device,
                                              m, sol.local_hz) + 1e-12


class TestGridDominance:
    def test_beats_dense_grid(self):
        rng = np.random.default_rng(2024)
        for _ in range(10):
            params, cmodel, amodel, device = _random_problem(rng)
            sol = solve_local(params, cmodel, amodel, device)
            speeds = np.linspace(device.local_compute_hz / 1000.0,
                                 device.local_compute_hz, 1000)
            best = math.inf
            for m in range(device.m_min, device.m_max + 1):
                costs = [local_cost(params, cmodel, amodel, device, m, f)
                         for f in speeds]
                best = min(best, min(costs))
            assert sol.cost <= best + 1e-9


class TestKktResidual:
    def test_interior_solution_is_stationary(self, cmodel, amodel, params):
        device = DeviceProfile(channel_gain=1e-10, local_compute_hz=1.8e9,
                               m_min=1, m_max=64)
        sol = solve_local(params, cmodel, amodel, device)
        assert device.m_min < sol.frames_real < device.m_max
        scale = max(1.0, abs(sol.cost))
        assert local_kkt_residual(params, cmodel, amodel, device,
                                  sol) < 1e-6 * scale

    def test_random_solutions_are_stationary(self):
        rng = np.random.default_rng(55)
        for _ in range(25):
            params, cmodel, amodel, device = _random_problem(rng)
            sol = solve_local(params, cmodel, amodel, device)
            scale = max(1.0, abs(sol.cost))
            assert local_kkt_residual(params, cmodel, amodel, device,
                                      sol) < 1e-6 * scale

    def test_cost_decreasing_below_interior_speed_optimum(self, cmodel,
                                                          amodel):
        # Below the interior speed optimum the cost still falls with f, so
        # a capped device is stationary: the outward push is feasible-side.
        params = SystemParams(beta1=0.2, beta2=0.2, kappa=1e-28)
        device = DeviceProfile(channel_gain=1e-10, local_compute_hz=1e9,
                               m_min=12, m_max=16)
        sol = solve_local(params, cmodel, amodel, device)
        assert sol.local_hz == 1e9
        f = sol.local_hz
        eps = f * 1e-6
        lower = local_cost(params, cmodel, amodel, device, sol.frames_real,
                           f - eps)
        upper = local_cost(params, cmodel, amodel, device, sol.frames_real, f)
        assert upper < lower
        assert local_kkt_residual(params, cmodel, amodel, device, sol) < 1e-9

    def test_matches_finite_differences(self, cmodel, amodel, params):
        device = DeviceProfile(channel_gain=1e-10, local_compute_hz=1.8e9,
                               m_min=1, m_max=64)
        sol = solve_local(params, cmodel, amodel, device)
        f, m = sol.local_hz, sol.frames_real

        def cost(ff, mm):
            return local_cost(params, cmodel, amodel, device, mm, ff)

        hf = f * 1e-6
        hm = 1e-6
        d_f = (cost(f + hf, m) - cost(f - hf, m)) / (2.0 * hf)
        d_m = (cost(f, m + hm) - cost(f, m - hm)) / (2.0 * hm)
        # Both numerical partials vanish at the interior optimum.
        assert abs(d_f) * f <= 1e-5 * max(1.0, abs(sol.cost))
        assert abs(d_m) <= 1e-5 * max(1.0, abs(sol.cost))


class TestIndependence:
    def test_solution_ignores_other_devices(self, cmodel, amodel, params):
        device = DeviceProfile(channel_gain=1e-10, m_min=12, m_max=16)
        alone = solve_local(params, cmodel, amodel, device)
        again = solve_local(params, cmodel, amodel, device)
        assert alone == again
