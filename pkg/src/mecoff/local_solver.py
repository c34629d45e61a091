"""Closed-form optimisation of a single device that executes locally.

For local execution the per-device cost decouples from everything else, and
both knobs have closed-form optima: the CPU speed balances the delay and
energy terms (a cube-root expression independent of the frame resolution),
and given that speed the continuous frame resolution balances the marginal
compute cost against the marginal accuracy gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .models import (AccuracyModel, ComplexityModel, DeviceProfile,
                     SystemParams, local_cost)


@dataclass
class LocalSolution:
    """Optimal local schedule for one device.

    ``frames_real`` is the box-clamped continuous optimum; ``frames`` the
    cost-minimising integer rounding of it.
    """

    local_hz: float
    frames_real: float
    frames: int
    cost: float


def _optimal_local_hz(params: SystemParams, device: DeviceProfile) -> float:
    # With no energy price the delay term alone pushes f to the cap.
    if params.beta2 * params.kappa == 0.0:
        return device.local_compute_hz
    if params.beta1 == 0.0:
        raise ConfigError(
            "local CPU speed is unbounded below when beta1 == 0; "
            "set a positive delay weight")
    f_star = (params.beta1 / (2.0 * params.beta2 * params.kappa)) ** (1.0 / 3.0)
    return min(f_star, device.local_compute_hz)


def solve_local(params: SystemParams, cmodel: ComplexityModel,
                amodel: AccuracyModel, device: DeviceProfile) -> LocalSolution:
    """Closed-form minimiser of the local execution cost.

    The CPU speed optimum does not depend on the frame resolution, so it is
    computed first; the continuous resolution optimum then follows from the
    stationarity condition of the remaining one-dimensional convex problem,
    and the integer solution is whichever neighbour costs less.
    """
    f_star = _optimal_local_hz(params, device)
    # Marginal compute price of one extra frame at speed f_star.
    price = (params.beta1 * params.rho * cmodel.m_c0 / f_star
             + params.beta2 * params.kappa * params.rho * cmodel.m_c0
             * f_star ** 2)
    gain = params.beta3 * amodel.m_a0
    if gain <= 0.0:
        m_real = float(device.m_min)
    elif price <= 0.0:
        m_real = float(device.m_max)
    else:
        m_real = math.sqrt(gain / price) - amodel.m_a1
        m_real = min(max(m_real, float(device.m_min)), float(device.m_max))
    lo = int(math.floor(m_real))
    hi = int(math.ceil(m_real))
    lo = max(lo, device.m_min)
    hi = min(hi, device.m_max)
    cost_lo = local_cost(params, cmodel, amodel, device, lo, f_star)
    if hi == lo:
        m_int, cost = lo, cost_lo
    else:
        cost_hi = local_cost(params, cmodel, amodel, device, hi, f_star)
        if cost_hi < cost_lo:
            m_int, cost = hi, cost_hi
        else:
            m_int, cost = lo, cost_lo
    return LocalSolution(local_hz=f_star, frames_real=m_real,
                         frames=m_int, cost=cost)


def local_kkt_residual(params: SystemParams, cmodel: ComplexityModel,
                       amodel: AccuracyModel, device: DeviceProfile,
                       solution: LocalSolution) -> float:
    """Stationarity residual of the continuous local problem.

    Evaluates the cost partials at ``(local_hz, frames_real)`` and measures
    the violation of the first-order conditions, accounting for the active
    bounds.  Zero (to rounding) certifies the closed form.
    """
    f = solution.local_hz
    m = solution.frames_real
    cycles = params.rho * (cmodel.m_c0 * m + cmodel.m_c1)
    d_f = (-params.beta1 * cycles / f ** 2
           + 2.0 * params.beta2 * params.kappa * cycles * f)
    d_m = (params.beta1 * params.rho * cmodel.m_c0 / f
           + params.beta2 * params.kappa * params.rho * cmodel.m_c0 * f ** 2
           - params.beta3 * amodel.m_a0 / (m + amodel.m_a1) ** 2)

    cap = device.local_compute_hz
    if f >= cap * (1.0 - 1e-12):
        res_f = max(0.0, d_f)  # pushing outward at the cap is a violation
    else:
        res_f = abs(d_f)
    at_lo = m <= device.m_min + 1e-9
    at_hi = m >= device.m_max - 1e-9
    if at_lo and at_hi:
        res_m = 0.0  # degenerate box: the variable is pinned entirely
    elif at_lo:
        res_m = max(0.0, -d_m)
    elif at_hi:
        res_m = max(0.0, d_m)
    else:
        res_m = abs(d_m)
    return max(res_f, res_m)
