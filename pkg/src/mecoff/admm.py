"""Decomposition-based solver coordinating all devices via consensus.

The mixed-integer allocation problem splits per device once the coupled
resources (edge CPU cycles, TDMA shares) are given local copies tied to
global values through multipliers.  Each iteration then consists of

1. a per-device update that solves both execution branches (local / edge)
   in log variables and keeps the cheaper one,
2. a global update that shifts the resource copies back into the coupled
   budgets, with the shift found by bisection, and
3. a multiplier (dual ascent) step on the copy residuals.

The iterate is rounded to an integer, exactly feasible allocation after
every sweep; the trace records the true cost of that rounded solution and
the stopping rule acts on consecutive rounded costs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, ConvergenceError
from .models import (AccuracyModel, Allocation, ComplexityModel,
                     DeviceProfile, SystemParams, achievable_rate, local_cost)
from .edge_solver import reduced_edge_objective, share_given_m

_INNER_TOL = 1e-10
_INNER_MAX_ITER = 300
_MU_CAP = 1e6


@dataclass
class AdmmOptions:
    s: float = 0.5
    delta: float = 1e-4
    max_iters: int = 100
    init: str = "uniform"  # or "zero"

    def __post_init__(self) -> None:
        if self.s <= 0:
            raise ConfigError("penalty step s must be positive")
        if self.delta < 0:
            raise ConfigError("stopping tolerance delta must be non-negative")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if self.init not in ("uniform", "zero"):
            raise ConfigError("init must be 'uniform' or 'zero'")


@dataclass
class AdmmState:
    """Per-device local variables, global copies and multipliers.

    All continuous quantities live in the logarithmic domain: ``m_hat`` is
    log frames, ``f_md_hat`` log local CPU speed, ``y``/``z`` the local
    copies of log edge CPU share and log TDMA share, ``f_e_hat``/``t_hat``
    the corresponding global values.
    """

    x: np.ndarray
    m_hat: np.ndarray
    f_md_hat: np.ndarray
    y: np.ndarray
    z: np.ndarray
    f_e_hat: np.ndarray
    t_hat: np.ndarray
    theta_f: np.ndarray
    theta_t: np.ndarray
    s: float = 0.5
    delta: float = 1e-4
    iteration: int = 0


@dataclass
class AdmmTrace:
    """Per-iteration history of the solve (length = iterations run)."""

    objective: list[float] = field(default_factory=list)
    primal_res_f: list[float] = field(default_factory=list)
    primal_res_t: list[float] = field(default_factory=list)
    x_flips: list[int] = field(default_factory=list)
    offload_rate: list[float] = field(default_factory=list)
    converged: bool = False

    def __len__(self) -> int:
        return len(self.objective)


def write_trace_csv(trace: AdmmTrace, path: str | Path) -> None:
    """Write the iteration history as ``iter,objective,primal_res_f,...``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "objective", "primal_res_f",
                         "primal_res_t", "offload_rate"])
        for i in range(len(trace)):
            writer.writerow([i + 1,
                             repr(trace.objective[i]),
                             repr(trace.primal_res_f[i]),
                             repr(trace.primal_res_t[i]),
                             repr(trace.offload_rate[i])])


# ---------------------------------------------------------------------------
# Per-device branch subproblems (step 1)
# ---------------------------------------------------------------------------


def _solve_local_branch(coef, lo: float, hi: float, ln_cap: float,
                        m0: float) -> tuple[float, float, float]:
    """Exact coordinate minimisation of the local-execution surrogate.

    Objective a*e^(mh-f) + b*e^(-f) + c*e^(mh+2f) + d*e^(2f) + e*e^(-mh)
    over mh in [lo, hi], f <= ln_cap.  Both coordinate minimisers are
    closed-form, so alternation converges to the joint box optimum.
    """
    a, b, c, d, e = coef
    if a + b <= 0.0:
        raise ConfigError("local branch requires a positive delay weight")
    mh = min(max(m0, lo), hi)
    fh = ln_cap
    for _ in range(200):
        if c == 0.0 and d == 0.0:
            fh_new = ln_cap
        else:
            fh_new = min((1.0 / 3.0) * math.log(
                (a * math.exp(mh) + b) / (2.0 * (c * math.exp(mh) + d))),
                ln_cap)
        if e <= 0.0:
            mh_new = lo
        else:
            denom = a * math.exp(-fh_new) + c * math.exp(2.0 * fh_new)
            mh_new = min(max(0.5 * math.log(e / denom), lo), hi)
        if abs(fh_new - fh) < 1e-13 and abs(mh_new - mh) < 1e-13:
            mh, fh = mh_new, fh_new
            break
        mh, fh = mh_new, fh_new
    value = (a * math.exp(mh - fh) + b * math.exp(-fh)
             + c * math.exp(mh + 2.0 * fh) + d * math.exp(2.0 * fh)
             + e * math.exp(-mh))
    return mh, fh, value


def _edge_branch_fns(coef, theta_f, theta_t, s, fe, tg):
    a, b, c, d, e = coef

    def value(v):
        mh, y, z = v
        with np.errstate(over="ignore"):
            return (a * np.exp(mh - y) + b * np.exp(-y) + c * np.exp(mh - z)
                    + d * np.exp(mh) + e * np.exp(-mh)
                    + theta_f * y + 0.5 * s * (y - fe) ** 2
                    + theta_t * z + 0.5 * s * (z - tg) ** 2)

    def grad(v):
        mh, y, z = v
        t1 = a * math.exp(mh - y)
        t2 = b * math.exp(-y)
        t3 = c * math.exp(mh - z)
        return np.array([
            t1 + t3 + d * math.exp(mh) - e * math.exp(-mh),
            -t1 - t2 + theta_f + s * (y - fe),
            -t3 + theta_t + s * (z - tg),
        ])

    def hess(v):
        mh, y, z = v
        t1 = a * math.exp(mh - y)
        t2 = b * math.exp(-y)
        t3 = c * math.exp(mh - z)
        h = np.zeros((3, 3))
        h[0, 0] = t1 + t3 + d * math.exp(mh) + e * math.exp(-mh)
        h[1, 1] = t1 + t2 + s
        h[2, 2] = t3 + s
        h[0, 1] = h[1, 0] = -t1
        h[0, 2] = h[2, 0] = -t3
        return h

    return value, grad, hess


def _damped_newton(value, grad, hess, x0, free, tol, max_iter,
                   device_index: int):
    x = np.asarray(x0, dtype=float).copy()
    free = np.asarray(free, dtype=bool)
    res = math.inf
    for _ in range(max_iter):
        g = grad(x)[free]
        res = float(np.max(np.abs(g))) if g.size else 0.0
        if res <= tol:
            return x, res
        h = hess(x)[np.ix_(free, free)]
        try:
            step = np.linalg.solve(h, -g)
        except np.linalg.LinAlgError:
            step = -g
        if g @ step > 0:  # not a descent direction; fall back to gradient
            step = -g
        base = value(x)
        alpha = 1.0
        while alpha > 1e-16:
            cand = x.copy()
            cand[free] += alpha * step
            if value(cand) <= base + 1e-4 * alpha * (g @ step):
                x = cand
                break
            alpha *= 0.5
        else:
            break
    # A stall within two decades of the tolerance is the rounding floor of
    # the Newton system, not a modelling failure; only a genuinely large
    # residual is worth aborting the whole solve for.
    if res > 100.0 * tol:
        raise ConvergenceError(
            f"inner solver stalled for device {device_index} "
            f"(gradient residual {res:.3e})")
    return x, res


def _solve_edge_branch(coef, lo: float, hi: float, theta_f, theta_t, s,
                       fe, tg, v0, device_index: int
                       ) -> tuple[float, float, float, float]:
    a, b, c, d, e = coef
    value, grad, hess = _edge_branch_fns(coef, theta_f, theta_t, s, fe, tg)
    start = np.array([min(max(v0[0], lo), hi), v0[1], v0[2]])
    if e <= 0.0:
        # No accuracy reward: frames go to the lower box edge directly.
        start[0] = lo
        sol, _ = _damped_newton(value, grad, hess, start,
                                [False, True, True], _INNER_TOL,
                                _INNER_MAX_ITER, device_index)
        return sol[0], sol[1], sol[2], float(value(sol))
    sol, _ = _damped_newton(value, grad, hess, start, [True, True, True],
                            _INNER_TOL, _INNER_MAX_ITER, device_index)
    if sol[0] < lo or sol[0] > hi:
        # Partial minimisation over (y, z) is convex in mh, so the box
        # optimum sits at the violated bound.
        sol[0] = lo if sol[0] < lo else hi
        sol, _ = _damped_newton(value, grad, hess, sol,
                                [False, True, True], _INNER_TOL,
                                _INNER_MAX_ITER, device_index)
    return sol[0], sol[1], sol[2], float(value(sol))


def admm_local_update(params: SystemParams, cmodel: ComplexityModel,
                      amodel: AccuracyModel, devices: list[DeviceProfile],
                      state: AdmmState) -> AdmmState:
    """Step 1: per-device branch solves and execution-mode choice.

    For each device both branches are solved against the current global
    copies; the device adopts the branch with the lower augmented cost
    (ties prefer local execution).
    """
    s = state.s
    b1rho = params.beta1 * params.rho
    b2kr = params.beta2 * params.kappa * params.rho
    e_acc = params.beta3 * amodel.m_a0
    for i, dev in enumerate(devices):
        lo = math.log(dev.m_min)
        hi = math.log(dev.m_max)
        rate = achievable_rate(params, dev)
        local_coef = (b1rho * cmodel.m_c0, b1rho * cmodel.m_c1,
                      b2kr * cmodel.m_c0, b2kr * cmodel.m_c1, e_acc)
        mh0, fh0, f0_val = _solve_local_branch(
            local_coef, lo, hi, math.log(dev.local_compute_hz),
            state.m_hat[i])
        y0 = state.f_e_hat[i] - state.theta_f[i] / s
        z0 = state.t_hat[i] - state.theta_t[i] / s
        penalty0 = (state.theta_f[i] * y0
                    + 0.5 * s * (y0 - state.f_e_hat[i]) ** 2
                    + state.theta_t[i] * z0
                    + 0.5 * s * (z0 - state.t_hat[i]) ** 2)
        value0 = f0_val + penalty0

        edge_coef = (b1rho * cmodel.m_c0, b1rho * cmodel.m_c1,
                     params.beta1 * params.frame_bits / rate,
                     params.beta2 * params.frame_bits * dev.tx_power_w / rate,
                     e_acc)
        mh1, y1, z1, value1 = _solve_edge_branch(
            edge_coef, lo, hi, state.theta_f[i], state.theta_t[i], s,
            state.f_e_hat[i], state.t_hat[i],
            (state.m_hat[i], state.y[i], state.z[i]), i)

        state.f_md_hat[i] = fh0
        if value1 < value0:
            state.x[i] = 1
            state.m_hat[i] = mh1
            state.y[i] = y1
            state.z[i] = z1
        else:
            state.x[i] = 0
            state.m_hat[i] = mh0
            state.y[i] = y0
            state.z[i] = z0
    return state


def _bisect_mu(values: np.ndarray, s: float, bound: float) -> float:
    """Smallest non-negative shift making sum(exp(v - mu/s)) <= bound."""
    tol = 1e-10 * max(1.0, bound)

    def lhs(mu: float) -> float:
        return float(np.sum(np.exp(values - mu / s)))

    if lhs(0.0) <= bound + tol:
        return 0.0
    lo, hi = 0.0, _MU_CAP
    if lhs(hi) > bound + tol:
        raise ConvergenceError(
            f"multiplier cap {_MU_CAP:g} cannot restore feasibility")
    mu = hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        slack = lhs(mid) - bound
        if abs(slack) <= tol:
            return mid
        if slack > 0.0:
            lo = mid
        else:
            hi = mid
            mu = mid
    return mu


def admm_global_update(params: SystemParams, state: AdmmState) -> AdmmState:
    """Step 2: pull the resource copies back inside the coupled budgets.

    The shifted copies ``y + theta/s`` (and likewise for shares) would be
    the unconstrained optimum; a common non-negative shift, found by
    bisection, enforces the edge CPU budget and the unit share budget over
    the offloaded devices.
    """
    s = state.s
    offl = state.x.astype(bool)
    vf = state.y + state.theta_f / s
    vt = state.z + state.theta_t / s
    mu_f = _bisect_mu(vf[offl], s, params.edge_compute_hz) if np.any(offl) else 0.0
    mu_t = _bisect_mu(vt[offl], s, 1.0) if np.any(offl) else 0.0
    state.f_e_hat = vf - mu_f / s
    state.t_hat = vt - mu_t / s
    return state


def admm_multiplier_update(state: AdmmState) -> AdmmState:
    """Step 3: dual ascent on the copy residuals."""
    state.theta_f = state.theta_f + state.s * (state.y - state.f_e_hat)
    state.theta_t = state.theta_t + state.s * (state.z - state.t_hat)
    return state


# ---------------------------------------------------------------------------
# Rounding and the outer loop
# ---------------------------------------------------------------------------


def _rounded_allocation(params: SystemParams, cmodel: ComplexityModel,
                        amodel: AccuracyModel, devices: list[DeviceProfile],
                        state: AdmmState) -> tuple[Allocation, float]:
    """Project the continuous iterate onto an exactly feasible allocation.

    Frames are rounded device by device to the cheaper of floor/ceil
    (holding the others at their current values), and the offloaded set's
    resources are renormalised with the closed-form shares.
    """
    n = len(devices)
    offload = state.x.astype(bool)
    frames = np.zeros(n, dtype=np.int64)
    local_hz = np.zeros(n)
    total = 0.0
    for i, dev in enumerate(devices):
        if offload[i]:
            continue
        f_loc = min(math.exp(state.f_md_hat[i]), dev.local_compute_hz)
        m_cont = min(max(math.exp(state.m_hat[i]), dev.m_min), dev.m_max)
        lo, hi = int(math.floor(m_cont)), int(math.ceil(m_cont))
        lo, hi = max(lo, dev.m_min), min(hi, dev.m_max)
        c_lo = local_cost(params, cmodel, amodel, dev, lo, f_loc)
        if hi != lo and local_cost(params, cmodel, amodel, dev, hi, f_loc) < c_lo:
            frames[i] = hi
            total += local_cost(params, cmodel, amodel, dev, hi, f_loc)
        else:
            frames[i] = lo
            total += c_lo
        local_hz[i] = f_loc

    edge_idx = [i for i in range(n) if offload[i]]
    time_share = np.zeros(n)
    edge_hz = np.zeros(n)
    if edge_idx:
        edge_devs = [devices[i] for i in edge_idx]
        work = np.array([
            min(max(math.exp(state.m_hat[i]), devices[i].m_min),
                devices[i].m_max) for i in edge_idx])
        for pos, i in enumerate(edge_idx):
            dev = devices[i]
            lo = max(int(math.floor(work[pos])), dev.m_min)
            hi = min(int(math.ceil(work[pos])), dev.m_max)
            if hi == lo:
                work[pos] = lo
                continue
            trial = work.copy()
            trial[pos] = lo
            c_lo = reduced_edge_objective(params, cmodel, amodel, edge_devs,
                                          trial)
            trial[pos] = hi
            c_hi = reduced_edge_objective(params, cmodel, amodel, edge_devs,
                                          trial)
            work[pos] = hi if c_hi < c_lo else lo
        m_int = work.astype(np.int64)
        ehz, tsh = share_given_m(params, cmodel, edge_devs, m_int)
        total += reduced_edge_objective(params, cmodel, amodel, edge_devs,
                                        m_int)
        for pos, i in enumerate(edge_idx):
            frames[i] = m_int[pos]
            edge_hz[i] = ehz[pos]
            time_share[i] = tsh[pos]

    alloc = Allocation(offload=offload, frames=frames, time_share=time_share,
                       local_hz=local_hz, edge_hz=edge_hz)
    return alloc, float(total)


def _initial_state(params: SystemParams, devices: list[DeviceProfile],
                   opts: AdmmOptions) -> AdmmState:
    n = len(devices)
    if opts.init == "zero":
        zeros = np.zeros(n)
        return AdmmState(x=np.zeros(n, dtype=np.int64), m_hat=zeros.copy(),
                         f_md_hat=zeros.copy(), y=zeros.copy(),
                         z=zeros.copy(), f_e_hat=zeros.copy(),
                         t_hat=zeros.copy(), theta_f=zeros.copy(),
                         theta_t=zeros.copy(), s=opts.s, delta=opts.delta)
    f_e = math.log(params.edge_compute_hz / n)
    t_sh = math.log(1.0 / n)
    return AdmmState(
        x=np.ones(n, dtype=np.int64),
        m_hat=np.array([math.log(dev.m_max) for dev in devices]),
        f_md_hat=np.array([math.log(dev.local_compute_hz) for dev in devices]),
        y=np.full(n, f_e), z=np.full(n, t_sh),
        f_e_hat=np.full(n, f_e), t_hat=np.full(n, t_sh),
        theta_f=np.zeros(n), theta_t=np.zeros(n),
        s=opts.s, delta=opts.delta)


def admm_solve(params: SystemParams, cmodel: ComplexityModel,
               amodel: AccuracyModel, devices: list[DeviceProfile],
               opts: AdmmOptions | None = None
               ) -> tuple[Allocation, AdmmTrace]:
    """Run the full decomposition loop and return the best allocation found.

    Stops once consecutive rounded-solution costs differ by less than
    ``opts.delta``, or after ``opts.max_iters`` sweeps, in which case the
    trace's ``converged`` flag stays False.  The returned allocation is the
    cheapest rounded iterate observed, which for a converged run coincides
    with the final one.
    """
    if len(devices) == 0:
        raise ConfigError("need at least one device")
    if params.beta1 <= 0.0:
        raise ConfigError("the decomposition solver requires beta1 > 0")
    opts = opts or AdmmOptions()
    state = _initial_state(params, devices, opts)
    trace = AdmmTrace()
    best_alloc = None
    best_cost = math.inf
    prev_cost = None
    prev_x = state.x.copy()
    for it in range(1, opts.max_iters + 1):
        admm_local_update(params, cmodel, amodel, devices, state)
        admm_global_update(params, state)
        admm_multiplier_update(state)
        state.iteration = it
        alloc, cost = _rounded_allocation(params, cmodel, amodel, devices,
                                          state)
        trace.objective.append(cost)
        trace.primal_res_f.append(float(np.linalg.norm(state.y - state.f_e_hat)))
        trace.primal_res_t.append(float(np.linalg.norm(state.z - state.t_hat)))
        trace.x_flips.append(int(np.count_nonzero(state.x != prev_x)))
        trace.offload_rate.append(float(np.mean(state.x)))
        prev_x = state.x.copy()
        if cost < best_cost:
            best_cost = cost
            best_alloc = alloc
        if prev_cost is not None and abs(cost - prev_cost) < opts.delta:
            trace.converged = True
            break
        prev_cost = cost
    return best_alloc, trace
