"""Joint frame-resolution and resource allocation for the offloaded set.

Given the set of devices that offload, the edge CPU split and the TDMA
shares have closed forms in terms of the frame resolutions (square-root
weighting).  Substituting them back yields a *reduced* objective over the
frame vector only, which is minimised either by exhaustive grid search over
the integer boxes or by an interior-point method on the log-variable convex
relaxation followed by rounding.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ConvergenceError
from .models import (AccuracyModel, ComplexityModel, DeviceProfile,
                     SystemParams, accuracy, achievable_rate,
                     linear_complexity)


@dataclass
class EdgeSolution:
    """Allocation for the offloaded devices.

    ``frames`` is integer; ``frames_real`` carries the continuous relaxation
    optimum when produced by the convex solver (otherwise it mirrors
    ``frames``), and ``relaxed_cost`` the relaxation objective before
    rounding (``None`` for grid search).  ``edge_hz`` sums to the edge
    budget and ``time_share`` to one whenever the device set is non-empty.
    """

    frames: np.ndarray
    edge_hz: np.ndarray
    time_share: np.ndarray
    cost: float
    frames_real: np.ndarray = field(default=None)  # type: ignore[assignment]
    kkt_residual: float = 0.0
    relaxed_cost: float | None = None

    def __post_init__(self) -> None:
        self.frames = np.asarray(self.frames, dtype=np.int64)
        self.edge_hz = np.asarray(self.edge_hz, dtype=float)
        self.time_share = np.asarray(self.time_share, dtype=float)
        if self.frames_real is None:
            self.frames_real = self.frames.astype(float)
        else:
            self.frames_real = np.asarray(self.frames_real, dtype=float)


def _empty_solution() -> EdgeSolution:
    z = np.zeros(0)
    return EdgeSolution(frames=z, edge_hz=z, time_share=z, cost=0.0,
                        frames_real=z, kkt_residual=0.0)


def round_frames_half_down(value: float) -> int:
    """Round to the nearest integer, breaking .5 ties downward."""
    lo = math.floor(value)
    return lo + 1 if value - lo > 0.5 else lo


def share_given_m(params: SystemParams, cmodel: ComplexityModel,
                  devices: list[DeviceProfile], frames
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form edge CPU split and TDMA shares for fixed frame counts.

    Both resources are divided in proportion to square roots: the CPU by
    ``sqrt(macs)`` (equalising the marginal delay of extra cycles) and the
    channel by ``sqrt(bits / rate)``.  The returned arrays sum exactly to
    the edge budget and to one.
    """
    frames = np.asarray(frames, dtype=float)
    if len(devices) == 0:
        raise ConfigError("need at least one offloaded device to split "
                          "resources")
    if frames.shape != (len(devices),):
        raise ConfigError("frames vector does not match device list")
    comp = np.array([linear_complexity(cmodel, m) for m in frames])
    rates = np.array([achievable_rate(params, dev) for dev in devices])
    w_f = np.sqrt(comp)
    w_t = np.sqrt(frames * params.frame_bits / rates)
    edge_hz = params.edge_compute_hz * w_f / np.sum(w_f)
    if np.sum(w_t) == 0.0:
        time_share = np.full(len(devices), 1.0 / len(devices))
    else:
        time_share = w_t / np.sum(w_t)
    return edge_hz, time_share


def reduced_edge_objective(params: SystemParams, cmodel: ComplexityModel,
                           amodel: AccuracyModel,
                           devices: list[DeviceProfile], frames) -> float:
    """Total offloaded cost with the resource shares substituted in.

    Plugging the closed-form shares into the per-device costs collapses the
    compute-delay and transmit-delay sums into squared sums of square
    roots, leaving a function of the frame vector alone.
    """
    frames = np.asarray(frames, dtype=float)
    if len(devices) == 0:
        return 0.0
    comp = np.array([linear_complexity(cmodel, m) for m in frames])
    rates = np.array([achievable_rate(params, dev) for dev in devices])
    powers = np.array([dev.tx_power_w for dev in devices])
    bits = frames * params.frame_bits
    term_compute = (params.beta1 * params.rho
                    * np.sum(np.sqrt(comp)) ** 2 / params.edge_compute_hz)
    term_tx_delay = params.beta1 * np.sum(np.sqrt(bits / rates)) ** 2
    term_tx_energy = params.beta2 * np.sum(powers * bits / rates)
    term_acc = params.beta3 * sum(accuracy(amodel, m) for m in frames)
    return float(term_compute + term_tx_delay + term_tx_energy - term_acc)


def relaxed_edge_objective(params: SystemParams, cmodel: ComplexityModel,
                           amodel: AccuracyModel,
                           devices: list[DeviceProfile], frames_real,
                           edge_hz=None, time_share=None) -> float:
    """Offloaded cost with the surrogate accuracy used by the convex solver.

    Identical to the sum of per-device edge costs except that the accuracy
    curve is replaced by ``-m_a0 / M + m_a2`` (the shift ``m_a1`` dropped),
    which keeps the objective convex in the logarithmic variables.  When
    the resource vectors are omitted the closed-form optimal shares for
    ``frames_real`` are substituted.
    """
    frames = np.asarray(frames_real, dtype=float)
    if len(devices) == 0:
        return 0.0
    if edge_hz is None or time_share is None:
        edge_hz, time_share = share_given_m(params, cmodel, devices, frames)
    edge_hz = np.asarray(edge_hz, dtype=float)
    time_share = np.asarray(time_share, dtype=float)
    comp = np.array([linear_complexity(cmodel, m) for m in frames])
    rates = np.array([achievable_rate(params, dev) for dev in devices])
    powers = np.array([dev.tx_power_w for dev in devices])
    bits = frames * params.frame_bits
    delay = params.rho * comp / edge_hz + bits / (rates * time_share)
    energy = powers * bits / rates
    acc = -amodel.m_a0 / frames + amodel.m_a2
    return float(np.sum(params.beta1 * delay + params.beta2 * energy
                        - params.beta3 * acc))


def solve_edge_search(params: SystemParams, cmodel: ComplexityModel,
                      amodel: AccuracyModel, devices: list[DeviceProfile],
                      frame_grids: list | None = None,
                      max_grid: int = 2_000_000) -> EdgeSolution:
    """Exact minimisation of the reduced objective over integer frame grids.

    ``frame_grids`` optionally restricts each device to an explicit list of
    candidate frame counts; by default the full range ``m_min..m_max`` is
    used.  The Cartesian product is enumerated in lexicographic order and
    the first minimum kept, so ties resolve to the earliest grid point.
    Refuses products larger than ``max_grid``.
    """
    if len(devices) == 0:
        return _empty_solution()
    if frame_grids is None:
        ranges = [range(dev.m_min, dev.m_max + 1) for dev in devices]
    else:
        if len(frame_grids) != len(devices):
            raise ConfigError("frame_grids must match the device list")
        ranges = []
        for dev, grid in zip(devices, frame_grids):
            grid = [int(m) for m in grid]
            if not grid:
                raise ConfigError("frame grids must be non-empty")
            if any(m < dev.m_min or m > dev.m_max for m in grid):
                raise ConfigError(
                    f"frame grid entries outside [{dev.m_min}, {dev.m_max}]")
            ranges.append(grid)
    size = math.prod(len(r) for r in ranges)
    if size > max_grid:
        raise ConfigError(
            f"search grid has {size} points, exceeding the limit {max_grid}; "
            f"use the interior-point solver instead")
    best_cost = math.inf
    best = None
    for combo in itertools.product(*ranges):
        cost = reduced_edge_objective(params, cmodel, amodel, devices, combo)
        if cost < best_cost:
            best_cost = cost
            best = combo
    frames = np.array(best, dtype=np.int64)
    edge_hz, time_share = share_given_m(params, cmodel, devices, frames)
    return EdgeSolution(frames=frames, edge_hz=edge_hz, time_share=time_share,
                        cost=best_cost, frames_real=frames.astype(float),
                        kkt_residual=0.0)


# ---------------------------------------------------------------------------
# Newton-KKT solve of the log-variable relaxation.
#
# In variables (mh, fh, th) = (ln M, ln f_e - ln f_max, ln t) the relaxed
# problem (with the accuracy surrogate phi(M) ~ -m_a0/M + m_a2) is a sum of
# exponentials of affine forms, i.e. convex.  Because the objective is
# strictly decreasing in every resource variable, the two coupling
# constraints sum(exp(fh)) <= 1 and sum(exp(th)) <= 1 hold with equality at
# the optimum; they are handled as equalities with explicit multipliers in
# a Newton-KKT iteration.  The boxes on mh are handled by an active set:
# frame variables that hit a bound are pinned there exactly and released
# again if their multiplier comes out negative.  (A log-barrier treatment
# of the boxes was tried first and cannot certify tight KKT residuals: with
# a bound active at the optimum, the barrier gradient at distance 1/t from
# the bound carries a relative rounding error that grows like t, so the
# stationarity floor rises as the barrier weight is pushed up.  Pinning the
# bound makes complementary slackness exact instead.)
# ---------------------------------------------------------------------------


class _GpProblem:
    def __init__(self, params: SystemParams, cmodel: ComplexityModel,
                 amodel: AccuracyModel, devices: list[DeviceProfile]):
        n = len(devices)
        rates = np.array([achievable_rate(params, dev) for dev in devices])
        powers = np.array([dev.tx_power_w for dev in devices])
        fmax = params.edge_compute_hz
        self.n = n
        # Posynomial coefficients of the per-device objective terms, with
        # the edge budget folded into the compute terms via the shift of fh.
        self.a = np.full(n, params.beta1 * params.rho * cmodel.m_c0 / fmax)
        self.b = np.full(n, params.beta1 * params.rho * cmodel.m_c1 / fmax)
        self.c = params.beta1 * params.frame_bits / rates
        self.d = params.beta2 * params.frame_bits * powers / rates
        self.e = np.full(n, params.beta3 * amodel.m_a0)
        self.lo = np.log([float(dev.m_min) for dev in devices])
        self.hi = np.log([float(dev.m_max) for dev in devices])
        self.pinned = self.hi - self.lo <= 0.0

    def kkt_parts(self, mh, fh, th, nu):
        """Lagrangian gradient, equality residual, Hessian and Jacobian."""
        n = self.n
        em_f = self.a * np.exp(mh - fh)
        e_f = self.b * np.exp(-fh)
        em_t = self.c * np.exp(mh - th)
        em = self.d * np.exp(mh)
        iem = self.e * np.exp(-mh)
        exp_f = np.exp(fh)
        exp_t = np.exp(th)

        grad = np.zeros(3 * n)
        grad[:n] = em_f + em_t + em - iem
        grad[n:2 * n] = -em_f - e_f + nu[0] * exp_f
        grad[2 * n:] = -em_t + nu[1] * exp_t

        hess = np.zeros((3 * n, 3 * n))
        idx = np.arange(n)
        hess[idx, idx] = em_f + em_t + em + iem
        hess[n + idx, n + idx] = em_f + e_f + nu[0] * exp_f
        hess[2 * n + idx, 2 * n + idx] = em_t + nu[1] * exp_t
        hess[idx, n + idx] = hess[n + idx, idx] = -em_f
        hess[idx, 2 * n + idx] = hess[2 * n + idx, idx] = -em_t

        jac = np.zeros((2, 3 * n))
        jac[0, n:2 * n] = exp_f
        jac[1, 2 * n:] = exp_t
        h_res = np.array([np.sum(exp_f) - 1.0, np.sum(exp_t) - 1.0])
        return grad, h_res, hess, jac


def _renormalised(fh, th) -> tuple[np.ndarray, np.ndarray]:
    """Project log-shares back onto the two simplex equalities."""
    fh = fh - math.log(float(np.sum(np.exp(fh))))
    th = th - math.log(float(np.sum(np.exp(th))))
    return fh, th


def _center_gp(prob: _GpProblem, mh, fh, th, nu, active,
               tol: float, max_inner: int) -> tuple[float, float, bool]:
    """Newton iteration on the equality-constrained KKT system.

    Mutates ``mh``/``fh``/``th``/``nu`` in place.  Frame variables whose
    Newton step is blocked by a box bound are snapped onto the bound and
    marked in ``active`` (-1 low, +1 high); the system is then re-solved
    without them.  Candidate share vectors are renormalised onto the
    simplex equalities, so the equality residual stays at rounding level
    and the line search only has to fight stationarity.  Returns the final
    stationarity and equality residuals plus a flag set when the iteration
    stalled before reaching ``tol``.
    """
    n = prob.n
    stat = math.inf
    pri = math.inf
    for _ in range(max_inner):
        free = np.concatenate([active == 0, np.ones(2 * n, dtype=bool)])
        n_free = int(np.count_nonzero(free))
        grad, h_res, hess, jac = prob.kkt_parts(mh, fh, th, nu)
        stat = float(np.max(np.abs(grad[free])))
        pri = float(np.max(np.abs(h_res)))
        if stat <= tol and pri <= tol:
            return stat, pri, False
        kkt = np.zeros((n_free + 2, n_free + 2))
        kkt[:n_free, :n_free] = hess[np.ix_(free, free)]
        kkt[:n_free, n_free:] = jac[:, free].T
        kkt[n_free:, :n_free] = jac[:, free]
        rhs = np.concatenate([-grad[free], -h_res])
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            ridge = 1e-12 * max(1.0, float(np.trace(kkt)) / kkt.shape[0])
            sol = np.linalg.solve(kkt + ridge * np.eye(kkt.shape[0]), rhs)
        step = np.zeros(3 * n)
        step[free] = sol[:n_free]
        step_nu = sol[n_free:]
        dm = step[:n]

        # Ratio test against the boxes on the free frame variables.
        alpha_bound = math.inf
        for i in np.flatnonzero(active == 0):
            if dm[i] > 0.0:
                ratio = (prob.hi[i] - mh[i]) / dm[i]
            elif dm[i] < 0.0:
                ratio = (prob.lo[i] - mh[i]) / dm[i]
            else:
                continue
            alpha_bound = min(alpha_bound, ratio)
        if alpha_bound <= 1.0:
            # Walk up to the first blocking bound, pin every variable that
            # lands on its bound there, and re-solve the reduced system.
            mh += alpha_bound * dm
            fh2, th2 = _renormalised(fh + alpha_bound * step[n:2 * n],
                                     th + alpha_bound * step[2 * n:])
            fh[:] = fh2
            th[:] = th2
            nu += alpha_bound * step_nu
            snap = 1e-9 * np.maximum(1.0, np.abs(prob.hi) + np.abs(prob.lo))
            for i in np.flatnonzero(active == 0):
                if dm[i] > 0.0 and prob.hi[i] - mh[i] <= snap[i]:
                    mh[i] = prob.hi[i]
                    active[i] = 1
                elif dm[i] < 0.0 and mh[i] - prob.lo[i] <= snap[i]:
                    mh[i] = prob.lo[i]
                    active[i] = -1
            continue

        # Interior step: damped Newton on the KKT residual norm.
        base = math.hypot(float(np.linalg.norm(grad[free])),
                          float(np.linalg.norm(h_res)))
        alpha = 1.0
        accepted = False
        while alpha > 1e-12:
            cand_m = mh + alpha * step[:n]
            cand_f, cand_t = _renormalised(fh + alpha * step[n:2 * n],
                                           th + alpha * step[2 * n:])
            cand_nu = nu + alpha * step_nu
            g2, h2, _, _ = prob.kkt_parts(cand_m, cand_f, cand_t, cand_nu)
            r2 = math.hypot(float(np.linalg.norm(g2[free])),
                            float(np.linalg.norm(h2)))
            if r2 <= (1.0 - 1e-4 * alpha) * base:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            return stat, pri, True
        mh[:] = cand_m
        fh[:] = cand_f
        th[:] = cand_t
        nu[:] = cand_nu
    return stat, pri, True


def solve_edge_gp(params: SystemParams, cmodel: ComplexityModel,
                  amodel: AccuracyModel, devices: list[DeviceProfile],
                  gap_tol: float = 1e-9, max_outer: int = 60,
                  max_inner: int = 200) -> EdgeSolution:
    """Convex-relaxation solve of the offloaded allocation, then rounding.

    Works in logarithmic variables where the relaxed problem is convex; the
    coupling constraints are solved as equalities (they bind whenever the
    delay weight is positive) and the frame boxes by an active set, so the
    reported ``kkt_residual`` — the worst of stationarity, feasibility and
    dual feasibility at the continuous solution — reaches the requested
    ``gap_tol`` with room to spare.  The continuous frame optimum is
    rounded to the nearest integer (ties down), clamped to the boxes, and
    the resource shares are recomputed in closed form for the integer
    frames.
    """
    if len(devices) == 0:
        return _empty_solution()
    if params.beta1 <= 0.0:
        raise ConfigError(
            "the convex edge solver requires beta1 > 0 "
            "(otherwise resources have no price and no optimum exists)")
    prob = _GpProblem(params, cmodel, amodel, devices)
    n = prob.n
    tol = max(0.01 * gap_tol, 1e-13)

    # Frame variables with a degenerate box (m_min == m_max) stay pinned at
    # the bound for good; their multiplier is never sign-checked.
    active = np.where(prob.pinned, -1, 0).astype(np.int8)
    mh = np.where(prob.pinned, prob.lo, 0.5 * (prob.lo + prob.hi))
    # Warm start on the closed-form shares for the initial frame vector —
    # they are exactly optimal for fixed frames, so the initial residual
    # lives in the frame block alone — with the matching multiplier
    # estimates from the summed share stationarity conditions.
    edge0, share0 = share_given_m(params, cmodel, devices, np.exp(mh))
    fh = np.log(edge0 / params.edge_compute_hz)
    th = np.log(share0)
    nu = np.array([
        float(np.sum(prob.a * np.exp(mh - fh) + prob.b * np.exp(-fh))),
        float(np.sum(prob.c * np.exp(mh - th)))])

    stat = math.inf
    pri = math.inf
    lam_floor = 0.0
    for _round in range(max_outer):
        stat, pri, stalled = _center_gp(prob, mh, fh, th, nu, active,
                                        tol, max_inner)
        if stalled:
            break
        # Multipliers of the pinned bounds: stationarity of the Lagrangian
        # gives lam = -grad for an upper bound and +grad for a lower one.
        grad = prob.kkt_parts(mh, fh, th, nu)[0]
        releasable = np.flatnonzero((active != 0) & ~prob.pinned)
        lam = np.where(active[releasable] == 1, -1.0, 1.0) \
            * grad[releasable]
        if lam.size == 0 or lam.min() >= -tol:
            lam_floor = float(min(0.0, lam.min())) if lam.size else 0.0
            break
        active[releasable[int(np.argmin(lam))]] = 0
    else:
        stalled = True
    if stalled or stat > tol or pri > tol:
        raise ConvergenceError(
            f"convex edge solver failed to reach its tolerance "
            f"(stationarity {stat:.3e}, feasibility {pri:.3e})")

    residual = max(stat, pri, float(max(0.0, -nu.min())), -lam_floor)

    m_real = np.exp(mh)
    m_real = np.clip(m_real, [d.m_min for d in devices],
                     [d.m_max for d in devices])
    relaxed = relaxed_edge_objective(
        params, cmodel, amodel, devices, m_real,
        edge_hz=params.edge_compute_hz * np.exp(fh), time_share=np.exp(th))
    frames = np.array([
        min(max(round_frames_half_down(m), dev.m_min), dev.m_max)
        for m, dev in zip(m_real, devices)], dtype=np.int64)
    edge_hz, time_share = share_given_m(params, cmodel, devices, frames)
    cost = reduced_edge_objective(params, cmodel, amodel, devices, frames)
    return EdgeSolution(frames=frames, edge_hz=edge_hz, time_share=time_share,
                        cost=cost, frames_real=m_real, kkt_residual=residual,
                        relaxed_cost=relaxed)
