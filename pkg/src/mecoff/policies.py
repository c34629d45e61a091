"""Offloading-set selection policies and baseline schemes.

Every policy returns a full :class:`~mecoff.models.Allocation`; resource
allocation inside the offloaded set is delegated to the edge solvers and
local execution to the closed-form local solver.
"""

from __future__ import annotations

import numpy as np

from .edge_solver import EdgeSolution, solve_edge_gp, solve_edge_search
from .errors import ConfigError
from .local_solver import LocalSolution, solve_local
from .models import (AccuracyModel, Allocation, ComplexityModel,
                     DeviceProfile, SystemParams)

# Cost improvements below this are treated as noise when deciding whether
# moving a device off the edge actually helps.
_IMPROVEMENT_EPS = 1e-12

EDGE_INNER_SOLVERS = {
    "search": solve_edge_search,
    "gp": solve_edge_gp,
}


def _edge_solver(name: str):
    try:
        return EDGE_INNER_SOLVERS[name]
    except KeyError:
        raise ConfigError(
            f"unknown edge solver '{name}', expected one of "
            f"{sorted(EDGE_INNER_SOLVERS)}") from None


def _assemble(devices: list[DeviceProfile], offload_idx: list[int],
              locals_: dict[int, LocalSolution],
              edge: EdgeSolution) -> Allocation:
    n = len(devices)
    offload = np.zeros(n, dtype=bool)
    frames = np.zeros(n, dtype=np.int64)
    time_share = np.zeros(n)
    local_hz = np.zeros(n)
    edge_hz = np.zeros(n)
    for pos, i in enumerate(offload_idx):
        offload[i] = True
        frames[i] = edge.frames[pos]
        time_share[i] = edge.time_share[pos]
        edge_hz[i] = edge.edge_hz[pos]
    for i, sol in locals_.items():
        frames[i] = sol.frames
        local_hz[i] = sol.local_hz
    return Allocation(offload=offload, frames=frames, time_share=time_share,
                      local_hz=local_hz, edge_hz=edge_hz)


def _total_cost(locals_: dict[int, LocalSolution], edge: EdgeSolution) -> float:
    return sum(sol.cost for sol in locals_.values()) + edge.cost


def solve_channel_aware(params: SystemParams, cmodel: ComplexityModel,
                        amodel: AccuracyModel, devices: list[DeviceProfile],
                        edge_inner: str = "gp") -> Allocation:
    """Greedy descent on the offloaded set, weakest channel first.

    Starts from everybody offloading and repeatedly tries to move the
    offloaded device with the weakest channel (ties to the lowest index)
    to local execution, re-solving the edge allocation for the remaining
    set.  A move is kept only if the total cost strictly decreases; the
    first rejected move terminates the search.
    """
    inner = _edge_solver(edge_inner)
    n = len(devices)
    if n == 0:
        raise ConfigError("need at least one device")
    local_cache: dict[int, LocalSolution] = {}

    def local_sol(i: int) -> LocalSolution:
        if i not in local_cache:
            local_cache[i] = solve_local(params, cmodel, amodel, devices[i])
        return local_cache[i]

    edge_set = list(range(n))
    locals_: dict[int, LocalSolution] = {}
    edge = inner(params, cmodel, amodel, [devices[i] for i in edge_set])
    total = _total_cost(locals_, edge)
    while edge_set:
        gains = [devices[i].channel_gain for i in edge_set]
        weakest = edge_set[int(np.argmin(gains))]
        cand_set = [i for i in edge_set if i != weakest]
        cand_edge = inner(params, cmodel, amodel,
                          [devices[i] for i in cand_set])
        cand_locals = dict(locals_)
        cand_locals[weakest] = local_sol(weakest)
        cand_total = _total_cost(cand_locals, cand_edge)
        if cand_total < total - _IMPROVEMENT_EPS:
            edge_set, locals_, edge, total = (cand_set, cand_locals,
                                              cand_edge, cand_total)
        else:
            break
    return _assemble(devices, edge_set, locals_, edge)


def solve_exhaustive(params: SystemParams, cmodel: ComplexityModel,
                     amodel: AccuracyModel, devices: list[DeviceProfile],
                     edge_inner: str = "search",
                     max_devices: int = 16) -> Allocation:
    """Brute force over all offload subsets (reference optimum).

    Iterates subsets in increasing bitmask order (bit i = device i
    offloads) and keeps the first minimum, which makes ties deterministic.
    Refuses more than ``max_devices`` devices.
    """
    inner = _edge_solver(edge_inner)
    n = len(devices)
    if n == 0:
        raise ConfigError("need at least one device")
    if n > max_devices:
        raise ConfigError(
            f"exhaustive scheme limited to {max_devices} devices, got {n}")
    local_sols = [solve_local(params, cmodel, amodel, dev) for dev in devices]
    best_cost = np.inf
    best = None
    for mask in range(1 << n):
        subset = [i for i in range(n) if mask >> i & 1]
        edge = inner(params, cmodel, amodel, [devices[i] for i in subset])
        cost = edge.cost + sum(local_sols[i].cost
                               for i in range(n) if not mask >> i & 1)
        if cost < best_cost:
            best_cost = cost
            best = (subset, edge)
    subset, edge = best
    locals_ = {i: local_sols[i] for i in range(n) if i not in subset}
    return _assemble(devices, subset, locals_, edge)


def solve_baseline(params: SystemParams, cmodel: ComplexityModel,
                   amodel: AccuracyModel, devices: list[DeviceProfile],
                   kind: str, seed: int | None = None,
                   edge_inner: str = "gp") -> Allocation:
    """Non-adaptive reference schemes: all_local, all_edge, random.

    ``random`` draws one fair coin per device from a generator seeded with
    ``seed`` and then allocates resources optimally for that fixed split.
    """
    inner = _edge_solver(edge_inner)
    n = len(devices)
    if n == 0:
        raise ConfigError("need at least one device")
    if kind == "all_local":
        offload = np.zeros(n, dtype=bool)
    elif kind == "all_edge":
        offload = np.ones(n, dtype=bool)
    elif kind == "random":
        rng = np.random.default_rng(seed)
        offload = rng.integers(0, 2, size=n).astype(bool)
    else:
        raise ConfigError(
            f"unknown baseline '{kind}', expected all_local, all_edge "
            f"or random")
    subset = [i for i in range(n) if offload[i]]
    edge = inner(params, cmodel, amodel, [devices[i] for i in subset])
    locals_ = {i: solve_local(params, cmodel, amodel, devices[i])
               for i in range(n) if not offload[i]}
    return _assemble(devices, subset, locals_, edge)
