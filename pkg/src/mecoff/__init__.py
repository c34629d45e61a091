"""Joint DNN-inference offloading and resource allocation for an edge cell.

The package models a single-cell multi-user mobile edge computing system
where each device either runs video DNN inference locally or offloads it,
and jointly optimises the offloading decisions, per-device frame
resolutions, CPU speeds, edge CPU shares and TDMA time shares against a
weighted delay/energy/accuracy objective.
"""

from .admm import (AdmmOptions, AdmmState, AdmmTrace, admm_global_update,
                   admm_local_update, admm_multiplier_update, admm_solve,
                   write_trace_csv)
from .edge_solver import (EdgeSolution, reduced_edge_objective,
                          relaxed_edge_objective, share_given_m,
                          solve_edge_gp, solve_edge_search)
from .errors import (ConfigError, ConvergenceError, InfeasibleAllocationError,
                     InputDataError, MecoffError)
from .fitting import (AccuracyFit, ComplexityFit, estimate_rho, fit_accuracy,
                      fit_complexity, load_frame_value_csv)
from .local_solver import LocalSolution, local_kkt_residual, solve_local
from .models import (AccuracyModel, Allocation, AllocationMetrics,
                     ComplexityModel, Conv3dLayerSpec, DeviceMetrics,
                     DeviceProfile, SystemParams, accuracy, achievable_rate,
                     conv3d_macs, conv3d_output_dims, edge_cost,
                     evaluate_allocation, linear_complexity, local_cost)
from .policies import solve_baseline, solve_channel_aware, solve_exhaustive
from .scenario import (Scenario, ScenarioConfig, convergence_trace,
                       derive_m_min, generate_scenario, local_edge_breakdown,
                       path_loss_db, run_scheme, run_sweep, tradeoff_sweep,
                       weight_simplex)

__version__ = "0.1.0"

__all__ = [
    "AccuracyFit", "AccuracyModel", "AdmmOptions", "AdmmState", "AdmmTrace",
    "Allocation", "AllocationMetrics", "ComplexityFit", "ComplexityModel",
    "ConfigError", "Conv3dLayerSpec", "ConvergenceError", "DeviceMetrics",
    "DeviceProfile", "EdgeSolution", "InfeasibleAllocationError",
    "InputDataError", "LocalSolution", "MecoffError", "Scenario",
    "ScenarioConfig", "SystemParams", "accuracy", "achievable_rate",
    "admm_global_update", "admm_local_update", "admm_multiplier_update",
    "admm_solve", "conv3d_macs", "conv3d_output_dims", "convergence_trace",
    "derive_m_min", "edge_cost", "estimate_rho", "evaluate_allocation",
    "fit_accuracy", "fit_complexity", "generate_scenario",
    "linear_complexity", "load_frame_value_csv", "local_cost",
    "local_edge_breakdown", "local_kkt_residual", "path_loss_db",
    "reduced_edge_objective", "relaxed_edge_objective", "run_scheme",
    "run_sweep", "share_given_m",
    "solve_baseline", "solve_channel_aware", "solve_edge_gp",
    "solve_edge_search", "solve_exhaustive", "solve_local", "tradeoff_sweep",
    "weight_simplex", "write_trace_csv",
]
