"""Full-rank and dynamical low-rank mass-lumped spectral-element solvers for
the classical and conservative 2D Allen-Cahn equations."""

from .config import RunConfig, parse_config, parse_config_text, emit_config
from .diagnostics import (DiagnosticsRecord, RunResult, Snapshot, convergence_order,
                          energy, evaluate_fe, l2h_error, mass, modified_energy,
                          odd_symmetry_error, overshoot_count)
from .dlr import StepTrace, bug_step, dlr_run, lie_trotter_step, strang_bug2_step
from .errors import (ConfigError, DegenerateStateError, NumericError,
                     PropagatorOverflowError)
from .full_rank import FullState, fr_run, fr_strang_step, ssp_rk2_nonlinear
from .linalg import (LowRankState, Propagator, RankPolicy, apply_linear_step, gqr,
                     make_propagator, truncate_s, weighted_inner, weighted_norm,
                     weighted_truncated_svd)
from .mesh import (Grid1D, TensorGrid2D, build_grid, build_tensor_grid,
                   gauss_lobatto_rule, interpolate_initial)
from .nonlinearity import IdentityNonlinearity, Nonlinearity, ZeroNonlinearity

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DegenerateStateError", "DiagnosticsRecord", "FullState",
    "Grid1D", "IdentityNonlinearity", "LowRankState", "Nonlinearity",
    "NumericError", "Propagator", "PropagatorOverflowError", "RankPolicy",
    "RunConfig", "RunResult", "Snapshot", "StepTrace", "TensorGrid2D",
    "ZeroNonlinearity", "apply_linear_step", "bug_step", "build_grid",
    "build_tensor_grid", "convergence_order", "dlr_run", "emit_config",
    "energy", "evaluate_fe", "fr_run", "fr_strang_step", "gauss_lobatto_rule",
    "gqr", "interpolate_initial", "l2h_error", "lie_trotter_step", "make_propagator",
    "mass", "modified_energy", "odd_symmetry_error", "overshoot_count",
    "parse_config", "parse_config_text", "ssp_rk2_nonlinear", "strang_bug2_step",
    "truncate_s", "weighted_inner", "weighted_norm", "weighted_truncated_svd",
    "__version__",
]
