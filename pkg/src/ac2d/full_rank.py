"""Full-rank reference solver: Strang splitting of the semi-discrete system.

Each step applies the exact heat propagator for half a step, a two-stage
strong-stability-preserving Runge-Kutta update of the reaction term for a
full step, and the heat propagator again.  The half-step state is retained
because the modified-energy diagnostic is defined on it.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import diagnostics as diag
from .config import RunConfig
from .errors import NumericError
from .linalg import apply_linear_step, make_propagator
from .mesh import TensorGrid2D
from .nonlinearity import Nonlinearity
from .runutil import SnapshotSchedule, format_time, step_sizes

# Above this step size the modified energy of the classical variant may grow;
# runs are still allowed (the oscillatory regime is a documented demo).
CLASSICAL_TAU_BOUND = 2.0


@dataclass
class FullState:
    w: np.ndarray
    t: float = 0.0


def ssp_rk2_nonlinear(w: np.ndarray, tau: float, nl) -> np.ndarray:
    """Heun step for the reaction sub-flow."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    n0 = nl.dense(w)
    z1 = w + tau * n0
    return w + 0.5 * tau * n0 + 0.5 * tau * nl.dense(z1)


def fr_strang_step(state: FullState, tau: float, eps: float, nl,
                   grids: TensorGrid2D) -> tuple[FullState, np.ndarray]:
    """One Strang step; returns the new state and the post-half-step matrix."""
    s_half = 0.5 * tau * eps * eps
    px = make_propagator(grids.gx, s_half)
    py = make_propagator(grids.gy, s_half)
    w1 = apply_linear_step(state.w, px, py)
    w3 = ssp_rk2_nonlinear(w1, tau, nl)
    w_next = apply_linear_step(w3, px, py)
    return FullState(w=w_next, t=state.t + tau), w1


def fr_run(cfg: RunConfig, nonlinearity=None) -> diag.RunResult:
    """Drive the full-rank solver from t=0 to the configured final time."""
    grids = cfg.build_grids()
    nl = nonlinearity if nonlinearity is not None else Nonlinearity(cfg.variant, grids)
    _warn_on_large_step(cfg)
    w0 = cfg.build_initial(grids)
    state = FullState(w=w0, t=0.0)
    full_rank = min(grids.shape)

    track_me = cfg.variant == "classical" and getattr(nl, "variant", None) == "classical"
    track_sym = grids.symmetric_about_center

    records: list[diag.DiagnosticsRecord] = []
    snapshots: list[diag.Snapshot] = []
    schedule = SnapshotSchedule(cfg.snapshots, cfg.tau)

    def record(step, st, wall_ms):
        records.append(diag.DiagnosticsRecord(
            step=step, time=st.t,
            mass=diag.mass(st.w, grids),
            energy=diag.energy(st.w, cfg.epsilon, grids),
            rank=full_rank,
            odd_symmetry_error=diag.odd_symmetry_error(st.w, grids) if track_sym else None,
            overshoot_count=diag.overshoot_count(st.w),
            wall_ms=wall_ms))

    record(0, state, 0.0)
    for t_snap in schedule.due(0.0):
        snapshots.append(diag.Snapshot(format_time(t_snap), 0.0, state.w.copy()))
    if cfg.final_time <= 0 and not cfg.snapshots:
        snapshots.append(diag.Snapshot(format_time(0.0), 0.0, state.w.copy()))

    sizes = step_sizes(cfg.final_time, cfg.tau)
    prev_recorded = True
    tic = time.perf_counter()
    for step, tau_n in enumerate(sizes, start=1):
        try:
            state, w1 = fr_strang_step(state, tau_n, cfg.epsilon, nl, grids)
        except Exception as exc:
            raise NumericError(f"solver aborted at step {step}, t={state.t:g}: {exc}") from exc
        if track_me and prev_recorded:
            records[-1].modified_energy = diag.modified_energy(
                w1, tau_n, cfg.epsilon, grids)
        emit = step % cfg.cadence == 0 or step == len(sizes)
        if emit:
            toc = time.perf_counter()
            record(step, state, (toc - tic) * 1e3)
            tic = toc
        prev_recorded = emit
        for t_snap in schedule.due(state.t):
            snapshots.append(diag.Snapshot(format_time(t_snap), state.t, state.w.copy()))
    return diag.RunResult(records=records, snapshots=snapshots, final=state)


def _warn_on_large_step(cfg: RunConfig) -> None:
    bound = cfg.tau_warn
    if bound is None and cfg.variant == "classical":
        bound = CLASSICAL_TAU_BOUND
    if bound is not None and cfg.tau > bound:
        warnings.warn(
            f"tau={cfg.tau:g} exceeds the energy-dissipation advisory bound {bound:g}; "
            "the modified energy may oscillate", RuntimeWarning, stacklevel=3)
