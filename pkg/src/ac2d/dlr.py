"""Low-rank integrators for the split semi-discrete system.

Three one-step maps operate on factored states:

* the exact heat sub-flow (bases propagated, then re-orthonormalized),
* a first-order augmented basis-update & Galerkin step for the reaction
  sub-flow (parallel K/L updates, doubled bases, Galerkin core update),
* the second-order composition: half heat step, trapezoidal predictor via
  the first-order step, a Galerkin correction on bases augmented with the
  constant vector and both reaction images, an SVD truncation, and the
  closing half heat step.

Ranks are bounded by construction: the predictor at most doubles the rank
and the augmented bases hold at most ``4 r + 1`` columns.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import diagnostics as diag
from .config import RunConfig
from .errors import NumericError
from .linalg import (LowRankState, RankPolicy, apply_linear_step, gqr,
                     make_propagator, truncate_s, weighted_truncated_svd)
from .mesh import TensorGrid2D
from .nonlinearity import Nonlinearity
from .runutil import SnapshotSchedule, format_time, step_sizes


@dataclass
class StepTrace:
    """Per-step bookkeeping for rank bounds, truncation and wall time."""

    step: int
    r_in: int
    r_hat: int
    r_bar: int
    r_tilde: int
    trunc_tail: float
    kernel_calls: int
    wall_linear_ms: float
    wall_nonlinear_ms: float
    wall_ms: float
    clamped: bool = False
    beta: float | None = None


def bug_step(state: LowRankState, tau: float, nl, grids: TensorGrid2D) -> LowRankState:
    """First-order augmented basis-update & Galerkin step, untruncated.

    The K and L updates are independent explicit Euler solves; each new basis
    is the old one augmented by its update, so the output rank is at most
    twice the input rank (capped by the matrix dimensions).
    """
    gx, gy = grids.gx, grids.gy
    u, s, v = state.u, state.s, state.v

    # K-step / L-step
    k1 = u @ s + tau * nl.times_v(u, s, v, v)
    l1 = v @ s.T + tau * nl.transpose_times_u(u, s, v, u)
    u1, _ = gqr(np.column_stack([k1, u]), gx.mass_diag)
    v1, _ = gqr(np.column_stack([l1, v]), gy.mass_diag)
    mmat = u1.T @ (gx.mass_diag[:, None] * u)
    nmat = v1.T @ (gy.mass_diag[:, None] * v)

    # S-step on the projected initial core
    s_star = mmat @ s @ nmat.T
    s1 = s_star + tau * nl.projected(u1, u1, s_star, v1, v1)
    return LowRankState(u=u1, s=s1, v=v1, t=state.t)


def _augmented_bases(st1: LowRankState, st2: LowRankState, tau: float, nl,
                     grids: TensorGrid2D) -> tuple[np.ndarray, np.ndarray]:
    """Column order: constant vector, old basis, then both reaction images."""
    gx, gy = grids.gx, grids.gy
    ones_m = np.ones((gx.size, 1))
    ones_n = np.ones((gy.size, 1))
    nu1 = tau * nl.times_v(st1.u, st1.s, st1.v, st1.v)
    nv1 = tau * nl.transpose_times_u(st1.u, st1.s, st1.v, st1.u)
    nu2 = tau * nl.times_v(st2.u, st2.s, st2.v, st2.v)
    nv2 = tau * nl.transpose_times_u(st2.u, st2.s, st2.v, st2.u)
    ubar, _ = gqr(np.column_stack([ones_m, st1.u, nu1, nu2]), gx.mass_diag)
    vbar, _ = gqr(np.column_stack([ones_n, st1.v, nv1, nv2]), gy.mass_diag)
    return ubar, vbar


def strang_bug2_step(state: LowRankState, tau: float, eps: float, nl,
                     grids: TensorGrid2D, policy: RankPolicy
                     ) -> tuple[LowRankState, StepTrace, LowRankState]:
    """Second-order low-rank step; returns (state, trace, post-half-step state)."""
    gx, gy = grids.gx, grids.gy
    s_half = 0.5 * tau * eps * eps
    px = make_propagator(gx, s_half)
    py = make_propagator(gy, s_half)

    t0 = time.perf_counter()
    st1 = apply_linear_step(state, px, py)
    t1 = time.perf_counter()

    # trapezoidal predictor, rank <= 2r
    st2 = bug_step(st1, tau, nl, grids)

    # Galerkin correction on the augmented bases, rank <= 4r + 1
    ubar, vbar = _augmented_bases(st1, st2, tau, nl, grids)
    mb = ubar.T @ (gx.mass_diag[:, None] * st1.u)
    nb = vbar.T @ (gy.mass_diag[:, None] * st1.v)
    sb1 = mb @ st1.s @ nb.T
    sb2 = sb1 + tau * nl.projected(ubar, ubar, sb1, vbar, vbar)
    sb3 = 0.5 * sb1 + 0.5 * sb2 + 0.5 * tau * nl.projected(ubar, ubar, sb2, vbar, vbar)

    trunc = truncate_s(sb3, policy)
    st3 = LowRankState(u=ubar @ trunc.left, s=trunc.s_matrix, v=vbar @ trunc.right, t=st1.t)
    t2 = time.perf_counter()

    out = apply_linear_step(st3, px, py)
    t3 = time.perf_counter()
    out = LowRankState(u=out.u, s=out.s, v=out.v, t=state.t + tau)

    trace = StepTrace(
        step=0, r_in=state.rank, r_hat=st2.rank,
        r_bar=max(ubar.shape[1], vbar.shape[1]), r_tilde=trunc.rank,
        trunc_tail=trunc.tail, kernel_calls=9,
        wall_linear_ms=((t1 - t0) + (t3 - t2)) * 1e3,
        wall_nonlinear_ms=(t2 - t1) * 1e3,
        wall_ms=(t3 - t0) * 1e3,
        clamped=trunc.clamped)
    return out, trace, st1


def lie_trotter_step(state: LowRankState, tau: float, eps: float, nl,
                     grids: TensorGrid2D, policy: RankPolicy
                     ) -> tuple[LowRankState, StepTrace, LowRankState]:
    """First-order variant: full heat step, first-order reaction step, truncation."""
    gx, gy = grids.gx, grids.gy
    s_full = tau * eps * eps
    px = make_propagator(gx, s_full)
    py = make_propagator(gy, s_full)

    t0 = time.perf_counter()
    st1 = apply_linear_step(state, px, py)
    t1 = time.perf_counter()
    st2 = bug_step(st1, tau, nl, grids)
    trunc = truncate_s(st2.s, policy)
    out = LowRankState(u=st2.u @ trunc.left, s=trunc.s_matrix,
                       v=st2.v @ trunc.right, t=state.t + tau)
    t2 = time.perf_counter()

    trace = StepTrace(
        step=0, r_in=state.rank, r_hat=st2.rank, r_bar=st2.rank,
        r_tilde=trunc.rank, trunc_tail=trunc.tail, kernel_calls=3,
        wall_linear_ms=(t1 - t0) * 1e3,
        wall_nonlinear_ms=(t2 - t1) * 1e3,
        wall_ms=(t2 - t0) * 1e3,
        clamped=trunc.clamped)
    return out, trace, st1


def initial_low_rank(cfg: RunConfig, grids: TensorGrid2D) -> LowRankState:
    """Factor the interpolated initial data with the configured rank rule."""
    return weighted_truncated_svd(cfg.build_initial(grids), grids.gx, grids.gy,
                                  cfg.rank_policy())


def dlr_run(cfg: RunConfig, nonlinearity=None) -> diag.RunResult:
    """Drive a low-rank solver from t=0 to the configured final time."""
    grids = cfg.build_grids()
    nl = nonlinearity if nonlinearity is not None else Nonlinearity(cfg.variant, grids)
    policy = cfg.rank_policy()
    stepper = strang_bug2_step if cfg.solver != "dlr-lie" else lie_trotter_step
    state = initial_low_rank(cfg, grids)

    track_me = cfg.variant == "classical" and getattr(nl, "variant", None) == "classical"
    track_sym = grids.symmetric_about_center

    records: list[diag.DiagnosticsRecord] = []
    snapshots: list[diag.Snapshot] = []
    traces: list[StepTrace] = []
    schedule = SnapshotSchedule(cfg.snapshots, cfg.tau)

    def record(step, st, wall_ms):
        records.append(diag.DiagnosticsRecord(
            step=step, time=st.t,
            mass=diag.mass(st, grids),
            energy=diag.energy(st, cfg.epsilon, grids),
            rank=st.rank,
            odd_symmetry_error=diag.odd_symmetry_error(st, grids) if track_sym else None,
            overshoot_count=diag.overshoot_count(st),
            wall_ms=wall_ms))

    record(0, state, 0.0)
    for t_snap in schedule.due(0.0):
        snapshots.append(diag.Snapshot(format_time(t_snap), 0.0, state.densify()))
    if cfg.final_time <= 0 and not cfg.snapshots:
        snapshots.append(diag.Snapshot(format_time(0.0), 0.0, state.densify()))

    sizes = step_sizes(cfg.final_time, cfg.tau)
    prev_recorded = True
    prev_w1 = None
    tic = time.perf_counter()
    for step, tau_n in enumerate(sizes, start=1):
        try:
            state, trace, st1 = stepper(state, tau_n, cfg.epsilon, nl, grids, policy)
        except Exception as exc:
            raise NumericError(f"solver aborted at step {step}, t={state.t:g}: {exc}") from exc
        trace.step = step
        traces.append(trace)
        if track_me:
            w1 = st1.densify()
            if prev_recorded and records:
                records[-1].modified_energy = diag.modified_energy(
                    w1, tau_n, cfg.epsilon, grids)
            if prev_w1 is not None and len(traces) >= 2:
                dw = w1 - prev_w1
                traces[-2].beta = float(np.sqrt(max(np.einsum(
                    "i,ij,j,ij->", grids.gx.mass_diag, dw, grids.gy.mass_diag, dw), 0.0)))
            prev_w1 = w1
        emit = step % cfg.cadence == 0 or step == len(sizes)
        if emit:
            toc = time.perf_counter()
            record(step, state, (toc - tic) * 1e3)
            tic = toc
        prev_recorded = emit
        for t_snap in schedule.due(state.t):
            snapshots.append(diag.Snapshot(format_time(t_snap), state.t, state.densify()))
    return diag.RunResult(records=records, snapshots=snapshots, final=state, traces=traces)
