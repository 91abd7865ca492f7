"""Run diagnostics: mass, energy, modified energy, symmetry and error norms.

Factored states get dedicated contraction paths for mass and energy so the
solver loop never densifies; everything else (symmetry defect, overshoot
count, snapshots) densifies explicitly, which is why those metrics run on a
configurable cadence.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import LowRankState, make_propagator, weighted_inner
from .mesh import Grid1D, TensorGrid2D, lagrange_values
from .nonlinearity import _compress, _pairs


@dataclass
class DiagnosticsRecord:
    step: int
    time: float
    mass: float
    energy: float
    rank: int
    modified_energy: float | None = None
    odd_symmetry_error: float | None = None
    overshoot_count: int = 0
    wall_ms: float = 0.0


@dataclass
class Snapshot:
    label: str
    time: float
    w: np.ndarray


@dataclass
class RunResult:
    records: list[DiagnosticsRecord]
    snapshots: list[Snapshot]
    final: object
    traces: list | None = None


def _dense(state) -> np.ndarray:
    return state.densify() if isinstance(state, LowRankState) else np.asarray(state)


def mass(state, grids: TensorGrid2D) -> float:
    """Lumped integral of the field; factored states contract in O((m+n)r)."""
    dx = grids.gx.mass_diag
    dy = grids.gy.mass_diag
    if isinstance(state, LowRankState):
        return float((dx @ state.u) @ state.s @ (state.v.T @ dy))
    return float(np.einsum("i,ij,j->", dx, np.asarray(state), dy))


def _quartic_mass(state: LowRankState, dx, dy) -> float:
    # (W^{o4}, 1)_M = (W^{o2}, W^{o2})_M via the Hadamard pair expansion
    a, b = _compress(state.u, state.s, state.v)
    ii, jj, mult = _pairs(a.shape[1])
    ah = a[:, ii] * a[:, jj]
    bh = b[:, ii] * b[:, jj]
    gk = ah.T @ (dx[:, None] * ah)
    gv = bh.T @ (dy[:, None] * bh)
    return float(mult @ (gk * gv) @ mult)


def energy(state, eps: float, grids: TensorGrid2D) -> float:
    """Discrete Ginzburg-Landau energy: gradient part plus double-well part."""
    gx, gy = grids.gx, grids.gy
    dx, dy = gx.mass_diag, gy.mass_diag
    if isinstance(state, LowRankState):
        u, s, v = state.u, state.s, state.v
        gax = u.T @ (gx.stiffness @ u)
        gay = v.T @ (gy.stiffness @ v)
        gmx = u.T @ (dx[:, None] * u)
        gmy = v.T @ (dy[:, None] * v)
        grad = float(np.trace(s.T @ gax @ s @ gmy) + np.trace(s.T @ gmx @ s @ gay))
        # (W^{o2}, 1)_M through the pair expansion
        a, b = _compress(u, s, v)
        ii, jj, mult = _pairs(a.shape[1])
        ah = a[:, ii] * a[:, jj]
        bh = b[:, ii] * b[:, jj]
        q2 = float(np.dot(mult * (dx @ ah), dy @ bh))
        q4 = _quartic_mass(state, dx, dy)
        pot = 0.25 * grids.area - 0.5 * q2 + 0.25 * q4
        return 0.5 * eps * eps * grad + pot
    w = np.asarray(state)
    grad = float(np.einsum("ij,ij,j->", gx.stiffness @ w, w, dy)
                 + np.einsum("i,ij,ij->", dx, w, w @ gy.stiffness))
    pot = float(np.einsum("i,ij,j->", dx, 0.25 * (1.0 - w ** 2) ** 2, dy))
    return 0.5 * eps * eps * grad + pot


@lru_cache(maxsize=16)
def _g_antiderivative(tau: float) -> np.polynomial.Polynomial:
    """Antiderivative of the Heun-averaged reaction slope for the cubic well.

    ``g(s) = -(f(s) + f(s + tau f(s))) / 2`` with ``f(z) = z - z^3``; its
    integral from 0 plus the well value at 0 gives a degree-10 polynomial
    with step-dependent coefficients, built once per step size.
    """
    f = np.polynomial.Polynomial([0.0, 1.0, 0.0, -1.0])
    shifted = np.polynomial.Polynomial([0.0, 1.0]) + tau * f
    g = -0.5 * f - 0.5 * (shifted - shifted ** 3)
    return g.integ(lbnd=0.0) + 0.25


def modified_energy(w1: np.ndarray, tau: float, eps: float, grids: TensorGrid2D,
                    variant: str = "classical") -> float:
    """Step-size-corrected energy evaluated on the post-half-step state.

    Defined for the classical variant only; the nonlocal multipliers have no
    pointwise antiderivative.
    """
    if variant != "classical":
        raise ValueError(f"modified energy is defined for the classical variant, not {variant!r}")
    gx, gy = grids.gx, grids.gy
    s = tau * eps * eps
    pnx = make_propagator(gx, -s)
    pny = make_propagator(gy, -s)
    lin = 0.5 / tau * weighted_inner(pny.apply_right(pnx.apply(w1)) - w1, w1, gx, gy)
    gvals = _g_antiderivative(tau)(w1)
    pot = float(np.einsum("i,ij,j->", gx.mass_diag, gvals, gy.mass_diag))
    return lin + pot


def odd_symmetry_error(state, grids: TensorGrid2D) -> float:
    """Largest defect of odd symmetry under single-axis node reflection.

    Requires both node sets to be mirror-symmetric about the domain center.
    """
    if not grids.symmetric_about_center:
        raise ValueError("grid is not symmetric about the domain center")
    w = _dense(state)
    defect_x = float(np.abs(w + w[::-1, :]).max())
    defect_y = float(np.abs(w + w[:, ::-1]).max())
    return max(defect_x, defect_y)


def overshoot_count(state) -> int:
    """Number of nodes outside the physical range [-1, 1]."""
    return int(np.count_nonzero(np.abs(_dense(state)) > 1.0))


def l2h_error(a, b, grids: TensorGrid2D) -> float:
    """Weighted norm of the difference of two states on the same grid."""
    wa, wb = _dense(a), _dense(b)
    if wa.shape != wb.shape:
        raise ValueError(f"grid mismatch: {wa.shape} vs {wb.shape}")
    diff = wa - wb
    return float(np.sqrt(max(weighted_inner(diff, diff, grids.gx, grids.gy), 0.0)))


def fe_values_matrix(grid: Grid1D, xs: np.ndarray) -> np.ndarray:
    """Global basis evaluation matrix ``E[p, i] = phi_i(xs[p])``."""
    xs = np.asarray(xs, dtype=float)
    lo, hi = grid.a, grid.b
    pad = 1e-12 * (hi - lo)
    if np.any(xs < lo - pad) or np.any(xs > hi + pad):
        raise ValueError("evaluation point outside the domain")
    k = grid.degree
    elem = np.clip(((xs - lo) / grid.h).astype(int), 0, grid.element_count - 1)
    xi = (xs - (lo + elem * grid.h)) / grid.h
    local = lagrange_values(grid.reference_nodes, xi)
    out = np.zeros((xs.size, grid.size))
    for p in range(xs.size):
        out[p, elem[p] * k: elem[p] * k + k + 1] = local[p]
    return out


def evaluate_fe(state, grids: TensorGrid2D, points) -> np.ndarray:
    """Evaluate the finite element function at arbitrary points inside the domain."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    w = _dense(state)
    ex = fe_values_matrix(grids.gx, pts[:, 0])
    ey = fe_values_matrix(grids.gy, pts[:, 1])
    return np.einsum("pi,ij,pj->p", ex, w, ey)


def convergence_order(params, errors) -> tuple[float, list[float]]:
    """Least-squares slope of log error vs log parameter, plus pairwise orders."""
    params = np.asarray(params, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if params.size < 3:
        raise ValueError("need at least 3 samples to estimate an order")
    if np.any(np.diff(params) >= 0):
        raise ValueError("parameters must be strictly decreasing")
    if np.any(errors <= 0):
        raise ValueError("degenerate data: errors must be positive")
    slope = float(np.polyfit(np.log(params), np.log(errors), 1)[0])
    pairwise = [float(np.log(errors[i] / errors[i + 1]) / np.log(params[i] / params[i + 1]))
                for i in range(len(errors) - 1)]
    return slope, pairwise
