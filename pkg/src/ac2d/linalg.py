"""Mass-weighted linear algebra: inner products, generalized QR, truncated
SVD and exact directional heat propagators.

All orthogonality in this package is with respect to the diagonal lumped
mass matrices, i.e. ``Q^T diag(d) Q = I``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, PropagatorOverflowError
from .mesh import Grid1D

# Exponent bound for the negative-step diagnostic propagator; e^700 is the
# largest comfortably representable factor in float64.
_EXP_CAP = 700.0

_GQR_DEFICIENCY_TOL = 1e-12


def weighted_inner(a: np.ndarray, b: np.ndarray, gx: Grid1D, gy: Grid1D) -> float:
    """Mass-weighted Frobenius inner product of two coefficient matrices."""
    if a.shape != b.shape or a.shape != (gx.size, gy.size):
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape} on grid {(gx.size, gy.size)}")
    return float(np.einsum("i,ij,j,ij->", gx.mass_diag, a, gy.mass_diag, b))


def weighted_norm(a: np.ndarray, gx: Grid1D, gy: Grid1D) -> float:
    return float(np.sqrt(max(weighted_inner(a, a, gx, gy), 0.0)))


def gqr(a: np.ndarray, mass_diag: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR factorization in the diag(mass) inner product.

    Returns ``(Q, R)`` with ``A = Q R`` and ``Q^T diag(mass) Q = I``.
    Modified Gram-Schmidt with one re-orthogonalization pass.  Columns that
    are numerically dependent on their predecessors are replaced by canonical
    basis vectors orthogonalized against the accepted set, so the basis is
    always full (the matching diagonal entry of ``R`` is zero).  With more
    columns than rows, the trailing columns only contribute rows of ``R``.
    """
    a = np.asarray(a, dtype=float)
    d = np.asarray(mass_diag, dtype=float)
    if np.any(d <= 0.0):
        raise ValueError("mass diagonal must be strictly positive")
    p, ncols_in = a.shape
    ncols = min(p, ncols_in)
    q = np.zeros((p, ncols))
    r = np.zeros((ncols, ncols_in))
    filled = 0
    for j in range(ncols_in):
        v = a[:, j].copy()
        col_norm = np.sqrt(v @ (d * v))
        for _ in range(2):
            if filled:
                coef = q[:, :filled].T @ (d * v)
                r[:filled, j] += coef
                v -= q[:, :filled] @ coef
        if filled == ncols:
            continue
        nrm = np.sqrt(max(v @ (d * v), 0.0))
        if nrm < _GQR_DEFICIENCY_TOL * (col_norm + 1.0):
            q[:, filled] = _completion_column(q[:, :filled], d)
        else:
            r[filled, j] = nrm
            q[:, filled] = v / nrm
        filled += 1
    return q, r


def _completion_column(accepted: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Canonical basis vector orthogonalized against the accepted columns."""
    # Residual mass-norm of e_t after projection is d_t (1 - d_t * ||Q_t||^2);
    # pick the best candidate deterministically.
    if accepted.shape[1]:
        rowsq = np.einsum("ij,ij->i", accepted, accepted)
    else:
        rowsq = np.zeros(d.shape)
    t = int(np.argmax(d * (1.0 - d * rowsq)))
    v = np.zeros(d.shape)
    v[t] = 1.0
    for _ in range(2):
        if accepted.shape[1]:
            v -= accepted @ (accepted.T @ (d * v))
    nrm = np.sqrt(max(v @ (d * v), 0.0))
    if nrm <= 0.0:
        raise NumericError("generalized QR could not complete an orthonormal basis")
    return v / nrm


@dataclass(frozen=True, eq=False)
class LowRankState:
    """Factored coefficient matrix ``U S V^T`` with mass-orthonormal bases."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    t: float = 0.0

    @property
    def rank(self) -> int:
        return self.u.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.u.shape[0], self.v.shape[0]

    def densify(self) -> np.ndarray:
        return self.u @ self.s @ self.v.T

    def orthonormality_defect(self, gx: Grid1D, gy: Grid1D) -> float:
        eye = np.eye(self.rank)
        du = self.u.T @ (gx.mass_diag[:, None] * self.u) - eye
        dv = self.v.T @ (gy.mass_diag[:, None] * self.v) - eye
        return float(max(np.abs(du).max(), np.abs(dv).max()))


@dataclass(frozen=True)
class RankPolicy:
    """Truncation rule: fixed rank, absolute tolerance, or tolerance relative
    to the largest singular value."""

    kind: str  # 'fixed' | 'adaptive-abs' | 'adaptive-rel'
    r_fixed: int | None = None
    eta: float | None = None
    rel_c: float | None = None
    r_max: int | None = None

    @staticmethod
    def fixed(r: int, r_max: int | None = None) -> "RankPolicy":
        if r < 1:
            raise ValueError("fixed rank must be >= 1")
        return RankPolicy(kind="fixed", r_fixed=r, r_max=r_max)

    @staticmethod
    def adaptive_absolute(eta: float, r_max: int | None = None) -> "RankPolicy":
        if eta < 0:
            raise ValueError("tolerance must be >= 0")
        return RankPolicy(kind="adaptive-abs", eta=eta, r_max=r_max)

    @staticmethod
    def adaptive_relative(c: float, r_max: int | None = None) -> "RankPolicy":
        if c <= 0:
            raise ValueError("relative tolerance factor must be > 0")
        return RankPolicy(kind="adaptive-rel", rel_c=c, r_max=r_max)

    def threshold(self, sigma1: float) -> float | None:
        if self.kind == "adaptive-abs":
            return self.eta
        if self.kind == "adaptive-rel":
            return self.rel_c * sigma1
        return None


@dataclass(frozen=True)
class Truncation:
    """Output of :func:`truncate_s`: ``Sbar ~= left @ diag(sigma) @ right.T``."""

    left: np.ndarray
    sigma: np.ndarray
    right: np.ndarray
    rank: int
    tail: float
    clamped: bool = False

    @property
    def s_matrix(self) -> np.ndarray:
        return np.diag(self.sigma)


def truncate_s(sbar: np.ndarray, policy: RankPolicy) -> Truncation:
    """SVD-truncate a core matrix according to the rank policy.

    The retained rank is the smallest one whose discarded singular values
    have l2 norm at most the tolerance (adaptive modes) or the configured
    fixed rank; it is floored at 1 and capped at ``r_max``.
    """
    if not np.all(np.isfinite(sbar)):
        raise NumericError("non-finite core matrix before truncation")
    try:
        left, sigma, right_t = np.linalg.svd(sbar)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericError("SVD failed during truncation") from exc
    rbar = sigma.size
    tails = np.sqrt(np.cumsum(sigma[::-1] ** 2))[::-1]  # tails[i] = ||sigma[i:]||_2
    eta = policy.threshold(sigma[0] if rbar else 0.0)
    if policy.kind == "fixed":
        rank = min(policy.r_fixed, rbar)
    else:
        keep = np.nonzero(tails > eta)[0]
        rank = int(keep[-1]) + 1 if keep.size else 0
    rank = max(rank, 1)
    clamped = False
    if policy.r_max is not None and rank > policy.r_max:
        rank = policy.r_max
        clamped = True
    rank = min(rank, rbar)
    tail = float(tails[rank]) if rank < rbar else 0.0
    return Truncation(left=left[:, :rank], sigma=sigma[:rank].copy(),
                      right=right_t[:rank, :].T, rank=rank, tail=tail, clamped=clamped)


def weighted_truncated_svd(w: np.ndarray, gx: Grid1D, gy: Grid1D,
                           policy: RankPolicy, t: float = 0.0) -> LowRankState:
    """Factor a dense coefficient matrix into a mass-orthonormal low-rank state.

    The SVD is taken of the symmetrically mass-scaled matrix, so the discarded
    tail equals the reconstruction error in the weighted norm.
    """
    if not np.all(np.isfinite(w)):
        raise ValueError("matrix must be finite")
    dx_sqrt = np.sqrt(gx.mass_diag)
    dy_sqrt = np.sqrt(gy.mass_diag)
    scaled = dx_sqrt[:, None] * w * dy_sqrt[None, :]
    trunc = truncate_s(scaled, policy)
    u = trunc.left / dx_sqrt[:, None]
    v = trunc.right / dy_sqrt[:, None]
    return LowRankState(u=u, s=trunc.s_matrix, v=v, t=t)


@dataclass(frozen=True, eq=False)
class Propagator:
    """Exact application of ``exp(s L)`` for one direction, ``L = -D^{-1} A``.

    Built from the cached symmetric eigendecomposition of the grid, so a
    single dense factor applies the flow exactly for the given step.
    """

    grid: Grid1D
    s: float
    eigvals: np.ndarray  # eigenvalues of -L, nonnegative
    eigvecs: np.ndarray
    sqrt_mass: np.ndarray
    inv_sqrt_mass: np.ndarray
    factor: np.ndarray

    @property
    def size(self) -> int:
        return self.grid.size

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Left-multiply a vector or a block of columns by ``exp(s L)``."""
        if x.shape[0] != self.size:
            raise ValueError(f"operand has leading dimension {x.shape[0]}, expected {self.size}")
        return self.factor @ x

    def apply_right(self, w: np.ndarray) -> np.ndarray:
        """Right-multiply a coefficient matrix by ``exp(s L)^T``."""
        if w.shape[1] != self.size:
            raise ValueError(f"operand has trailing dimension {w.shape[1]}, expected {self.size}")
        return w @ self.factor.T


def make_propagator(grid: Grid1D, s: float) -> Propagator:
    """Build (or fetch from the grid cache) the exact propagator for step ``s``."""
    if not np.isfinite(s):
        raise ValueError("propagator step must be finite")
    cached = grid._propagator_cache.get(s)
    if cached is not None:
        return cached
    lam, q, d_sqrt, d_inv_sqrt = grid.spectral
    exponents = -s * lam
    if np.max(exponents, initial=0.0) > _EXP_CAP:
        raise PropagatorOverflowError(
            f"exp({np.max(exponents):.3g}) overflows for step s={s:g}; "
            "negative-direction step too large for this grid")
    factor = (d_inv_sqrt[:, None] * q) @ (np.exp(exponents)[:, None] * (q.T * d_sqrt[None, :]))
    prop = Propagator(grid=grid, s=float(s), eigvals=lam, eigvecs=q,
                      sqrt_mass=d_sqrt, inv_sqrt_mass=d_inv_sqrt, factor=factor)
    grid._propagator_cache[s] = prop
    return prop


def apply_linear_step(state, px: Propagator, py: Propagator):
    """Advance the heat sub-flow exactly: dense matrices and factored states.

    The factored path re-orthonormalizes the propagated bases with ``gqr``
    and moves the triangular factors into the core, so the rank never grows.
    """
    if isinstance(state, LowRankState):
        if state.shape != (px.size, py.size):
            raise ValueError("state shape does not match the propagators")
        u1, r = gqr(px.apply(state.u), px.grid.mass_diag)
        v1, p = gqr(py.apply(state.v), py.grid.mass_diag)
        return LowRankState(u=u1, s=r @ state.s @ p.T, v=v1, t=state.t)
    w = np.asarray(state, dtype=float)
    if w.shape != (px.size, py.size):
        raise ValueError("matrix shape does not match the propagators")
    return py.apply_right(px.apply(w))
