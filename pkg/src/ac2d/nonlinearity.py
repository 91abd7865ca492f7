"""Allen-Cahn reaction terms in dense and factored (Hadamard-kernel) form.

Three variants of the reaction term ``N(w)``:

* ``classical``  : ``w - w^3``
* ``rslm``       : classical minus its weighted mean (constant multiplier)
* ``bblm``       : classical minus a multiplier proportional to ``1 - w^2``

The factored entry points evaluate products like ``N(U S V^T) M V`` without
forming ``U S V^T``: Hadamard powers of a factored matrix expand into
column-wise Hadamard products, so the cubic term reduces to dense matrix
products over the unordered column triples (with multinomial multiplicities).
Both conservative variants keep ``(N(W), 1)`` exactly zero in the lumped
inner product.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import DegenerateStateError
from .mesh import TensorGrid2D

_CHUNK = 8192
_COMPRESS_MIN_RANK = 8
_VARIANTS = ("classical", "rslm", "bblm")


@lru_cache(maxsize=32)
def _triples(r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Unordered index triples i <= j <= l with multinomial multiplicities."""
    idx = [(i, j, l) for i in range(r) for j in range(i, r) for l in range(j, r)]
    ii = np.fromiter((t[0] for t in idx), dtype=np.intp, count=len(idx))
    jj = np.fromiter((t[1] for t in idx), dtype=np.intp, count=len(idx))
    ll = np.fromiter((t[2] for t in idx), dtype=np.intp, count=len(idx))
    mult = np.where((ii == jj) & (jj == ll), 1.0, np.where((ii < jj) & (jj < ll), 6.0, 3.0))
    return ii, jj, ll, mult


@lru_cache(maxsize=32)
def _pairs(r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    idx = [(i, j) for i in range(r) for j in range(i, r)]
    ii = np.fromiter((t[0] for t in idx), dtype=np.intp, count=len(idx))
    jj = np.fromiter((t[1] for t in idx), dtype=np.intp, count=len(idx))
    mult = np.where(ii == jj, 1.0, 2.0)
    return ii, jj, mult


def _compress(u: np.ndarray, s: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fold the core into the left factor, dropping machine-zero directions.

    Returns ``(a, b)`` with ``a b^T = u s v^T`` up to roundoff.  Kernel cost
    scales with the cube of the column count, so removing numerically zero
    singular values is a large win for augmented cores of small true rank.
    """
    if min(s.shape) <= _COMPRESS_MIN_RANK:
        return u @ s, v
    f, sig, gt = np.linalg.svd(s, full_matrices=False)
    cut = sig[0] * 1e-14 * max(s.shape)
    keep = max(int(np.count_nonzero(sig > cut)), 1)
    a = (u @ f[:, :keep]) * sig[:keep][None, :]
    b = v @ gt[:keep, :].T
    return a, b


def _hadamard_cols(mat: np.ndarray, *index_sets: np.ndarray) -> np.ndarray:
    out = mat[:, index_sets[0]].copy()
    for ix in index_sets[1:]:
        out *= mat[:, ix]
    return out


def _cubic_apply(a: np.ndarray, b: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``(a b^T)^{o3} @ y`` via the triple Hadamard expansion."""
    ii, jj, ll, mult = _triples(a.shape[1])
    out = np.zeros((a.shape[0], y.shape[1]))
    for lo in range(0, ii.size, _CHUNK):
        sl = slice(lo, lo + _CHUNK)
        ah = _hadamard_cols(a, ii[sl], jj[sl], ll[sl])
        bh = _hadamard_cols(b, ii[sl], jj[sl], ll[sl])
        out += ah @ (mult[sl][:, None] * (bh.T @ y))
    return out


def _cubic_project(a: np.ndarray, b: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``x^T (a b^T)^{o3} y`` for test blocks ``x`` (left) and ``y`` (right)."""
    ii, jj, ll, mult = _triples(a.shape[1])
    out = np.zeros((x.shape[1], y.shape[1]))
    for lo in range(0, ii.size, _CHUNK):
        sl = slice(lo, lo + _CHUNK)
        ah = _hadamard_cols(a, ii[sl], jj[sl], ll[sl])
        bh = _hadamard_cols(b, ii[sl], jj[sl], ll[sl])
        out += (x.T @ ah) @ (mult[sl][:, None] * (bh.T @ y))
    return out


def _cubic_scalar(a: np.ndarray, b: np.ndarray, da: np.ndarray, db: np.ndarray) -> float:
    ii, jj, ll, mult = _triples(a.shape[1])
    total = 0.0
    for lo in range(0, ii.size, _CHUNK):
        sl = slice(lo, lo + _CHUNK)
        ah = _hadamard_cols(a, ii[sl], jj[sl], ll[sl])
        bh = _hadamard_cols(b, ii[sl], jj[sl], ll[sl])
        total += float(np.dot(mult[sl] * (da @ ah), db @ bh))
    return total


def _quad_apply(a: np.ndarray, b: np.ndarray, y: np.ndarray) -> np.ndarray:
    ii, jj, mult = _pairs(a.shape[1])
    ah = _hadamard_cols(a, ii, jj)
    bh = _hadamard_cols(b, ii, jj)
    return ah @ (mult[:, None] * (bh.T @ y))


def _quad_project(a: np.ndarray, b: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    ii, jj, mult = _pairs(a.shape[1])
    ah = _hadamard_cols(a, ii, jj)
    bh = _hadamard_cols(b, ii, jj)
    return (x.T @ ah) @ (mult[:, None] * (bh.T @ y))


def _quad_scalar(a: np.ndarray, b: np.ndarray, da: np.ndarray, db: np.ndarray) -> float:
    ii, jj, mult = _pairs(a.shape[1])
    ah = _hadamard_cols(a, ii, jj)
    bh = _hadamard_cols(b, ii, jj)
    return float(np.dot(mult * (da @ ah), db @ bh))


class Nonlinearity:
    """Reaction term bound to a grid, with dense and factored evaluation."""

    def __init__(self, variant: str, grid: TensorGrid2D):
        if variant not in _VARIANTS:
            raise ValueError(f"unknown nonlinearity variant {variant!r}")
        self.variant = variant
        self.grid = grid
        self.dx = grid.gx.mass_diag
        self.dy = grid.gy.mass_diag
        self.area = grid.area

    @property
    def conservative(self) -> bool:
        return self.variant != "classical"

    # -- dense path --------------------------------------------------------

    def dense(self, w: np.ndarray) -> np.ndarray:
        f = w - w ** 3
        if self.variant == "classical":
            return f
        s1 = float(np.einsum("i,ij,j->", self.dx, f, self.dy))
        if self.variant == "rslm":
            return f - s1 / self.area
        g = 1.0 - w ** 2
        denom = float(np.einsum("i,ij,j->", self.dx, g, self.dy))
        self._check_denominator(denom)
        return f - (s1 / denom) * g

    def _check_denominator(self, denom: float) -> None:
        if abs(denom) < 1e-14 * self.area:
            raise DegenerateStateError(
                "field saturated at +-1: multiplier denominator vanished")

    # -- factored paths ------------------------------------------------------

    def times_v(self, u, s, v, vtest) -> np.ndarray:
        """``N(u s v^T) M_y vtest`` without densifying the state."""
        a, b = _compress(u, s, v)
        return self._apply_factored(a, b, self.dx, self.dy, vtest)

    def transpose_times_u(self, u, s, v, utest) -> np.ndarray:
        """``N(u s v^T)^T M_x utest``; the mirrored kernel with roles swapped."""
        a, b = _compress(v, s.T, u)
        return self._apply_factored(a, b, self.dy, self.dx, utest)

    def _apply_factored(self, a, b, da, db, ytest) -> np.ndarray:
        if ytest.ndim != 2 or ytest.shape[0] != b.shape[0]:
            raise ValueError("test block does not conform with the state factors")
        wy = db[:, None] * ytest
        out = a @ (b.T @ wy) - _cubic_apply(a, b, wy)
        if self.variant == "classical":
            return out
        s1 = self._linear_mass(a, b, da, db) - _cubic_scalar(a, b, da, db)
        ones_row = db @ ytest
        if self.variant == "rslm":
            out -= (s1 / self.area) * np.outer(np.ones(a.shape[0]), ones_row)
        else:
            denom = self.area - _quad_scalar(a, b, da, db)
            self._check_denominator(denom)
            coef = s1 / denom
            out -= coef * (np.outer(np.ones(a.shape[0]), ones_row) - _quad_apply(a, b, wy))
        return out

    def projected(self, ubar, u, s, v, vbar) -> np.ndarray:
        """``ubar^T M_x N(u s v^T) M_y vbar`` via the factored inner expansion."""
        if ubar.shape[0] != u.shape[0] or vbar.shape[0] != v.shape[0]:
            raise ValueError("projection blocks do not conform with the state factors")
        a, b = _compress(u, s, v)
        xu = self.dx[:, None] * ubar
        yv = self.dy[:, None] * vbar
        out = (xu.T @ a) @ (b.T @ yv) - _cubic_project(a, b, xu, yv)
        if self.variant == "classical":
            return out
        s1 = self._linear_mass(a, b, self.dx, self.dy) - _cubic_scalar(a, b, self.dx, self.dy)
        ones_block = np.outer(self.dx @ ubar, self.dy @ vbar)
        if self.variant == "rslm":
            out -= (s1 / self.area) * ones_block
        else:
            denom = self.area - _quad_scalar(a, b, self.dx, self.dy)
            self._check_denominator(denom)
            out -= (s1 / denom) * (ones_block - _quad_project(a, b, xu, yv))
        return out

    def scalars(self, u, s, v) -> tuple[float, float]:
        """Weighted totals of the Hadamard cube and square of the state."""
        a, b = _compress(u, s, v)
        cubic = _cubic_scalar(a, b, self.dx, self.dy)
        quadratic = _quad_scalar(a, b, self.dx, self.dy)
        return cubic, quadratic

    @staticmethod
    def _linear_mass(a, b, da, db) -> float:
        return float(np.dot(da @ a, db @ b))


class ZeroNonlinearity:
    """Disabled reaction term; leaves only the heat sub-flow."""

    variant = "zero"
    conservative = False

    def dense(self, w):
        return np.zeros_like(w)

    def times_v(self, u, s, v, vtest):
        return np.zeros((u.shape[0], vtest.shape[1]))

    def transpose_times_u(self, u, s, v, utest):
        return np.zeros((v.shape[0], utest.shape[1]))

    def projected(self, ubar, u, s, v, vbar):
        return np.zeros((ubar.shape[1], vbar.shape[1]))

    def scalars(self, u, s, v):
        return 0.0, 0.0


class IdentityNonlinearity:
    """Reaction term equal to the state itself; dense-path test hook."""

    variant = "identity"
    conservative = False

    def dense(self, w):
        return w.copy()
