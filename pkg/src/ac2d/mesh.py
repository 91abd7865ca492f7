"""Gauss-Lobatto nodal grids and lumped mass / stiffness assembly.

Each spatial direction is discretised by ``M`` elements of degree ``k`` with
nodal Lagrange basis functions on the per-element Gauss-Lobatto points.  The
fixed-node quadrature makes the mass matrix diagonal, while the stiffness
matrix stays banded with bandwidth ``2k + 1``.  Boundary conditions are
homogeneous Neumann, so the constant function lies in the stiffness null
space.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError

MAX_DEGREE = 8


def gauss_lobatto_rule(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Points and weights of the (k+1)-point Gauss-Lobatto rule on [0, 1].

    The rule contains both endpoints and integrates polynomials of degree up
    to ``2k - 1`` exactly.  Interior points are the roots of the derivative
    of the Legendre polynomial of degree ``k``, polished by Newton iteration.
    """
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_DEGREE:
        raise ConfigError(f"unsupported element degree k={k}; expected 1 <= k <= {MAX_DEGREE}")
    if k == 1:
        pts = np.array([-1.0, 1.0])
    else:
        dleg = np.polynomial.legendre.Legendre.basis(k).deriv()
        interior = np.sort(dleg.roots().real)
        d2leg = dleg.deriv()
        for _ in range(3):
            interior = interior - dleg(interior) / d2leg(interior)
        pts = np.concatenate(([-1.0], interior, [1.0]))
    legk = np.polynomial.legendre.Legendre.basis(k)
    wts = 2.0 / (k * (k + 1) * legk(pts) ** 2)
    return (pts + 1.0) / 2.0, wts / 2.0


def _barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def lagrange_values(nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate the nodal Lagrange basis at points ``x``.

    Returns an array of shape ``(len(x), len(nodes))`` whose ``[i, j]`` entry
    is ``l_j(x_i)``.  Points coinciding with a node are handled exactly.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    bw = _barycentric_weights(nodes)
    diff = x[:, None] - nodes[None, :]
    exact_row, exact_col = np.nonzero(diff == 0.0)
    diff[exact_row, :] = 1.0  # placeholder; exact rows are rewritten below
    terms = bw[None, :] / diff
    sums = terms.sum(axis=1, keepdims=True)
    if exact_row.size:
        sums[exact_row] = 1.0
    vals = terms / sums
    if exact_row.size:
        vals[exact_row, :] = 0.0
        vals[exact_row, exact_col] = 1.0
    return vals


def lagrange_diff_matrix(nodes: np.ndarray) -> np.ndarray:
    """Nodal differentiation matrix ``D[i, j] = l_j'(x_i)``."""
    bw = _barycentric_weights(nodes)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    dmat = (bw[None, :] / bw[:, None]) / diff
    np.fill_diagonal(dmat, 0.0)
    np.fill_diagonal(dmat, -dmat.sum(axis=1))
    return dmat


def _reference_stiffness(k: int) -> np.ndarray:
    """Exact integrals of Lagrange derivative products on the unit element.

    The integrand has degree ``2k - 2``, so the (k+1)-point Gauss-Legendre
    rule evaluates it exactly.
    """
    ref_nodes, _ = gauss_lobatto_rule(k)
    gl_pts, gl_wts = np.polynomial.legendre.leggauss(k + 1)
    gl_pts = (gl_pts + 1.0) / 2.0
    gl_wts = gl_wts / 2.0
    dmat = lagrange_diff_matrix(ref_nodes)
    dvals = lagrange_values(ref_nodes, gl_pts) @ dmat  # l_j'(gl_pts)
    return dvals.T @ (gl_wts[:, None] * dvals)


@dataclass(frozen=True, eq=False)
class Grid1D:
    """One direction of the tensor-product discretisation.

    ``nodes`` are the global Gauss-Lobatto points, ``mass_diag`` the merged
    lumped quadrature weights (interior element boundaries carry the weight
    of both neighbouring elements) and ``stiffness`` the assembled derivative
    Gram matrix.
    """

    degree: int
    element_count: int
    a: float
    b: float
    nodes: np.ndarray
    mass_diag: np.ndarray
    stiffness: np.ndarray

    @property
    def size(self) -> int:
        return self.degree * self.element_count + 1

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.element_count

    @property
    def lumped_weights(self) -> np.ndarray:
        return self.mass_diag

    @cached_property
    def reference_nodes(self) -> np.ndarray:
        return gauss_lobatto_rule(self.degree)[0]

    @cached_property
    def spectral(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Eigendecomposition of ``D^{-1/2} A D^{-1/2}``.

        Returns ``(lam, Q, d_sqrt, d_inv_sqrt)`` with ``lam >= 0``; these are
        the eigenvalues of ``-L`` where ``L = -D^{-1} A``.
        """
        d_sqrt = np.sqrt(self.mass_diag)
        d_inv_sqrt = 1.0 / d_sqrt
        sym = d_inv_sqrt[:, None] * self.stiffness * d_inv_sqrt[None, :]
        sym = 0.5 * (sym + sym.T)
        lam, q = np.linalg.eigh(sym)
        lam = np.where(lam < 0.0, 0.0, lam)  # clip quadrature-scale negatives
        return lam, q, d_sqrt, d_inv_sqrt

    @cached_property
    def _propagator_cache(self) -> dict:
        return {}

    @cached_property
    def symmetric_about_center(self) -> bool:
        """Whether node reflection about the interval midpoint maps the node set to itself."""
        mirrored = (self.a + self.b) - self.nodes[::-1]
        return bool(np.max(np.abs(mirrored - self.nodes)) <= 1e-12 * (self.b - self.a))


def build_grid(k: int, element_count: int, a: float, b: float) -> Grid1D:
    """Assemble the 1D grid with lumped mass diagonal and banded stiffness."""
    if element_count < 1:
        raise ConfigError(f"element count must be >= 1, got {element_count}")
    if not a < b:
        raise ConfigError(f"invalid interval [{a}, {b}]")
    ref_pts, ref_wts = gauss_lobatto_rule(k)
    h = (b - a) / element_count
    size = k * element_count + 1

    nodes = np.empty(size)
    mass = np.zeros(size)
    stiff = np.zeros((size, size))
    ref_stiff = _reference_stiffness(k)
    for e in range(element_count):
        sl = slice(e * k, e * k + k + 1)
        nodes[sl] = (a + e * h) + ref_pts * h
        mass[sl] += ref_wts * h
        stiff[sl, sl] += ref_stiff / h
    nodes[0] = a
    nodes[-1] = b
    return Grid1D(degree=k, element_count=element_count, a=float(a), b=float(b),
                  nodes=nodes, mass_diag=mass, stiffness=stiff)


@dataclass(frozen=True, eq=False)
class TensorGrid2D:
    """Tensor product of two 1D grids covering ``[a, b] x [c, d]``."""

    gx: Grid1D
    gy: Grid1D

    @property
    def shape(self) -> tuple[int, int]:
        return self.gx.size, self.gy.size

    @property
    def area(self) -> float:
        return (self.gx.b - self.gx.a) * (self.gy.b - self.gy.a)

    @cached_property
    def symmetric_about_center(self) -> bool:
        return self.gx.symmetric_about_center and self.gy.symmetric_about_center


def build_tensor_grid(k: int, mx: int, ny: int, domain: tuple[float, float, float, float]) -> TensorGrid2D:
    a, b, c, d = domain
    return TensorGrid2D(gx=build_grid(k, mx, a, b), gy=build_grid(k, ny, c, d))


def interpolate_initial(grid2d: TensorGrid2D, f) -> np.ndarray:
    """Sample a scalar field at the tensor nodes.

    Nodal interpolation is exact on the nodal basis, so the coefficient
    matrix is just the table of point values ``W[i, j] = f(x_i, y_j)``.
    """
    xs, ys = np.meshgrid(grid2d.gx.nodes, grid2d.gy.nodes, indexing="ij")
    w = np.asarray(f(xs, ys), dtype=float)
    if w.shape != grid2d.shape:
        w = np.broadcast_to(w, grid2d.shape).copy()
    if not np.all(np.isfinite(w)):
        raise ValueError("initial condition produced non-finite samples")
    return w
