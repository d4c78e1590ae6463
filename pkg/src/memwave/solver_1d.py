"""Assembly and solution of the 1D block system.

Discretizing the Laplacian with the 3-point stencil on a uniform grid of
m points turns the projected equations into the block system

    (I + kron(a, L)) c = kron(w, g),    L = (1/h^2) tridiag(-1, 2, -1),

with the basis index outermost in the unknown vector.  Ghost values
outside the grid are zero (free boundary on a large enough grid), guarded
by a decay check on the initial data.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .memory_kernel import MemoryOrder
from .sparse_linalg import (
    DIRECT_LIMIT,
    BlockSystem,
    SolveReport,
    SparseMatrix,
    bicg_solve,
    build_preconditioner,
    lu_solve,
)
from .time_basis import (
    CouplingMatrix,
    SourceProjection,
    TimeBasis,
    build_basis,
    coupling_matrix,
    kernel_convolution,
    reconstruct,
    source_weights,
)

__all__ = [
    "Grid1D",
    "InitialField1D",
    "SolutionField1D",
    "SolverConvergenceError",
    "BOUNDARY_DECAY_TOL",
    "assemble_1d",
    "solve_1d",
    "sup_error",
    "residual_orthogonality",
]

BOUNDARY_DECAY_TOL = 1e-12


class SolverConvergenceError(RuntimeError):
    """Iterative solve failed; carries the SolveReport."""

    def __init__(self, message: str, report: SolveReport):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of m points spanning [x_min, x_max] inclusive.

    The stencil's ghost neighbors sit one spacing outside the interval and
    carry zero values.
    """

    x_min: float
    x_max: float
    m: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError(f"need x_max > x_min, got [{self.x_min}, {self.x_max}]")
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 3):
            raise ValueError(f"m must be an integer >= 3, got {self.m!r}")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.m - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.m)


@dataclass(frozen=True)
class InitialField1D:
    """Initial condition g(x), assumed negligible at the grid boundary."""

    rule: object = field(repr=False)
    label: str = "custom"

    @classmethod
    def gaussian(cls, sigma: float = 1.0) -> "InitialField1D":
        if not sigma > 0:
            raise ValueError(f"sigma must be positive, got {sigma!r}")
        return cls(rule=lambda x: np.exp(-np.asarray(x, dtype=float) ** 2 / sigma**2),
                   label=f"gaussian(sigma={sigma})")

    def evaluate(self, x) -> np.ndarray:
        return np.asarray(self.rule(np.asarray(x, dtype=float)), dtype=float)

    def boundary_decay(self, grid: Grid1D) -> float:
        return float(np.max(np.abs(self.evaluate(np.array([grid.x_min, grid.x_max])))))


@dataclass
class SolutionField1D:
    """Galerkin coefficients c_k(x_i) with everything needed to evaluate f_n."""

    coefficients: np.ndarray
    grid: Grid1D
    basis: TimeBasis
    order: MemoryOrder
    initial: InitialField1D
    report: SolveReport

    def reconstruct(self, t: float) -> np.ndarray:
        """Spatial field f_n(x_i, t) at one time."""
        return reconstruct(self.coefficients, self.basis, t)


def laplacian_1d(m: int, h: float) -> sp.csr_matrix:
    """Negative 3-point Laplacian (1/h^2) tridiag(-1, 2, -1), m x m."""
    main = np.full(m, 2.0)
    off = np.full(m - 1, -1.0)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2


def assemble_1d(
    coupling: CouplingMatrix,
    weights: SourceProjection,
    g: InitialField1D,
    grid: Grid1D,
) -> BlockSystem:
    """Assemble the N = n*m block system with tridiagonal blocks."""
    n = coupling.n
    if weights.n != n:
        raise ValueError(f"coupling size {n} does not match weights size {weights.n}")
    m = grid.m
    L = laplacian_1d(m, grid.h)
    A = sp.identity(n * m, format="csr") + sp.kron(sp.csr_matrix(coupling.entries), L, format="csr")
    rhs = np.kron(weights.weights, g.evaluate(grid.points))
    return BlockSystem(matrix=SparseMatrix(A), rhs=rhs, n=n, spatial_shape=(m,), h=grid.h)


def solve_1d(
    order: MemoryOrder,
    T: float,
    n: int,
    grid: Grid1D,
    g: InitialField1D,
    method: str = "auto",
    tol: float = 1e-10,
    max_iter: int = 10_000,
    precond: bool = True,
) -> SolutionField1D:
    """Solve on [0, T] and return the reconstructable coefficient field.

    method "auto" picks LU for N up to the direct threshold and the
    preconditioned iteration beyond; "direct" or "bicg" force one path.
    """
    decay = g.boundary_decay(grid)
    if decay > BOUNDARY_DECAY_TOL:
        warnings.warn(
            f"initial data is {decay:.2e} at the grid boundary; "
            "free-boundary closure assumes negligible values there",
            stacklevel=2,
        )
    basis = build_basis(T, n)
    coupling = coupling_matrix(basis, order)
    weights = source_weights(basis)
    system = assemble_1d(coupling, weights, g, grid)

    if method not in ("auto", "direct", "bicg"):
        raise ValueError(f"unknown method {method!r}")
    use_direct = method == "direct" or (method == "auto" and system.N <= DIRECT_LIMIT)
    if use_direct:
        x = lu_solve(system.matrix, system.rhs)
        res = float(
            np.linalg.norm(system.matrix.matvec(x) - system.rhs) / np.linalg.norm(system.rhs)
        )
        report = SolveReport(0, res, True, "direct")
    else:
        pc = build_preconditioner(coupling, grid.h, 1, grid.m) if precond else None
        x, report = bicg_solve(system.matrix, system.rhs, pc, tol=tol, max_iter=max_iter)
        if not report.converged:
            kind = "breakdown" if report.breakdown else "no convergence"
            raise SolverConvergenceError(
                f"iterative solve failed ({kind}) after {report.iterations} iterations, "
                f"residual {report.residual:.3e}",
                report,
            )
    coeffs = x.reshape(n, grid.m)
    return SolutionField1D(coeffs, grid, basis, order, g, report)


def sup_error(field: SolutionField1D, t: float, reference) -> float:
    """Sup-norm distance between the reconstruction at t and a reference.

    reference is either a callable evaluated on the grid or an array of
    per-point values on the same grid.
    """
    numeric = field.reconstruct(t)
    if callable(reference):
        ref = np.asarray(reference(field.grid.points), dtype=float)
    else:
        ref = np.asarray(reference, dtype=float)
    if ref.shape != numeric.shape:
        raise ValueError(f"reference shape {ref.shape} does not match grid shape {numeric.shape}")
    return float(np.max(np.abs(numeric - ref)))


def residual_orthogonality(field: SolutionField1D, num_nodes: int | None = None) -> float:
    """Largest Galerkin residual projection over basis functions and grid points.

    Evaluates eps_n(x_i, t) = f_n - g - int_0^t a(t-s) Lap_h f_n(., s) ds
    pointwise in time and projects onto each phi_j by quadrature, without
    reusing the assembled system.  The polynomial part goes through a
    Gauss-Legendre rule, the kernel part through a Gauss-Jacobi rule that
    absorbs the t^alpha factor, so both are integrated exactly.
    """
    from scipy.special import roots_jacobi

    basis, order, grid = field.basis, field.order, field.grid
    n, m, T, alpha = basis.size_n, grid.m, basis.horizon_T, field.order.alpha
    q = int(num_nodes) if num_nodes is not None else 4 * n + 16

    C = field.coefficients
    gvals = field.initial.evaluate(grid.points)
    LC = (laplacian_1d(m, grid.h) @ C.T).T

    # polynomial part: sum_k c_k phi_k(t) - g
    x_gl, w_gl = np.polynomial.legendre.leggauss(q)
    t_gl = T * (x_gl + 1.0) / 2.0
    phi_gl = basis.evaluate(t_gl)
    poly_part = C.T @ phi_gl - gvals[:, None]
    proj = (phi_gl * (w_gl * T / 2.0)) @ poly_part.T

    # kernel part: + sum_k (L c_k) I_k(t), with I_k(t) = t^alpha * polynomial
    x_j, w_j = roots_jacobi(q, 0.0, alpha)
    t_j = T * (x_j + 1.0) / 2.0
    w_eff = w_j * (T / 2.0) ** (alpha + 1.0) / t_j**alpha
    IK = kernel_convolution(basis, order, t_j, q)
    kern_part = LC.T @ IK
    proj += (basis.evaluate(t_j) * w_eff) @ kern_part.T

    return float(np.max(np.abs(proj)))
