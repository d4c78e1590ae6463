"""Sparse storage, direct and iterative solvers, and the block preconditioner.

The assembled Galerkin systems are real and non-symmetric, with an n x n
outer block structure over the coupling matrix.  Small systems go through
a sparse LU factorization; large ones use the bi-conjugate gradient
iteration with a block-diagonal preconditioner built from the per-point
coupling block gamma = I + (2d/h^2) a.

The iterative method is classic preconditioned BiCG (two matrix products
per step, one with A and one with its transpose).  The stabilized variant
was tried first and diverges on these systems: the coupling matrix has
eigenvalue pairs with large imaginary parts and the block spectrum
straddles the imaginary axis, which defeats the real stabilization
polynomial.  Classic BiCG converges cleanly on the same instances.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .time_basis import CouplingMatrix

__all__ = [
    "SparseMatrix",
    "SolveReport",
    "BlockPreconditioner",
    "BlockSystem",
    "SingularMatrixError",
    "DIRECT_LIMIT",
    "lu_solve",
    "bicg_solve",
    "build_preconditioner",
    "matvec",
    "write_matrix_market",
]

# Largest N handled by the direct LU path; beyond this the iterative
# solver is mandatory.
DIRECT_LIMIT = 20_000

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


class SingularMatrixError(RuntimeError):
    """Raised when factorization hits a zero pivot beyond pivoting recovery."""


class SparseMatrix:
    """Square sparse matrix in compressed-row storage.

    Thin wrapper over a CSR matrix that enforces the storage contract:
    square shape, indices in range, no explicitly stored zero values.
    """

    def __init__(self, matrix):
        csr = sp.csr_matrix(matrix)
        if csr.shape[0] != csr.shape[1]:
            raise ValueError(f"matrix must be square, got shape {csr.shape}")
        csr.sum_duplicates()
        csr.eliminate_zeros()
        csr.check_format()
        self.csr = csr

    @property
    def N(self) -> int:
        return self.csr.shape[0]

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.N,):
            raise ValueError(f"vector length {x.shape} does not match N={self.N}")
        return self.csr @ x

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        """Product with the transpose, A^T x."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.N,):
            raise ValueError(f"vector length {x.shape} does not match N={self.N}")
        return self.csr.T @ x


@dataclass
class SolveReport:
    """Outcome of one linear solve."""

    iterations: int
    residual: float
    converged: bool
    method: str
    breakdown: bool = False


@dataclass
class BlockPreconditioner:
    """Per-spatial-point n x n preconditioner gamma = I + (2d/h^2) a.

    With the basis index outermost in the unknown vector, the n
    coefficients of one spatial point sit at a fixed stride, so applying
    gamma_inverse to every point is a single (n, n) x (n, block) product.
    """

    gamma: np.ndarray
    gamma_inverse: np.ndarray = field(repr=False)
    block_size: int

    @property
    def n(self) -> int:
        return self.gamma.shape[0]

    def apply(self, v: np.ndarray) -> np.ndarray:
        return (self.gamma_inverse @ v.reshape(self.n, self.block_size)).ravel()

    def apply_transpose(self, v: np.ndarray) -> np.ndarray:
        return (self.gamma_inverse.T @ v.reshape(self.n, self.block_size)).ravel()


@dataclass
class BlockSystem:
    """Assembled block system: matrix, right-hand side, and layout metadata."""

    matrix: SparseMatrix
    rhs: np.ndarray
    n: int
    spatial_shape: tuple
    h: float

    @property
    def dimension(self) -> int:
        return len(self.spatial_shape)

    @property
    def N(self) -> int:
        return self.matrix.N


def matvec(A: SparseMatrix, x: np.ndarray) -> np.ndarray:
    """Sparse matrix-vector product."""
    return A.matvec(x)


def lu_solve(A: SparseMatrix, b: np.ndarray) -> np.ndarray:
    """Direct solve by sparse LU factorization, for N up to DIRECT_LIMIT."""
    if A.N > DIRECT_LIMIT:
        raise ValueError(f"N={A.N} exceeds the direct-solver threshold {DIRECT_LIMIT}")
    b = np.asarray(b, dtype=float)
    if b.shape != (A.N,):
        raise ValueError(f"right-hand side length {b.shape} does not match N={A.N}")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", sp.linalg.MatrixRankWarning)
            factor = splu(A.csr.tocsc())
        x = factor.solve(b)
    except (RuntimeError, sp.linalg.MatrixRankWarning) as exc:
        raise SingularMatrixError(f"LU factorization failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("LU solve produced non-finite values (singular matrix)")
    return x


def build_preconditioner(
    coupling: CouplingMatrix, h: float, d: int, m_block: int
) -> BlockPreconditioner:
    """Build gamma = I + (2d/h^2) a and its dense inverse."""
    if not h > 0:
        raise ValueError(f"grid spacing must be positive, got {h!r}")
    if d not in (1, 2):
        raise ValueError(f"spatial dimension must be 1 or 2, got {d!r}")
    a = coupling.entries
    gamma = np.eye(coupling.n) + (2.0 * d / h**2) * a
    try:
        gamma_inverse = np.linalg.inv(gamma)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"preconditioner block is singular: {exc}") from exc
    return BlockPreconditioner(gamma=gamma, gamma_inverse=gamma_inverse, block_size=int(m_block))


def _fresh_shadow(N: int, attempt: int) -> np.ndarray:
    # deterministic replacement shadow vector for the restart path
    rng = np.random.default_rng(12345 + attempt)
    v = rng.standard_normal(N)
    return v / np.linalg.norm(v)


def bicg_solve(
    A: SparseMatrix,
    b: np.ndarray,
    precond: BlockPreconditioner | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[np.ndarray, SolveReport]:
    """Preconditioned bi-conjugate gradient iteration.

    Left preconditioning: the iteration is driven by z = M^{-1} r and the
    shadow recurrence by the transposed applications.  Convergence is
    declared on the true relative residual ||b - Ax|| / ||b||.  A breakdown
    (vanishing inner product) triggers one restart from the current iterate
    with a fresh shadow vector; a second breakdown is reported distinctly
    from plain non-convergence via the report's breakdown flag.
    """
    if not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter!r}")
    b = np.asarray(b, dtype=float)
    method = "bicg+precond" if precond is not None else "bicg"

    def m_apply(v):
        return precond.apply(v) if precond is not None else v

    def mt_apply(v):
        return precond.apply_transpose(v) if precond is not None else v

    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        return np.zeros_like(b), SolveReport(0, 0.0, True, method)

    x = np.zeros_like(b)
    r = b - A.matvec(x)
    iterations = 0
    restarts = 0

    while iterations < max_iter:
        # (re)initialize the coupled recurrences
        shadow = r.copy() if restarts == 0 else _fresh_shadow(b.size, restarts)
        z = m_apply(r)
        zs = mt_apply(shadow)
        p = z.copy()
        ps = zs.copy()
        rho = float(shadow @ z)
        broke = abs(rho) <= 1e-14 * np.linalg.norm(shadow) * np.linalg.norm(z)

        while not broke and iterations < max_iter:
            q = A.matvec(p)
            qs = A.rmatvec(ps)
            sigma = float(ps @ q)
            if abs(sigma) <= 1e-14 * np.linalg.norm(ps) * np.linalg.norm(q):
                broke = True
                break
            step = rho / sigma
            x += step * p
            r -= step * q
            shadow -= step * qs
            iterations += 1
            if np.linalg.norm(r) <= tol * norm_b:
                # confirm on the true residual before declaring convergence
                true_res = float(np.linalg.norm(b - A.matvec(x)) / norm_b)
                if true_res <= tol:
                    return x, SolveReport(iterations, true_res, True, method)
            z = m_apply(r)
            zs = mt_apply(shadow)
            rho_new = float(shadow @ z)
            if abs(rho_new) <= 1e-14 * np.linalg.norm(shadow) * np.linalg.norm(z):
                broke = True
                break
            beta = rho_new / rho
            p = z + beta * p
            ps = zs + beta * ps
            rho = rho_new

        if not broke:
            break  # max_iter exhausted
        restarts += 1
        r = b - A.matvec(x)
        if np.linalg.norm(r) <= tol * norm_b:
            true_res = float(np.linalg.norm(r) / norm_b)
            return x, SolveReport(iterations, true_res, True, method)
        if restarts > 1:
            true_res = float(np.linalg.norm(r) / norm_b)
            return x, SolveReport(iterations, true_res, False, method, breakdown=True)

    true_res = float(np.linalg.norm(b - A.matvec(x)) / norm_b)
    return x, SolveReport(iterations, true_res, true_res <= tol, method)


def write_matrix_market(A: SparseMatrix, path) -> None:
    """Export in Matrix Market coordinate text format (general, 1-based)."""
    coo = A.csr.tocoo()
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{A.N} {A.N} {A.nnz}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")
