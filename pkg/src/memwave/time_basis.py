"""Orthonormal time basis on [0, T] and the Galerkin coupling integrals.

The basis is the shifted Legendre family phi_j(t) = sqrt((2j-1)/T) *
P_{j-1}(2t/T - 1), j = 1..n, generated by the stable three-term
recurrence.  Projecting the memory integral onto this basis produces the
coupling matrix

    a_jk = int_0^T phi_j(tau) [ int_0^tau a(tau - s) phi_k(s) ds ] dtau,

which is non-symmetric in general.  The inner integral carries the weight
(tau - s)^(alpha-1), and the outer integrand behaves like tau^alpha times
a polynomial, so both are evaluated with Gauss-Jacobi rules that absorb
those algebraic factors exactly.  Plain Gauss-Legendre converges only
algebraically in the node count for fractional alpha and cannot reach the
required entry tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from .memory_kernel import MemoryOrder, gamma_fn

__all__ = [
    "TimeBasis",
    "CouplingMatrix",
    "SourceProjection",
    "QuadratureError",
    "build_basis",
    "coupling_matrix",
    "kernel_convolution",
    "source_weights",
    "reconstruct",
]

# Absolute tolerance on every coupling entry, two orders below the
# tightest linear-solver tolerance.
ENTRY_TOL = 1e-12


class QuadratureError(RuntimeError):
    """Raised when the quadrature doubling check exceeds the entry tolerance."""


@dataclass(frozen=True)
class TimeBasis:
    """Orthonormal shifted Legendre basis phi_1..phi_n on [0, T]."""

    horizon_T: float
    size_n: int

    def __post_init__(self):
        if not self.horizon_T > 0:
            raise ValueError(f"horizon T must be positive, got {self.horizon_T!r}")
        if not (isinstance(self.size_n, (int, np.integer)) and self.size_n >= 1):
            raise ValueError(f"basis size n must be a positive integer, got {self.size_n!r}")

    def evaluate(self, t) -> np.ndarray:
        """Evaluate all basis functions at times t.

        Returns an array of shape (n, len(t)); a scalar t gives shape (n,).
        """
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        T, n = self.horizon_T, self.size_n
        u = 2.0 * t_arr / T - 1.0
        P = np.empty((n, t_arr.size))
        P[0] = 1.0
        if n > 1:
            P[1] = u
        for k in range(1, n - 1):
            P[k + 1] = ((2 * k + 1) * u * P[k] - k * P[k - 1]) / (k + 1)
        scale = np.sqrt((2.0 * np.arange(1, n + 1) - 1.0) / T)
        out = P * scale[:, None]
        return out[:, 0] if np.isscalar(t) or np.ndim(t) == 0 else out


def build_basis(T: float, n: int) -> TimeBasis:
    """Construct the orthonormal basis of size n on [0, T]."""
    return TimeBasis(horizon_T=float(T), size_n=int(n))


@dataclass
class CouplingMatrix:
    """The n x n Galerkin coupling matrix a_jk for one (T, alpha) pair."""

    entries: np.ndarray
    horizon_T: float
    order: MemoryOrder

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValueError("coupling entries must form a square matrix")

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class SourceProjection:
    """Projection weights w_j = int_0^T phi_j dt; g_j(x) = f(x,0) * w_j."""

    weights: np.ndarray = field(repr=False)
    horizon_T: float = 0.0

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def kernel_convolution(basis: TimeBasis, order: MemoryOrder, t, num_nodes: int) -> np.ndarray:
    """Evaluate I_k(t) = int_0^t a(t - s) phi_k(s) ds for all k.

    Uses a Gauss-Jacobi rule with weight (1+x)^(alpha-1) so the algebraic
    kernel factor is integrated exactly; the remaining factor of the
    integrand is polynomial, making the rule exact for num_nodes >= n/2.
    Returns shape (n, len(t)).
    """
    alpha = order.alpha
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    xi, wi = roots_jacobi(num_nodes, 0.0, alpha - 1.0)
    ga = gamma_fn(alpha)
    out = np.empty((basis.size_n, t_arr.size))
    for i, tv in enumerate(t_arr):
        if tv == 0.0:
            out[:, i] = 0.0
            continue
        # s = tv - tv*(xi+1)/2 so that (tv - s) supplies the Jacobi weight
        s = tv * (1.0 - (xi + 1.0) / 2.0)
        out[:, i] = basis.evaluate(s) @ wi * (tv / 2.0) ** alpha / ga
    return out


def _coupling_entries(basis: TimeBasis, order: MemoryOrder, num_nodes: int) -> np.ndarray:
    alpha = order.alpha
    T, n = basis.horizon_T, basis.size_n
    x_out, w_out = roots_jacobi(num_nodes, 0.0, alpha)
    tau = T * (x_out + 1.0) / 2.0
    # I_k(tau) = tau^alpha * (polynomial); the Jacobi weight already carries
    # tau^alpha, so divide it back out of the evaluated inner integrals.
    w_eff = w_out * (T / 2.0) ** (alpha + 1.0) / tau**alpha
    inner = kernel_convolution(basis, order, tau, num_nodes)
    phi_tau = basis.evaluate(tau)
    return (phi_tau * w_eff) @ inner.T


def coupling_matrix(basis: TimeBasis, order: MemoryOrder, quad: int | None = None) -> CouplingMatrix:
    """Compute the coupling matrix a_jk to ENTRY_TOL absolute accuracy.

    quad is the node count per quadrature direction (default 2n+8).  The
    result is verified by recomputing at doubled order; disagreement above
    the tolerance raises QuadratureError.
    """
    q = int(quad) if quad is not None else 2 * basis.size_n + 8
    if q < 1:
        raise ValueError(f"quadrature order must be positive, got {quad!r}")
    a = _coupling_entries(basis, order, q)
    a_check = _coupling_entries(basis, order, 2 * q)
    drift = float(np.max(np.abs(a - a_check)))
    if drift > ENTRY_TOL:
        raise QuadratureError(
            f"coupling quadrature did not converge: doubling changed entries by {drift:.3e}"
        )
    return CouplingMatrix(entries=a, horizon_T=basis.horizon_T, order=order)


def source_weights(basis: TimeBasis) -> SourceProjection:
    """Compute w_j = int_0^T phi_j dt by Gauss-Legendre (exact for polynomials)."""
    q = basis.size_n // 2 + 2
    x, w = np.polynomial.legendre.leggauss(q)
    t = basis.horizon_T * (x + 1.0) / 2.0
    weights = basis.evaluate(t) @ w * (basis.horizon_T / 2.0)
    return SourceProjection(weights=weights, horizon_T=basis.horizon_T)


def reconstruct(coeffs, basis: TimeBasis, t: float):
    """Evaluate f_n(t) = sum_k c_k phi_k(t).

    coeffs has shape (n,) or (n, ...); the sum is over the first axis, so
    per-grid-point coefficient arrays reconstruct a whole spatial field.
    """
    if not 0.0 <= t <= basis.horizon_T:
        raise ValueError(f"t={t!r} outside [0, {basis.horizon_T}]")
    c = np.asarray(coeffs, dtype=float)
    if c.shape[0] != basis.size_n:
        raise ValueError(f"expected {basis.size_n} coefficients, got {c.shape[0]}")
    phi = basis.evaluate(float(t))
    out = np.tensordot(phi, c, axes=(0, 0))
    return float(out) if out.ndim == 0 else out
