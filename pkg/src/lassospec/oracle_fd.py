"""Independent finite-difference discretization of the lasso eigenvalue problem.

This is the anti-circularity oracle for the characteristic-function solver:
second-order central differences on each edge, Neumann at the free end via
the half-weight boundary row, and one shared unknown at the internal vertex
whose row sums the three one-sided stencils (the standard Kirchhoff ghost
elimination).  The operator is symmetric with respect to the trapezoid-weight
inner product, so the discrete problem is A y = lambda W y with diagonal
positive W.

Eigenvalues come from in-repo solvers only: cyclic Jacobi for small dense
matrices, and Sturm-count bisection (LDL^T inertia) for the assembled lasso
matrices, which are tridiagonal apart from the single loop-closing entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .graph_model import LassoProblem

_JACOBI_MAX_DIM = 400
_PIVMIN = 1e-290


@dataclass(frozen=True)
class DiscreteOperator:
    """Dense symmetric matrix A with its weight vector: A y = lambda diag(weights) y."""

    dim: int
    matrix: np.ndarray
    h1: float
    h2: float
    n1: int
    n2: int
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if self.matrix.shape != (self.dim, self.dim):
            raise ValidationError("matrix shape does not match dim")
        if self.weights.shape != (self.dim,) or np.any(self.weights <= 0):
            raise ValidationError("weights must be positive and match dim")
        scale = np.max(np.abs(self.matrix)) or 1.0
        if np.max(np.abs(self.matrix - self.matrix.T)) > 1e-14 * scale:
            raise ValidationError("matrix is not symmetric")


def _node_values(samples: np.ndarray, length: float, n_nodes: int) -> np.ndarray:
    """Potential at FD nodes, linearly interpolated from midpoint samples."""
    h_s = length / samples.size
    mids = (np.arange(samples.size) + 0.5) * h_s
    nodes = np.linspace(0.0, length, n_nodes)
    return np.interp(nodes, mids, samples)


def assemble(problem: LassoProblem, n1: int, n2: int) -> DiscreteOperator:
    """Assemble the discrete operator with n1 cells on the edge, n2 on the loop.

    Node layout: indices 0..n1-1 are the boundary edge (0 = free end), index
    n1 is the shared vertex, indices n1+1..n1+n2-1 are the loop interior.
    """
    if n1 < 8 or n2 < 8:
        raise ValidationError("need at least 8 cells per edge")
    l1, l2 = problem.l1, problem.l2
    h1, h2 = l1 / n1, l2 / n2
    dim = n1 + n2
    A = np.zeros((dim, dim))

    # stiffness: sum of cell contributions (1/h)[[1,-1],[-1,1]]
    diag = np.zeros(dim)
    diag[0] = 1.0 / h1
    diag[1:n1] = 2.0 / h1
    diag[n1] = 1.0 / h1 + 2.0 / h2
    diag[n1 + 1:] = 2.0 / h2
    A[np.arange(dim), np.arange(dim)] = diag
    sup = np.full(dim - 1, 0.0)
    sup[:n1] = -1.0 / h1
    sup[n1:] = -1.0 / h2
    A[np.arange(dim - 1), np.arange(1, dim)] = sup
    A[np.arange(1, dim), np.arange(dim - 1)] = sup
    A[n1, dim - 1] += -1.0 / h2  # loop-closing cell
    A[dim - 1, n1] += -1.0 / h2

    # trapezoid weights; the vertex aggregates three meeting half-cells
    w = np.empty(dim)
    w[0] = h1 / 2
    w[1:n1] = h1
    w[n1] = h1 / 2 + h2
    w[n1 + 1:] = h2

    q1n = _node_values(problem.q1.samples, l1, n1 + 1)
    q2n = _node_values(problem.q2.samples, l2, n2 + 1)
    V = np.zeros(dim)
    V[:n1] = q1n[:n1] * w[:n1]
    V[n1] = q1n[n1] * (h1 / 2) + (q2n[0] + q2n[n2]) * (h2 / 2)
    V[n1 + 1:] = q2n[1:n2] * h2
    A[np.arange(dim), np.arange(dim)] += V

    return DiscreteOperator(dim, A, h1, h2, n1, n2, w)


def reduced_matrix(op: DiscreteOperator) -> np.ndarray:
    """Symmetric standard-form matrix W^{-1/2} A W^{-1/2} (same eigenvalues)."""
    s = 1.0 / np.sqrt(op.weights)
    return s[:, None] * op.matrix * s[None, :]


def eigenvalues_lowest(op: DiscreteOperator, k: int) -> list[float]:
    """The k smallest eigenvalues of A y = lambda W y, ascending.

    Dispatches on structure: assembled lasso matrices are tridiagonal plus
    one loop-closing entry and go through Sturm-count bisection; anything
    else falls back to cyclic Jacobi (small dimensions only).
    """
    if not (1 <= k <= op.dim):
        raise ValidationError("k must satisfy 1 <= k <= dim")
    bands = _extract_bordered_bands(op)
    if bands is not None:
        d, e, c_col = bands
        return _sturm_lowest(d, e, c_col, k)
    if op.dim > _JACOBI_MAX_DIM:
        raise NumericalError(
            f"dense Jacobi path limited to dim <= {_JACOBI_MAX_DIM}; "
            f"got dim={op.dim} without bordered-tridiagonal structure")
    vals = jacobi_eigenvalues(reduced_matrix(op))
    return [float(v) for v in vals[:k]]


def _extract_bordered_bands(op: DiscreteOperator):
    """Weight-reduced (diag, superdiag, last-column) bands, or None if the
    matrix has entries outside the tridiagonal + loop-closing pattern."""
    A = op.matrix
    dim = op.dim
    if dim < 4:
        return None
    i = np.arange(dim)
    s = 1.0 / np.sqrt(op.weights)
    d = np.diag(A) * s * s
    e = np.diag(A, 1) * s[:-1] * s[1:]
    pattern = np.zeros_like(A, dtype=bool)
    pattern[i, i] = True
    pattern[i[:-1], i[:-1] + 1] = True
    pattern[i[:-1] + 1, i[:-1]] = True
    off = np.argwhere(~pattern & (A != 0.0))
    uppers = [(r, c) for r, c in off if c > r]
    if len(uppers) != len(off) // 2 or len(uppers) > 1:
        return None
    c_col = np.zeros(dim - 1)
    c_col[dim - 2] = e[dim - 2]
    e = e.copy()
    e[dim - 2] = 0.0
    if uppers:
        r, c = uppers[0]
        if c != dim - 1 or r >= dim - 2:
            return None
        c_col[r] += A[r, c] * s[r] * s[c]
        corner_pos = r
    return d, e, c_col


def _inertia_counts(d, e, c_col, sigmas) -> np.ndarray:
    """Number of eigenvalues below each sigma, by LDL^T pivot signs.

    The matrix is tridiag(d, e) plus a dense last column c_col (the
    superdiagonal coupling of the last row is folded into c_col[-1]).
    Elimination keeps O(dim) work: only the running last-column fill and the
    last diagonal entry are updated beyond the tridiagonal recurrence.
    """
    sig = np.atleast_1d(np.asarray(sigmas, dtype=float))
    dim = d.size
    neg = np.zeros(sig.size, dtype=np.int64)
    dj = d[0] - sig
    dlast = d[dim - 1] - sig
    cvec = np.full(sig.size, c_col[0])
    for j in range(dim - 1):
        piv = np.where(np.abs(dj) < _PIVMIN, -_PIVMIN, dj)
        neg += piv < 0
        dlast = dlast - cvec * cvec / piv
        if j < dim - 2:
            ej = e[j]
            dj = d[j + 1] - sig - ej * ej / piv
            cvec = c_col[j + 1] - ej * cvec / piv
    piv = np.where(np.abs(dlast) < _PIVMIN, -_PIVMIN, dlast)
    neg += piv < 0
    return neg


def _sturm_lowest(d, e, c_col, k) -> list[float]:
    radius = np.zeros(d.size)
    radius[:-1] += np.abs(e)
    radius[1:] += np.abs(e)
    nz = np.nonzero(c_col)[0]
    for j in nz:
        radius[j] += abs(c_col[j])
        radius[-1] += abs(c_col[j])
    lo_all = float(np.min(d - radius))
    hi_all = float(np.max(d + radius))
    lo = np.full(k, lo_all)
    hi = np.full(k, hi_all)
    targets = np.arange(1, k + 1)
    span = hi_all - lo_all
    for _ in range(96):
        mid = 0.5 * (lo + hi)
        counts = _inertia_counts(d, e, c_col, mid)
        below = counts >= targets
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
        if np.all(hi - lo <= 1e-14 * (np.abs(lo) + np.abs(hi)) + 1e-300 * span):
            break
    return [float(x) for x in 0.5 * (lo + hi)]


def jacobi_eigenvalues(A: np.ndarray, max_sweeps: int = 60) -> np.ndarray:
    """All eigenvalues of a small dense symmetric matrix by cyclic Jacobi."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValidationError("matrix must be square")
    if n == 1:
        return np.array([A[0, 0]])
    norm = np.sqrt(np.sum(A * A)) or 1.0
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(A * A) - np.sum(np.diag(A) ** 2)))
        if off <= 1e-14 * norm:
            return np.sort(np.diag(A))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp = A[:, p].copy()
                cq = A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                A[p, q] = 0.0
                A[q, p] = 0.0
    raise NumericalError(f"Jacobi sweep cap {max_sweeps} reached without convergence")
