"""Sparse direct factorizations, factorized once and reused for every step."""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

# number of factorizations performed in this process; tests use it to check reuse
factorization_count = 0

_DENSE_DIAGNOSIS_LIMIT = 4000


class SingularMatrixError(RuntimeError):
    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"{message} (zero pivot at row {row})")
        self.row = row


def _locate_zero_pivot(A):
    A = sp.csr_matrix(A)
    empty_rows = np.flatnonzero(np.diff(A.indptr) == 0)
    if len(empty_rows):
        return int(empty_rows[0])
    empty_cols = np.flatnonzero(np.diff(A.tocsc().indptr) == 0)
    if len(empty_cols):
        return int(empty_cols[0])
    if A.shape[0] > _DENSE_DIAGNOSIS_LIMIT:
        return None
    P, _, U = sla.lu(A.toarray())
    d = np.abs(np.diag(U))
    bad = np.flatnonzero(d <= 1e-14 * max(d.max(), 1.0))
    if not len(bad):
        return None
    # U row k was produced from original row perm[k]
    perm = np.argmax(P, axis=0)
    return int(perm[bad[0]])


class Factorization:
    """LU factors of one square sparse matrix."""

    def __init__(self, lu, n, symmetric):
        self._lu = lu
        self.n = n
        self.symmetric = symmetric

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.n:
            raise ValueError(f"rhs has length {rhs.shape[0]}, expected {self.n}")
        return self._lu.solve(rhs)


def _check_residual(A, lu, tol=1e-8):
    rng = np.random.default_rng(0)
    b = rng.standard_normal(A.shape[0])
    x = lu.solve(b)
    return np.all(np.isfinite(x)) and np.linalg.norm(A @ x - b) <= tol * np.linalg.norm(b)


def factorize(A, symmetric: bool = False) -> Factorization:
    """Sparse LU (SuperLU) of a square matrix.

    ``symmetric=True`` is for structurally symmetric matrices (the SPD head
    system and the symmetric saddle system): it uses a minimum-degree
    ordering of A + A^T and prefers diagonal pivots, which cuts fill several
    times over.  If that factorization fails a residual probe, it is redone
    with column ordering and partial pivoting.
    """
    global factorization_count
    A = sp.csc_matrix(A, dtype=float)
    n, m = A.shape
    if n != m:
        raise ValueError(f"matrix must be square, got {A.shape}")
    lu = None
    if symmetric:
        try:
            lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                           options=dict(SymmetricMode=True))
            if not _check_residual(A, lu):
                lu = None
        except RuntimeError:
            lu = None
    if lu is None:
        try:
            lu = spla.splu(A)
        except RuntimeError as exc:
            raise SingularMatrixError(f"factorization failed: {exc}",
                                      _locate_zero_pivot(A)) from None
    diag = lu.U.diagonal()
    if not np.all(np.isfinite(diag)) or np.any(diag == 0):
        raise SingularMatrixError("matrix is singular", _locate_zero_pivot(A))
    factorization_count += 1
    return Factorization(lu, n, symmetric)


def solve(fact: Factorization, rhs):
    return fact.solve(rhs)


class DirichletSolver:
    """Solve K x = b with prescribed values on a subset of unknowns.

    The constrained rows and columns are eliminated symmetrically; their
    values enter the right-hand side through ``K[free, fixed]``.
    """

    def __init__(self, K, fixed, symmetric=False):
        K = sp.csr_matrix(K)
        n = K.shape[0]
        self.n = n
        self.fixed = np.asarray(fixed, dtype=np.int64)
        mask = np.ones(n, dtype=bool)
        mask[self.fixed] = False
        self.free = np.flatnonzero(mask)
        Kf = K[self.free]
        self.K_ff = Kf[:, self.free]
        self.K_fd = Kf[:, self.fixed].tocsr()
        self.fact = factorize(self.K_ff, symmetric=symmetric)

    def solve(self, rhs, fixed_values):
        x = np.empty(self.n)
        x[self.fixed] = fixed_values
        x[self.free] = self.fact.solve(rhs[self.free] - self.K_fd @ fixed_values)
        return x
