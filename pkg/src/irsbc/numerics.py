"""Small dense complex linear algebra used by the DPC/ZF solvers.

Vectors and matrices are plain complex numpy arrays. Matrices here are at
most a few dozen rows, so everything is direct factorization.
"""

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite, RankDeficient

ABS_EPS = 1e-14
PIVOT_REL = 1e-14
JITTER_REL = 1e-12
RANK_REL = 1e-12


def as_cvec(x):
    v = np.asarray(x, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatch(f"expected a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def as_cmat(a):
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise DimensionMismatch(f"expected a non-empty matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _cholesky(a, floor):
    """Lower Cholesky factor, or None if any pivot is below ``floor``."""
    try:
        low = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None
    pivots = np.real(np.diag(low)) ** 2
    if not np.all(np.isfinite(pivots)) or pivots.min() < floor:
        return None
    return low


def hermitian_factor(a):
    """Cholesky factor of a Hermitian PD matrix with one jitter retry."""
    a = as_cmat(a)
    m = a.shape[0]
    if a.shape[1] != m:
        raise DimensionMismatch(f"matrix must be square, got {a.shape}")
    scale = max(float(np.real(np.trace(a))) / m, ABS_EPS)
    floor = PIVOT_REL * scale
    low = _cholesky(a, floor)
    if low is None:
        low = _cholesky(a + JITTER_REL * scale * np.eye(m), floor)
    if low is None:
        raise NotPositiveDefinite("matrix is not numerically positive definite")
    return low


def hermitian_solve(a, b):
    """Solve ``A x = b`` for Hermitian positive-definite ``A``."""
    low = hermitian_factor(a)
    b = as_cvec(b)
    if b.shape[0] != low.shape[0]:
        raise DimensionMismatch(f"rhs length {b.shape[0]} != {low.shape[0]}")
    return cho_solve((low, True), b)


def quadratic_form(h, a):
    """Real part of ``h^H A h``."""
    h = as_cvec(h)
    a = np.asarray(a, dtype=complex)
    if a.shape != (h.shape[0], h.shape[0]):
        raise DimensionMismatch(f"matrix {a.shape} does not match vector {h.shape}")
    return float(np.real(np.vdot(h, a @ h)))


def gram_inverse_diag(h):
    """Diagonal of ``(H^H H)^{-1}`` for an ``M x K`` matrix ``H``.

    Raises RankDeficient when the smallest Cholesky pivot of the Gram
    matrix falls below ``1e-12`` times the largest one.
    """
    h = as_cmat(h)
    rows, k = h.shape
    if k > rows:
        raise RankDeficient(f"{k} columns cannot be independent in C^{rows}")
    gram = h.conj().T @ h
    gram = 0.5 * (gram + gram.conj().T)
    try:
        low = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise RankDeficient("Gram matrix is singular") from None
    pivots = np.real(np.diag(low)) ** 2
    if pivots.min() < max(RANK_REL * pivots.max(), ABS_EPS * ABS_EPS):
        raise RankDeficient("columns are numerically dependent")
    inv_low = solve_triangular(low, np.eye(k, dtype=complex), lower=True)
    # (L L^H)^{-1} = L^{-H} L^{-1}, so diag_j = sum_i |L^{-1}_{ij}|^2
    return np.sum(np.abs(inv_low) ** 2, axis=0)


def batch_solve(a, b):
    """Solve stacks of small systems; ``a`` is (..., M, M), ``b`` is (..., M)."""
    return np.linalg.solve(a, b[..., None])[..., 0]


def batch_gram_inverse_diag(h):
    """Vectorized :func:`gram_inverse_diag` over rank-deficiency-tolerant stacks.

    ``h`` has shape (B, M, K). Rows whose Gram matrix fails the pivot test
    come back as ``inf``.
    """
    gram = np.einsum("bmi,bmj->bij", h.conj(), h)
    k = gram.shape[-1]
    # column-by-column Cholesky, vectorized over the batch
    low = np.zeros_like(gram)
    pivots = np.empty(gram.shape[:-1])
    for j in range(k):
        d = np.real(gram[:, j, j]) - np.sum(np.abs(low[:, j, :j]) ** 2, axis=1)
        pivots[:, j] = d
        root = np.sqrt(np.maximum(d, 0.0))
        low[:, j, j] = root
        safe = np.where(root > 0, root, 1.0)
        for i in range(j + 1, k):
            s = gram[:, i, j] - np.sum(low[:, i, :j] * low[:, j, :j].conj(), axis=1)
            low[:, i, j] = s / safe
    bad = pivots.min(axis=1) < np.maximum(RANK_REL * pivots.max(axis=1), ABS_EPS**2)
    out = np.full(gram.shape[:-1], np.inf)
    good = ~bad
    if np.any(good):
        eye = np.broadcast_to(np.eye(k, dtype=complex), (int(good.sum()), k, k))
        inv_low = np.linalg.solve(low[good], eye)
        out[good] = np.sum(np.abs(inv_low) ** 2, axis=1)
    return out
