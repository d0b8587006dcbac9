"""Structured linear-algebra kernels shared by the filters.

Everything here manipulates *factor* representations of PSD matrices:
an upper-triangular ``R`` stands for ``R^T R`` and a short-fat ``J``
(d x D) stands for ``J^T J``.  The filters never form the D x D
matrices these factors represent.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "qr_stack",
    "lowrank_project",
    "lowrank_project_inflated",
    "tri_solve_gram",
]


def _stack_blocks(blocks) -> np.ndarray:
    if len(blocks) == 0:
        raise ValueError("need at least one block")
    mats = [np.atleast_2d(np.asarray(b, dtype=np.float64)) for b in blocks]
    ncols = mats[0].shape[1]
    for i, m in enumerate(mats):
        if m.ndim != 2:
            raise ValueError(f"block {i} is not a matrix")
        if m.shape[1] != ncols:
            raise ValueError(
                f"block {i} has {m.shape[1]} columns, expected {ncols}"
            )
    return np.vstack(mats)


def qr_stack(blocks) -> np.ndarray:
    """Upper-triangular R with R^T R = sum_k B_k^T B_k.

    Blocks may have any number of rows (rectangular factors allowed) but
    must share a column count D.  The result is D x D with nonnegative
    diagonal, so factors are comparable across runs.
    """
    stacked = _stack_blocks(blocks)
    d = stacked.shape[1]
    if stacked.shape[0] < d:
        # QR of an underdetermined stack is upper-trapezoidal; padding with
        # zero rows leaves B^T B unchanged and squares up the result.
        stacked = np.vstack([stacked, np.zeros((d - stacked.shape[0], d))])
    r = np.linalg.qr(stacked, mode="r")
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return signs[:, None] * r


def lowrank_project(blocks, d: int) -> np.ndarray:
    """Best rank-d factor J (d x D) of M = sum_k A_k^T A_k.

    J^T J is the Frobenius-optimal rank-d approximation of M; row k is the
    k-th right singular direction of the stacked blocks scaled by its
    singular value.  The D x D sum is never formed.
    """
    return lowrank_project_inflated(blocks, d, 0.0)


def lowrank_project_inflated(blocks, d: int, a: float) -> np.ndarray:
    """Best rank-d factor of M + a*I, where M = sum_k A_k^T A_k.

    Directions are those of M; singular values sigma_k become
    sqrt(sigma_k^2 + a).  With ``a == 0`` this is exactly
    :func:`lowrank_project` (same code path, no rescaling applied).
    """
    if a < 0:
        raise ValueError("inflation term must be nonnegative")
    stacked = _stack_blocks(blocks)
    m, big_d = stacked.shape
    if d < 1 or d > big_d:
        raise ValueError(f"rank {d} out of range for dimension {big_d}")

    if m < big_d:
        # Gram route: eigh of the small m x m matrix instead of an SVD
        # touching all D columns twice.
        gram = stacked @ stacked.T
        w, u = np.linalg.eigh(gram)
        order = np.argsort(w)[::-1]
        w = np.clip(w[order], 0.0, None)
        u = u[:, order]
        sigma = np.sqrt(w)
        k = min(d, m)
        j = u[:, :k].T @ stacked
    else:
        _, sigma, vt = np.linalg.svd(stacked, full_matrices=False)
        k = min(d, big_d)
        j = sigma[:k, None] * vt[:k]

    # Rank cutoff: directions with (relatively) zero singular value carry no
    # information from the stack; their rows are rebuilt from the inflation
    # term below instead of from noise-scale arithmetic.
    tol = max(m, big_d) * np.finfo(np.float64).eps * (sigma[0] if sigma.size else 0.0)
    rank = int(np.sum(sigma[:k] > tol))
    j[rank:] = 0.0

    if a > 0.0:
        scale = np.sqrt(sigma[:rank] ** 2 + a) / sigma[:rank]
        j[:rank] *= scale[:, None]

    out = np.zeros((d, big_d))
    out[:k] = j
    if a > 0.0 and rank < d:
        out[rank:] = np.sqrt(a) * _orthonormal_completion(
            out[:rank] / np.linalg.norm(out[:rank], axis=1, keepdims=True)
            if rank
            else np.zeros((0, big_d)),
            d - rank,
            big_d,
        )
    return _canonical_row_signs(out)


def _orthonormal_completion(basis: np.ndarray, count: int, dim: int) -> np.ndarray:
    """Deterministic orthonormal rows orthogonal to ``basis`` (Gram-Schmidt
    against canonical basis vectors, in index order)."""
    rows = []
    have = [b for b in basis]
    for i in range(dim):
        if len(rows) == count:
            break
        v = np.zeros(dim)
        v[i] = 1.0
        for b in have:
            v -= (b @ v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            v /= norm
            rows.append(v)
            have.append(v)
    if len(rows) < count:  # pragma: no cover - dim >= rank + count always
        raise RuntimeError("could not complete orthonormal basis")
    return np.array(rows)


def _canonical_row_signs(j: np.ndarray) -> np.ndarray:
    """Flip row signs so each row's first nonzero entry is positive."""
    out = j.copy()
    for i, row in enumerate(out):
        nz = np.nonzero(row)[0]
        if nz.size and row[nz[0]] < 0:
            out[i] = -row
    return out


def tri_solve_gram(s_half: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve (s_half^T s_half) X = rhs via two triangular solves.

    ``s_half`` is upper-triangular with strictly positive diagonal
    (a Cholesky factor of the innovation covariance).
    """
    s_half = np.asarray(s_half, dtype=np.float64)
    if np.any(np.diag(s_half) <= 0):
        raise np.linalg.LinAlgError(
            "singular innovation factor (nonpositive diagonal)"
        )
    y = solve_triangular(s_half, rhs, trans="T", lower=False)
    return solve_triangular(s_half, y, lower=False)
