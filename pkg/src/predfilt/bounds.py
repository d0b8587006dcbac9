"""Per-step approximation-error bounds for the low-rank filters.

Diagnostics only: the residual eigenvalues these take come from dense
eigendecompositions that the test harness (not the production path)
computes.  All bounds are valid upper bounds on the per-step deviation
from the corresponding dense reference update; none account for
linearization error of the network itself.
"""

from __future__ import annotations

import numpy as np

__all__ = ["hilofi_cov_bound", "lrkf_cov_bound", "lrkf_blup_gap_bound"]


def _frob(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, ord="fro"))


def _frob_product(k: np.ndarray, h: np.ndarray) -> float:
    # ||K H||_F via tr((K^T K)(H H^T)); never forms the D x D product.
    g = k.T @ k
    return float(np.sqrt(max(np.sum(g * (h @ h.T)), 0.0)))


def hilofi_cov_bound(k_last: np.ndarray, k_hidden: np.ndarray,
                     l_tilde: np.ndarray, h_tilde: np.ndarray,
                     r: np.ndarray, q_last: float, q_hidden: float,
                     residual_eigs: np.ndarray,
                     squared_cross: bool = True) -> float:
    """Frobenius bound on the joint-covariance error of one hi/lo step.

    Terms: drift-variance leakage through each block's surrogate, the
    tail eigenvalues dropped by the hidden-block rank truncation, and the
    off-diagonal cross term 2 ||K_eta R K_omega^T||_F^2.  The cross term
    is squared as printed; ``squared_cross=False`` gives the unsquared
    variant from the underlying triangle inequality (neither dominates —
    callers wanting a safe envelope should take the max of both).

    ``k_last``/``k_hidden`` are the gains (D_block x D_y), ``r`` the full
    observation covariance, ``residual_eigs`` the smallest
    D_omega - d_omega eigenvalues of the dense surrogate hidden
    covariance.  All Frobenius norms reduce to D_y-sized traces, so the
    hidden block never appears densely.
    """
    kh = _frob_product(k_hidden, h_tilde)
    e_hidden = 2.0 * kh + kh**2
    ikl = np.eye(k_last.shape[0]) - k_last @ l_tilde
    e_last = _frob(ikl @ ikl.T)
    eigs = np.asarray(residual_eigs, dtype=np.float64)
    tail = float(np.sqrt(np.sum(eigs**2)))
    # ||K_l R K_h^T||_F^2 = tr(R^T (K_l^T K_l) R (K_h^T K_h)) by cyclicity
    cross2 = float(
        np.sum((r.T @ (k_last.T @ k_last) @ r) * (k_hidden.T @ k_hidden))
    )
    cross = max(cross2, 0.0) if squared_cross else np.sqrt(max(cross2, 0.0))
    return q_hidden * e_hidden + q_last * e_last + tail + 2.0 * cross


def lrkf_cov_bound(k: np.ndarray, h: np.ndarray, q: float,
                   residual_eigs: np.ndarray) -> float:
    """Frobenius bound on the covariance error of one low-rank joint step.

    q*(2||KH||_F + ||KH||_F^2) plus the dropped-tail term
    sqrt(sum of squared residual eigenvalues).
    """
    kh = _frob_product(k, h)
    eigs = np.asarray(residual_eigs, dtype=np.float64)
    tail = float(np.sqrt(np.sum(eigs**2)))
    return q * (2.0 * kh + kh**2) + tail


def lrkf_blup_gap_bound(eps: float, sigma_prev: np.ndarray, x: np.ndarray,
                        r2: float, d: int) -> float:
    """Bound on the one-step mean gap between full-rank and rank-d updates.

    Linear scalar-output model y = theta^T x + e, Var[e] = r2.  The
    rank-d update replaces sigma_prev by its best rank-d approximation
    (eigenvalue truncation); the gap in the updated mean is at most

        |eps| * s_{d+1} * ||x|| * (1/gamma + s_1 ||x||^2 / gamma^2)

    with s_k the k-th largest singular value of sigma_prev and
    gamma = min(x^T sigma_prev x, x^T sigma_hat x) + r2.  Raises when
    gamma is not positive (noise-free with a prior that is flat along x).
    """
    sigma_prev = np.asarray(sigma_prev, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    n = sigma_prev.shape[0]
    if not 1 <= d:
        raise ValueError("rank must be at least 1")
    w, u = np.linalg.eigh(sigma_prev)
    order = np.argsort(w)[::-1]
    w = w[order]
    u = u[:, order]
    if d >= n:
        s_tail = 0.0
        sigma_hat = sigma_prev
    else:
        s_tail = float(abs(w[d]))
        kept = np.clip(w[:d], 0.0, None)
        sigma_hat = (u[:, :d] * kept) @ u[:, :d].T
    gamma = min(float(x @ sigma_prev @ x), float(x @ sigma_hat @ x)) + r2
    if gamma <= 0:
        raise ValueError(
            "gamma is not positive: noise-free observation with a prior "
            "that has no variance along x"
        )
    s1 = float(abs(w[0]))
    xn = float(np.linalg.norm(x))
    return abs(float(eps)) * s_tail * xn * (1.0 / gamma + s1 * xn**2 / gamma**2)
