"""The trigonometric dynamical r-matrix R(Q)."""

from __future__ import annotations

import numpy as np

from .linalg import EPS_REG, regularity_gap


def _diag_of(Q) -> np.ndarray:
    # accepts a Torus, a diagonal matrix or a vector of eigenvalues
    if hasattr(Q, "diag") and not isinstance(Q, np.ndarray):
        return Q.diag
    Q = np.asarray(Q, dtype=complex)
    return np.diag(Q) if Q.ndim == 2 else Q


def rmatrix_factors(Q, eps_reg: float = EPS_REG) -> np.ndarray:
    """Entrywise eigenvalues of R(Q): 0 on the diagonal, (z+1)/(2(z-1)) with z = Q_k/Q_l."""
    d = _diag_of(Q)
    gap = regularity_gap(d)
    if gap < eps_reg:
        raise ValueError(f"Q is not regular: gap {gap:.3e} < {eps_reg:.1e}")
    z = d[:, None] / d[None, :]
    np.fill_diagonal(z, 0.0)
    out = 0.5 * (z + 1) / (z - 1)
    np.fill_diagonal(out, 0.0)
    return out


def rmatrix_apply(Q, X, eps_reg: float = EPS_REG) -> np.ndarray:
    return rmatrix_factors(Q, eps_reg) * np.asarray(X, dtype=complex)


def r_bracket(Q, X, Y) -> np.ndarray:
    """[R(Q)X, Y] + [X, R(Q)Y]."""
    F = rmatrix_factors(Q)
    RX = F * X
    RY = F * Y
    return RX @ Y - Y @ RX + X @ RY - RY @ X
