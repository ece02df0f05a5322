"""Sutherland and Ruijsenaars coordinates on T^n_reg x Herm(n)."""

from __future__ import annotations

import numpy as np

from .linalg import chol_upper, dag, offdiag
from .points import ReducedPoint, RSCoords, SutherlandCoords, Torus
from .rmatrix import rmatrix_apply


def sutherland_from(point: ReducedPoint) -> SutherlandCoords:
    """p = diag L, phi = Q^-1 L_perp Q - L_perp (inverse of L_perp = -(R(Q) + 1/2) phi)."""
    Q = point.Q
    Lp = offdiag(point.L)
    phi = dag(Q) @ Lp @ Q - Lp
    return SutherlandCoords(point.q, np.diag(point.L).real, phi)


def sutherland_to(c: SutherlandCoords) -> ReducedPoint:
    torus = Torus(c.q)
    L = np.diag(c.p).astype(complex) - rmatrix_apply(torus, c.phi) - 0.5 * c.phi
    return ReducedPoint(torus, L)


def sutherland_H(c: SutherlandCoords) -> float:
    """Spin Sutherland Hamiltonian 1/2 sum p^2 + 1/8 sum_{k != l} |phi_kl|^2 / sin^2((q_k - q_l)/2)."""
    dq = c.q[:, None] - c.q[None, :]
    s2 = np.sin(dq / 2) ** 2
    np.fill_diagonal(s2, 1.0)
    pot = np.abs(c.phi) ** 2 / s2
    np.fill_diagonal(pot, 0.0)
    return float(0.5 * np.sum(c.p ** 2) + pot.sum() / 8)


def solve_bplus(torus: Torus, lam: np.ndarray) -> np.ndarray:
    """Unique unit upper triangular b with b lam = Q^-1 b Q.

    Entrywise, (Q_l/Q_k - 1) b_kl = sum_{m=k}^{l-1} b_km lam_ml, solved by
    increasing distance from the diagonal.
    """
    d = torus.diag
    n = d.size
    b = np.eye(n, dtype=complex)
    for s in range(1, n):
        for k in range(n - s):
            l = k + s
            rhs = b[k, k:l] @ lam[k:l, l]
            b[k, l] = rhs / (d[l] / d[k] - 1)
    return b


def rs_from(point: ReducedPoint) -> RSCoords:
    """(Q, L) -> (Q, p, lambda) with L = b b^dagger, b = e^p b_+, lambda = b_+^-1 Q^-1 b_+ Q."""
    b = chol_upper(point.L)
    p = np.log(np.diag(b).real)
    bplus = b / np.diag(b).real[:, None]
    Q = point.Q
    lam = np.linalg.solve(bplus, dag(Q) @ bplus @ Q)
    lam = np.triu(lam)
    np.fill_diagonal(lam, 1.0)
    return RSCoords(point.torus, p, lam)


def rs_to(c: RSCoords) -> ReducedPoint:
    bplus = solve_bplus(c.torus, c.lam)
    b = np.exp(c.p)[:, None] * bplus
    return ReducedPoint(c.torus, b @ dag(b))


def rs_potentials(c: RSCoords) -> np.ndarray:
    """V_i(Q, lambda) = (b_+ b_+^dagger)_ii."""
    bplus = solve_bplus(c.torus, c.lam)
    return np.einsum("ij,ij->i", bplus, bplus.conj()).real


def rs_hamiltonian(c: RSCoords) -> float:
    """sum_i e^{2 p_i} V_i(Q, lambda), equal to tr L."""
    return float(np.sum(np.exp(2 * c.p) * rs_potentials(c)))


def to_reduced(c) -> ReducedPoint:
    if isinstance(c, RSCoords):
        return rs_to(c)
    if isinstance(c, SutherlandCoords):
        return sutherland_to(c)
    raise TypeError(f"cannot convert {type(c).__name__} to a reduced point")


def linearized_bplus(torus: Torus, lam: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Strictly upper db with db lam - Q^-1 db Q = C (C strictly upper).

    This is the derivative of ``solve_bplus`` along a perturbation whose
    inhomogeneity is C.
    """
    d = torus.diag
    n = d.size
    db = np.zeros((n, n), dtype=complex)
    for s in range(1, n):
        for k in range(n - s):
            l = k + s
            rhs = C[k, l] - db[k, k + 1:l] @ lam[k + 1:l, l]
            db[k, l] = rhs / (1 - d[l] / d[k])
    return db
