"""Iwasawa-type factorizations of GL(n, C) and the maps built on them.

Every invertible K factors uniquely as ``K = bL gR^-1 = gL bR^-1`` with
unitary gL, gR and upper triangular bL, bR having positive diagonals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .linalg import as_matrix, chol_upper, dag, frob

COND_MAX = 1e12
SPLIT_TOL = 1e-9


@dataclass(frozen=True)
class DoubleSplit:
    gL: np.ndarray
    bL: np.ndarray
    gR: np.ndarray
    bR: np.ndarray

    def residual(self, K: np.ndarray) -> float:
        r1 = frob(self.bL @ dag(self.gR) - K)
        r2 = frob(self.gL @ np.linalg.inv(self.bR) - K)
        return max(r1, r2) / max(1.0, frob(K))


def _check_invertible(K: np.ndarray) -> None:
    c = np.linalg.cond(K)
    if not np.isfinite(c) or c > COND_MAX:
        raise ValueError(f"matrix is not safely invertible (condition number {c:.3e})")


def split(K, check: bool = True) -> DoubleSplit:
    """All four Iwasawa factors of K.

    QR gives K = gL R with R = bR^-1; RQ gives K = bL (gR^-1).  Diagonal
    phases are moved into the unitary factors.
    """
    K = as_matrix(K)
    _check_invertible(K)
    u, r = sla.qr(K)
    ph = np.diag(r) / np.abs(np.diag(r))
    gL = u * ph
    Rpos = r / ph[:, None]
    bR = sla.solve_triangular(Rpos, np.eye(K.shape[0]), lower=False)
    bR = np.triu(bR)
    bR[np.diag_indices_from(bR)] = bR.diagonal().real

    r2, q2 = sla.rq(K)
    ph2 = np.diag(r2) / np.abs(np.diag(r2))
    bL = np.triu(r2 / ph2[None, :])
    bL[np.diag_indices_from(bL)] = bL.diagonal().real
    gR = dag(ph2[:, None] * q2)
    out = DoubleSplit(gL=gL, bL=bL, gR=gR, bR=bR)
    if check:
        res = out.residual(K)
        if res > SPLIT_TOL:
            raise ValueError(f"split residual {res:.3e} exceeds {SPLIT_TOL:.0e}")
    return out


def Lambda_L(K) -> np.ndarray:
    return split(K).bL


def Lambda_R(K) -> np.ndarray:
    return split(K).bR


def Xi_L(K) -> np.ndarray:
    return split(K).gL


def Xi_R(K) -> np.ndarray:
    return split(K).gR


def moment_Lambda(K) -> np.ndarray:
    """The moment map K -> bL bR."""
    s = split(K)
    return s.bL @ s.bR


def m1(K) -> tuple[np.ndarray, np.ndarray]:
    s = split(K)
    return s.gR, s.bR


def m1_inv(g, b) -> np.ndarray:
    """The unique K with Xi_R(K) = g and Lambda_R(K) = b.

    From bL^-1 gL = g^-1 b: factor X = g^-1 b as (bL^-1)(gL), i.e. split X and
    read off its left triangular and right unitary factors; then K = bL g^-1.
    """
    g = as_matrix(g)
    b = as_matrix(b)
    s = split(dag(g) @ b)
    # X = s.bL s.gR^-1, so bL^-1 = s.bL
    bL = sla.solve_triangular(s.bL, np.eye(g.shape[0]), lower=False)
    K = bL @ dag(g)
    res = frob(m1(K)[0] - g) + frob(m1(K)[1] - b)
    if res > SPLIT_TOL * max(1.0, frob(b)):
        raise ValueError(f"m1_inv round-trip residual {res:.3e}")
    return K


def m2(g, b) -> tuple[np.ndarray, np.ndarray]:
    b = as_matrix(b)
    return as_matrix(g), b @ dag(b)


def m2_inv(g, L) -> tuple[np.ndarray, np.ndarray]:
    return as_matrix(g), chol_upper(L)


def model_map(K) -> tuple[np.ndarray, np.ndarray]:
    """m2 o m1: K -> (gR, bR bR^dagger)."""
    return m2(*m1(K))


def model_map_inv(g, L) -> np.ndarray:
    return m1_inv(*m2_inv(g, L))


# ------------------------------------------------------------------ actions

def quasi_adjoint(eta, K) -> np.ndarray:
    """A_eta(K) = eta K Xi_R(eta Lambda_L(K))."""
    eta = as_matrix(eta)
    K = as_matrix(K)
    return eta @ K @ Xi_R(eta @ Lambda_L(K))


def dressed_eta(eta, K) -> np.ndarray:
    """eta~ = Xi_R(eta Lambda_L(K))^-1."""
    return dag(Xi_R(as_matrix(eta) @ Lambda_L(K)))


def action_A1(eta, g, b) -> tuple[np.ndarray, np.ndarray]:
    et = dressed_eta(eta, m1_inv(g, b))
    return et @ g @ dag(et), Lambda_L(et @ b)


def undressed_A1(eta, g, b) -> tuple[np.ndarray, np.ndarray]:
    eta = as_matrix(eta)
    return eta @ g @ dag(eta), Lambda_L(eta @ b)


def action_A2(eta, g, L) -> tuple[np.ndarray, np.ndarray]:
    et = dressed_eta(eta, model_map_inv(g, L))
    return et @ g @ dag(et), et @ L @ dag(et)


def undressed_A2(eta, g, L) -> tuple[np.ndarray, np.ndarray]:
    eta = as_matrix(eta)
    return eta @ g @ dag(eta), eta @ L @ dag(eta)
