"""Phase-space point types."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    EPS_REG,
    as_matrix,
    check_hermitian,
    check_pos_triangular,
    check_positive,
    check_unitary,
    dag,
    regularity_gap,
)


@dataclass(frozen=True)
class Torus:
    """Regular diagonal unitary Q = diag(exp(i q_j))."""

    q: np.ndarray
    eps_reg: float = EPS_REG

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).ravel()
        object.__setattr__(self, "q", q)
        gap = regularity_gap(np.exp(1j * q))
        if gap < self.eps_reg:
            raise ValueError(f"torus element is not regular: gap {gap:.3e} < {self.eps_reg:.1e}")

    @property
    def n(self) -> int:
        return self.q.size

    @property
    def diag(self) -> np.ndarray:
        return np.exp(1j * self.q)

    @property
    def Q(self) -> np.ndarray:
        return np.diag(self.diag)

    @property
    def gap(self) -> float:
        return regularity_gap(self.diag)

    @classmethod
    def from_matrix(cls, Q, eps_reg: float = EPS_REG) -> Torus:
        Q = check_unitary(Q)
        if np.linalg.norm(Q - np.diag(np.diag(Q))) > 1e-12:
            raise ValueError("torus element must be diagonal")
        return cls(np.angle(np.diag(Q)), eps_reg)


@dataclass(frozen=True)
class PhasePoint:
    """(g, L) in U(n) x Herm(n), the model of T*U(n)."""

    g: np.ndarray
    L: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", check_unitary(self.g))
        object.__setattr__(self, "L", check_hermitian(self.L))
        if self.g.shape != self.L.shape:
            raise ValueError("g and L must have the same size")

    @property
    def n(self) -> int:
        return self.g.shape[0]


@dataclass(frozen=True)
class ModelPoint2(PhasePoint):
    """(g, L) with L positive definite: the Heisenberg double as U(n) x P(n)."""

    def __post_init__(self):
        super().__post_init__()
        check_positive(self.L)


@dataclass(frozen=True)
class ModelPoint1:
    """(g, b) in U(n) x B(n)."""

    g: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", check_unitary(self.g))
        object.__setattr__(self, "b", check_pos_triangular(self.b))

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def L(self) -> np.ndarray:
        return self.b @ dag(self.b)


@dataclass(frozen=True)
class ReducedPoint:
    """(Q, L) in T^n_reg x Herm(n)."""

    torus: Torus
    L: np.ndarray

    def __post_init__(self):
        if not isinstance(self.torus, Torus):
            object.__setattr__(self, "torus", Torus(self.torus))
        object.__setattr__(self, "L", check_hermitian(self.L))
        if self.L.shape != (self.torus.n, self.torus.n):
            raise ValueError("Q and L must have the same size")

    @property
    def n(self) -> int:
        return self.torus.n

    @property
    def Q(self) -> np.ndarray:
        return self.torus.Q

    @property
    def q(self) -> np.ndarray:
        return self.torus.q

    def as_phase_point(self) -> PhasePoint:
        return PhasePoint(self.Q, self.L)


@dataclass(frozen=True)
class SutherlandCoords:
    """(q, p, phi) with phi Hermitian and zero on the diagonal."""

    q: np.ndarray
    p: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", Torus(self.q).q)
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).ravel())
        phi = check_hermitian(self.phi)
        if np.any(np.abs(np.diag(phi)) > 1e-12):
            raise ValueError("phi must have zero diagonal")
        object.__setattr__(self, "phi", phi)


@dataclass(frozen=True)
class RSCoords:
    """(Q, p, lambda) with lambda unit-diagonal upper triangular."""

    torus: Torus
    p: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        if not isinstance(self.torus, Torus):
            object.__setattr__(self, "torus", Torus(self.torus))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float).ravel())
        lam = as_matrix(self.lam)
        if np.linalg.norm(np.tril(lam, -1)) > 1e-12 or np.linalg.norm(np.diag(lam) - 1) > 1e-12:
            raise ValueError("lambda must be unit upper triangular")
        object.__setattr__(self, "lam", lam)

    @property
    def n(self) -> int:
        return self.torus.n


Point = np.ndarray | PhasePoint | ModelPoint1 | ReducedPoint | RSCoords


def unchecked(cls, **fields):
    """Construct a point without validation (for inner finite-difference loops)."""
    obj = object.__new__(cls)
    for k, v in fields.items():
        object.__setattr__(obj, k, v)
    return obj
