"""Dense complex linear algebra on gl(n, C) and its real subspaces.

All matrices are plain ``numpy`` complex arrays of shape (n, n).  The real
Lie algebra gl(n, C) carries the invariant form ``<X, Y> = Im tr(XY)``, under
which u(n), b(n) and Herm(n) are isotropic and u(n) is dual to both b(n)
and Herm(n).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.linalg as sla

TOL_UNITARY = 1e-10
TOL_HERM = 1e-12
EPS_REG = 1e-8

SPACES = ("u", "b", "herm", "u0", "b0", "bplus", "uoff", "gl")

# perturbation space -> space its dual objects live in
DUAL_SPACE = {
    "u": "b",
    "b": "u",
    "herm": "u",
    "u0": "b0",
    "b0": "u0",
    "bplus": "uoff",
    "uoff": "bplus",
    "gl": "gl",
}


def as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix has non-finite entries")
    return X


def E(n: int, k: int, l: int) -> np.ndarray:
    """Elementary matrix with a one at (k, l), zero-based."""
    out = np.zeros((n, n), dtype=complex)
    out[k, l] = 1.0
    return out


def dag(X: np.ndarray) -> np.ndarray:
    return X.conj().T


def comm(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


def pairing(X, Y) -> float:
    """The invariant form Im tr(XY)."""
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.shape != Y.shape:
        raise ValueError(f"dimension mismatch: {X.shape} vs {Y.shape}")
    return float(np.sum(X * Y.T).imag)


def frob(X) -> float:
    return float(np.linalg.norm(X))


# ---------------------------------------------------------------- subspaces

def herm_part(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X + dag(X))


def antiherm_part(X: np.ndarray) -> np.ndarray:
    return 0.5 * (X - dag(X))


def project_ub(X) -> tuple[np.ndarray, np.ndarray]:
    """Split X = X_u + X_b with X_u in u(n) and X_b in b(n)."""
    X = np.asarray(X, dtype=complex)
    lower = np.tril(X, -1)
    Xu = lower - dag(lower) + 1j * np.diag(np.diag(X).imag)
    return Xu, X - Xu


def proj_u(X) -> np.ndarray:
    return project_ub(X)[0]


def proj_b(X) -> np.ndarray:
    return project_ub(X)[1]


def grade_split(X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Principal gradation: (strictly upper, diagonal, strictly lower)."""
    X = np.asarray(X, dtype=complex)
    return np.triu(X, 1), np.diag(np.diag(X)), np.tril(X, -1)


def offdiag(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    return X - np.diag(np.diag(X))


def diag_part(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    return np.diag(np.diag(X))


def subspace_residual(X, space: str) -> float:
    """Frobenius distance of X from the named subspace."""
    X = np.asarray(X, dtype=complex)
    if space == "gl":
        return 0.0
    if space == "u":
        return frob(herm_part(X))
    if space == "herm":
        return frob(antiherm_part(X))
    if space == "b":
        return frob(np.tril(X, -1)) + frob(np.diag(X).imag)
    if space == "b0":
        return frob(offdiag(X)) + frob(np.diag(X).imag)
    if space == "u0":
        return frob(offdiag(X)) + frob(np.diag(X).real)
    if space == "bplus":
        return frob(np.tril(X))
    if space == "uoff":
        return frob(herm_part(X)) + frob(np.diag(X))
    raise ValueError(f"unknown space {space!r}")


# ------------------------------------------------------------------- bases

@lru_cache(maxsize=None)
def _basis(n: int, space: str) -> tuple[np.ndarray, ...]:
    if n < 1:
        raise ValueError("n must be positive")
    diag = [E(n, j, j) for j in range(n)]
    pairs = [(k, l) for k in range(n) for l in range(k + 1, n)]
    if space == "u":
        out = [1j * d for d in diag]
        for k, l in pairs:
            out += [E(n, k, l) - E(n, l, k), 1j * (E(n, k, l) + E(n, l, k))]
    elif space == "b":
        out = list(diag)
        for k, l in pairs:
            out += [E(n, k, l), 1j * E(n, k, l)]
    elif space == "herm":
        out = list(diag)
        for k, l in pairs:
            out += [E(n, k, l) + E(n, l, k), 1j * (E(n, k, l) - E(n, l, k))]
    elif space == "u0":
        out = [1j * d for d in diag]
    elif space == "b0":
        out = list(diag)
    elif space == "bplus":
        out = []
        for k, l in pairs:
            out += [E(n, k, l), 1j * E(n, k, l)]
    elif space == "uoff":
        out = []
        for k, l in pairs:
            out += [E(n, k, l) - E(n, l, k), 1j * (E(n, k, l) + E(n, l, k))]
    elif space == "gl":
        out = []
        for k in range(n):
            for l in range(n):
                out += [E(n, k, l), 1j * E(n, k, l)]
    else:
        raise ValueError(f"unknown space {space!r}; expected one of {SPACES}")
    for m in out:
        m.setflags(write=False)
    return tuple(out)


def basis(space: str, n: int) -> list[np.ndarray]:
    """Standard real basis of a subspace of gl(n, C)."""
    return [m.copy() for m in _basis(n, space)]


@lru_cache(maxsize=None)
def _gram_inverse(n: int, space: str, target: str) -> tuple[np.ndarray, np.ndarray]:
    V = _basis(n, space)
    W = _basis(n, target)
    if len(V) != len(W):
        raise np.linalg.LinAlgError(f"{space} and {target} have different dimensions")
    gram = np.array([[pairing(w, v) for w in W] for v in V])
    if abs(np.linalg.det(gram)) < 1e-12:
        raise np.linalg.LinAlgError(f"singular Gram matrix: {space} is not dual to {target}")
    stacked = np.stack(W)
    stacked.setflags(write=False)
    return np.linalg.inv(gram), stacked


def gram_matrix(space: str, target: str, n: int) -> np.ndarray:
    V = _basis(n, space)
    W = _basis(n, target)
    return np.array([[pairing(w, v) for w in W] for v in V])


def dualize(ell, space: str, n: int, target: str | None = None) -> np.ndarray:
    """Return w in ``target`` with pairing(w, v_i) = ell[i] on basis(space)."""
    target = DUAL_SPACE[space] if target is None else target
    if not _basis(n, space) and not _basis(n, target):
        return np.zeros((n, n), dtype=complex)
    ginv, W = _gram_inverse(n, space, target)
    ell = np.asarray(ell, dtype=float)
    if ell.shape != (len(W),):
        raise ValueError(f"expected {len(W)} functional values, got {ell.shape}")
    coeffs = ginv @ ell
    return np.tensordot(coeffs, W, axes=1)


def functional_values(w: np.ndarray, space: str) -> np.ndarray:
    n = w.shape[0]
    return np.array([pairing(w, v) for v in _basis(n, space)], dtype=float)


# -------------------------------------------------------- matrix functions

def expm(X: np.ndarray) -> np.ndarray:
    return sla.expm(X)


def expm_antiherm(A: np.ndarray) -> np.ndarray:
    """exp(A) for anti-Hermitian A via the Hermitian eigendecomposition of -iA."""
    w, V = np.linalg.eigh(-1j * A)
    return (V * np.exp(1j * w)) @ dag(V)


def expm_herm(H: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(H)
    return (V * np.exp(w)) @ dag(V)


def mpow(X: np.ndarray, k: int) -> np.ndarray:
    return np.linalg.matrix_power(X, k)


def chol_upper(L: np.ndarray) -> np.ndarray:
    """Upper triangular b with positive diagonal and b b^dagger = L."""
    L = np.asarray(L, dtype=complex)
    J = np.eye(L.shape[0])[::-1]
    try:
        lower = np.linalg.cholesky(J @ L @ J)
    except np.linalg.LinAlgError as exc:
        raise ValueError("matrix is not positive definite") from exc
    return J @ lower @ J


# ------------------------------------------------------------ validation

def check_unitary(g, tol: float = TOL_UNITARY) -> np.ndarray:
    g = as_matrix(g)
    res = frob(dag(g) @ g - np.eye(g.shape[0]))
    if res > tol:
        raise ValueError(f"not unitary: residual {res:.3e} > {tol:.1e}")
    return g


def check_hermitian(L, tol: float = TOL_HERM) -> np.ndarray:
    L = as_matrix(L)
    res = frob(L - dag(L))
    if res > tol * max(1.0, frob(L)):
        raise ValueError(f"not Hermitian: residual {res:.3e}")
    return L


def check_positive(L, tol: float = TOL_HERM) -> np.ndarray:
    L = check_hermitian(L, tol)
    if np.linalg.eigvalsh(herm_part(L)).min() <= 0:
        raise ValueError("Hermitian matrix is not positive definite")
    return L


def check_pos_triangular(b) -> np.ndarray:
    b = as_matrix(b)
    if np.any(np.tril(b, -1) != 0):
        raise ValueError("matrix has a non-zero strictly lower part")
    d = np.diag(b)
    if np.any(d.imag != 0) or np.any(d.real <= 0):
        raise ValueError("diagonal must be real and positive")
    return b


def regularity_gap(Qdiag) -> float:
    """min_{i != j} |Q_i - Q_j| for a vector of torus eigenvalues."""
    Qdiag = np.asarray(Qdiag)
    if Qdiag.size < 2:
        return np.inf
    diff = np.abs(Qdiag[:, None] - Qdiag[None, :])
    diff[np.diag_indices_from(diff)] = np.inf
    return float(diff.min())


# ----------------------------------------------------------------- random

def _ginibre(rng: np.random.Generator, n: int) -> np.ndarray:
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar unitary; QR phases fixed so the triangular factor has positive diagonal."""
    q, r = np.linalg.qr(_ginibre(rng, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return scale * herm_part(_ginibre(rng, n))


def random_positive(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return expm_herm(random_hermitian(rng, n, scale))


def random_pos_triangular(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    b = np.triu(scale * _ginibre(rng, n), 1)
    return b + np.diag(np.exp(scale * rng.standard_normal(n)))


def random_angles(rng: np.random.Generator, n: int, min_gap: float = EPS_REG,
                  max_tries: int = 1000) -> np.ndarray:
    """Uniform angles whose torus element has regularity gap >= min_gap."""
    for _ in range(max_tries):
        q = rng.uniform(0.0, 2 * np.pi, n)
        if regularity_gap(np.exp(1j * q)) >= min_gap:
            return q
    raise RuntimeError(f"no regular torus sample after {max_tries} tries (min_gap={min_gap})")


def random_point(kind: str, n: int, seed=None, scale: float = 1.0, **kw) -> np.ndarray:
    """Random matrix of the requested kind.

    ``torus_regular`` returns the diagonal unitary; the angles are recoverable
    with ``np.angle(np.diag(Q))``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if kind == "unitary":
        return random_unitary(rng, n)
    if kind == "hermitian":
        return random_hermitian(rng, n, scale)
    if kind == "positive":
        return random_positive(rng, n, scale)
    if kind == "pos_triangular":
        return random_pos_triangular(rng, n, scale)
    if kind == "torus_regular":
        return np.diag(np.exp(1j * random_angles(rng, n, **kw)))
    if kind == "gl":
        return _ginibre(rng, n) * scale
    raise ValueError(f"unknown random kind {kind!r}")
