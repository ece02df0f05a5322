"""Derivative objects of observables, exact (trace words) and finite-difference.

Each gradient slot is the dual, under ``<X, Y> = Im tr(XY)``, of a family of
directional derivatives:

=============  ===========================  =====================  ==========
slot           perturbation                 directions             lives in
=============  ===========================  =====================  ==========
nabla          K -> e^{tX} K                gl                     gl
nabla_prime    K -> K e^{tX}                gl                     gl
D1             g -> e^{tX} g                u  (u0 on the torus)   b  (b0)
D1_prime       g -> g e^{tX}                u                      b
d2             L -> L + tY                  herm                   u
D2             b -> e^{tX} b                b                      u
D2_prime       b -> b e^{tX}                b                      u
DQ             Q -> e^{tX} Q                u0                     b0
dp             p -> p + tY                  b0                     u0
Dlam           lam -> e^{tX} lam            bplus                  uoff
Dlam_prime     lam -> lam e^{tX}            bplus                  uoff
=============  ===========================  =====================  ==========
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Callable

import numpy as np

from .factorization import split
from .linalg import (
    antiherm_part,
    basis,
    dag,
    dualize,
    expm,
    pairing,
    proj_b,
    proj_u,
    subspace_residual,
)
from .observables import ObservableExpr, evaluate, gl_gradients, identity_shift_derivative
from .points import ModelPoint1, PhasePoint, ReducedPoint, RSCoords, Torus, unchecked

H_GROUP = 1e-3
H_ADDITIVE = 1e-4
SUBSPACE_TOL = 1e-9

# slot -> (perturbation space, value space)
SLOT_SPACES = {
    "nabla": ("gl", "gl"),
    "nabla_prime": ("gl", "gl"),
    "D1": ("u", "b"),
    "D1_prime": ("u", "b"),
    "d2": ("herm", "u"),
    "D2": ("b", "u"),
    "D2_prime": ("b", "u"),
    "DQ": ("u0", "b0"),
    "dp": ("b0", "u0"),
    "Dlam": ("bplus", "uoff"),
    "Dlam_prime": ("bplus", "uoff"),
}


@dataclass
class GradientSet:
    nabla: np.ndarray | None = None
    nabla_prime: np.ndarray | None = None
    D1: np.ndarray | None = None
    D1_prime: np.ndarray | None = None
    d2: np.ndarray | None = None
    D2: np.ndarray | None = None
    D2_prime: np.ndarray | None = None
    DQ: np.ndarray | None = None
    dp: np.ndarray | None = None
    Dlam: np.ndarray | None = None
    Dlam_prime: np.ndarray | None = None
    torus: bool = False  # D1 is b0-valued on T^n_reg x Herm(n)

    def slots(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)
                if f.name != "torus" and getattr(self, f.name) is not None}

    def space(self, slot: str) -> tuple[str, str]:
        if slot == "D1" and self.torus:
            return "u0", "b0"
        return SLOT_SPACES[slot]

    def validate(self, tol: float = SUBSPACE_TOL) -> None:
        for name, value in self.slots().items():
            res = subspace_residual(value, self.space(name)[1])
            if res > tol:
                raise ValueError(f"gradient slot {name} leaves its subspace (residual {res:.3e})")


def _slots_for(point) -> tuple[str, ...]:
    if isinstance(point, ReducedPoint):
        return ("D1", "d2")
    if isinstance(point, PhasePoint):
        return ("D1", "D1_prime", "d2")
    if isinstance(point, ModelPoint1):
        return ("D1", "D1_prime", "D2", "D2_prime")
    if isinstance(point, RSCoords):
        return ("DQ", "dp", "Dlam", "Dlam_prime")
    if isinstance(point, np.ndarray):
        return ("nabla", "nabla_prime")
    raise TypeError(f"unsupported point type {type(point).__name__}")


# ------------------------------------------------------------------ exact

def grad_exact(f: ObservableExpr, point, slots=None) -> GradientSet:
    """Closed-form gradients of a trace-word observable."""
    if not isinstance(f, ObservableExpr):
        raise TypeError("grad_exact needs a trace-word observable")
    if isinstance(point, np.ndarray):
        return _grad_exact_gl(f, point)
    if isinstance(point, RSCoords):
        return _grad_exact_rs(f, point)
    G = gl_gradients(f, point)
    if isinstance(point, ReducedPoint):
        D1 = np.diag(np.diag(G["left"]).real).astype(complex)
        return GradientSet(D1=D1, d2=antiherm_part(G["L"]), torus=True)
    D1 = proj_b(G["left"])
    D1p = proj_b(G["right"])
    d2 = antiherm_part(G["L"])
    if isinstance(point, ModelPoint1):
        b = point.b
        Lb = point.L
        return GradientSet(D1=D1, D1_prime=D1p, D2=proj_u(2 * Lb @ d2),
                           D2_prime=2 * dag(b) @ d2 @ b)
    return GradientSet(D1=D1, D1_prime=D1p, d2=d2)


def _grad_exact_gl(f: ObservableExpr, K: np.ndarray) -> GradientSet:
    """nabla, nabla' of K -> f(gR, bR bR^dagger) from the linearized splitting.

    Along K -> e^{tX} K the factors move as dgR = -gR (bL^-1 X bL)_u and
    dbR = -bR (gL^-1 X gL)_b; along K -> K e^{tX} as dgR = -gR (gR^-1 X gR)_u
    and dbR = -bR (bR^-1 X bR)_b.  Pairing with D1' f and d2 f and using that
    b(n) and u(n) are isotropic gives the closed forms below.
    """
    s = split(K)
    g, b = s.gR, s.bR
    L = b @ dag(b)
    gf = grad_exact(f, PhasePoint(g, L))
    A = dag(b) @ gf.d2 @ b
    nabla = (-s.bL @ gf.D1_prime @ np.linalg.inv(s.bL)
             - 2 * s.gL @ A @ dag(s.gL))
    nabla_p = -g @ gf.D1_prime @ dag(g) - 2 * L @ gf.d2
    return GradientSet(nabla=nabla, nabla_prime=nabla_p)


def rs_directional(f: ObservableExpr, c: RSCoords, slot: str, X: np.ndarray) -> float:
    """Closed-form derivative of (Q, p, lam) -> f(rs_to(Q, p, lam)) along X in ``slot``."""
    from .coords import linearized_bplus, rs_to, solve_bplus

    point = rs_to(c)
    gf = grad_exact(f, point)
    Q, lam = c.torus.Q, c.lam
    bplus = solve_bplus(c.torus, lam)
    ep = np.exp(c.p)[:, None]
    if slot == "dp":
        dL = X.real @ point.L + point.L @ X.real
        return pairing(gf.d2, dL)
    if slot == "DQ":
        M = dag(Q) @ bplus @ Q
        C = M @ X - X @ M
        direct = pairing(gf.D1, X)
    elif slot == "Dlam":
        C = -bplus @ X @ lam
        direct = 0.0
    elif slot == "Dlam_prime":
        C = -bplus @ lam @ X
        direct = 0.0
    else:
        raise ValueError(f"unknown RS slot {slot!r}")
    db = ep * linearized_bplus(c.torus, lam, C)
    b = ep * bplus
    dL = db @ dag(b) + b @ dag(db)
    return direct + pairing(gf.d2, dL)


def _grad_exact_rs(f: ObservableExpr, c: RSCoords) -> GradientSet:
    out = GradientSet()
    for slot in ("DQ", "dp", "Dlam", "Dlam_prime"):
        pert, target = SLOT_SPACES[slot]
        dirs = basis(pert, c.n)
        if not dirs:
            setattr(out, slot, np.zeros((c.n, c.n), dtype=complex))
            continue
        ell = np.array([rs_directional(f, c, slot, X) for X in dirs])
        setattr(out, slot, dualize(ell, pert, c.n, target))
    return out


# ----------------------------------------------------------- finite diff

def _fd(phi: Callable[[float], float], h: float, scheme: str) -> float:
    if scheme == "central2":
        return (phi(h) - phi(-h)) / (2 * h)
    if scheme == "central4":
        return (-phi(2 * h) + 8 * phi(h) - 8 * phi(-h) + phi(-2 * h)) / (12 * h)
    raise ValueError(f"unknown scheme {scheme!r}")


def _curve(point, slot: str, X: np.ndarray) -> Callable[[float], object]:
    """Point-valued curve through ``point`` along basis direction X of ``slot``."""
    cls = type(point)
    if isinstance(point, np.ndarray):
        if slot == "nabla":
            return lambda t: expm(t * X) @ point
        return lambda t: point @ expm(t * X)
    if isinstance(point, ReducedPoint):
        if slot == "D1":
            dq = np.diag(X).imag
            return lambda t: unchecked(cls, torus=Torus(point.q + t * dq), L=point.L)
        return lambda t: unchecked(cls, torus=point.torus, L=point.L + t * X)
    if isinstance(point, PhasePoint):
        if slot == "D1":
            return lambda t: unchecked(cls, g=expm(t * X) @ point.g, L=point.L)
        if slot == "D1_prime":
            return lambda t: unchecked(cls, g=point.g @ expm(t * X), L=point.L)
        return lambda t: unchecked(cls, g=point.g, L=point.L + t * X)
    if isinstance(point, ModelPoint1):
        if slot == "D1":
            return lambda t: unchecked(cls, g=expm(t * X) @ point.g, b=point.b)
        if slot == "D1_prime":
            return lambda t: unchecked(cls, g=point.g @ expm(t * X), b=point.b)
        if slot == "D2":
            return lambda t: unchecked(cls, g=point.g, b=expm(t * X) @ point.b)
        return lambda t: unchecked(cls, g=point.g, b=point.b @ expm(t * X))
    if isinstance(point, RSCoords):
        if slot == "DQ":
            dq = np.diag(X).imag
            return lambda t: unchecked(cls, torus=Torus(point.torus.q + t * dq), p=point.p,
                                       lam=point.lam)
        if slot == "dp":
            dp = np.diag(X).real
            return lambda t: unchecked(cls, torus=point.torus, p=point.p + t * dp, lam=point.lam)
        if slot == "Dlam":
            return lambda t: unchecked(cls, torus=point.torus, p=point.p,
                                       lam=expm(t * X) @ point.lam)
        return lambda t: unchecked(cls, torus=point.torus, p=point.p,
                                   lam=point.lam @ expm(t * X))
    raise TypeError(f"unsupported point type {type(point).__name__}")


def _step(slot: str) -> float:
    return H_ADDITIVE if slot in ("d2", "dp") else H_GROUP


def _torus_of(point):
    if isinstance(point, ReducedPoint):
        return point.torus
    if isinstance(point, RSCoords):
        return point.torus
    return None


def grad_fd(f, point, scheme: str = "central4", h: float | None = None,
            slots=None) -> GradientSet:
    """Finite-difference gradients of any real observable callable.

    ``h`` overrides both step sizes; by default group directions use 1e-3
    and additive (Herm / p) directions 1e-4.
    """
    func = (lambda p: evaluate(f, p)) if isinstance(f, ObservableExpr) else f
    slots = _slots_for(point) if slots is None else tuple(slots)
    torus = _torus_of(point)
    out = GradientSet(torus=isinstance(point, ReducedPoint))
    for slot in slots:
        step = _step(slot) if h is None else h
        if torus is not None and slot in ("D1", "DQ") and torus.gap < 10 * step:
            raise ValueError(f"point within {10 * step:.1e} of the regularity boundary")
        pert, target = out.space(slot)
        n = point.shape[0] if isinstance(point, np.ndarray) else point.n
        dirs = basis(pert, n)
        if not dirs:
            setattr(out, slot, np.zeros((n, n), dtype=complex))
            continue
        ell = np.empty(len(dirs))
        for i, X in enumerate(dirs):
            curve = _curve(point, slot, X)
            ell[i] = _fd(lambda t: func(curve(t)), step, scheme)
        if not np.all(np.isfinite(ell)):
            raise FloatingPointError(f"non-finite finite-difference values in slot {slot}")
        setattr(out, slot, dualize(ell, pert, n, target))
    return out


def grad(f, point, method: str = "auto", slots=None) -> GradientSet:
    """Exact gradients for trace words where available, otherwise finite differences."""
    if method == "exact" or (method == "auto" and isinstance(f, ObservableExpr)):
        return grad_exact(f, point)
    return grad_fd(f, point, slots=slots)


def directional_derivative(f, curve: Callable[[float], object], h: float = H_GROUP,
                           scheme: str = "central4") -> float:
    func = (lambda p: evaluate(f, p)) if isinstance(f, ObservableExpr) else f
    return _fd(lambda t: func(curve(t)), h, scheme)


# -------------------------------------------------------------- exactness

def exactness_derivative(f, point) -> float:
    """d/dt f(g, L + t 1) at t = 0."""
    if isinstance(f, ObservableExpr):
        Df = identity_shift_derivative(f)
        return 0.0 if Df is None else evaluate(Df, point)
    eye = np.eye(point.n)
    cls = type(point)
    if isinstance(point, ReducedPoint):
        curve = lambda t: unchecked(cls, torus=point.torus, L=point.L + t * eye)
    else:
        curve = lambda t: unchecked(cls, g=point.g, L=point.L + t * eye)
    return _fd(lambda t: f(curve(t)), H_ADDITIVE, "central4")


def exactness_field(f) -> Callable:
    """The function D[f] as a callable (trace word when f is one)."""
    if isinstance(f, ObservableExpr):
        Df = identity_shift_derivative(f)
        if Df is None:
            return lambda p: 0.0
        return Df
    return lambda p: exactness_derivative(f, p)
