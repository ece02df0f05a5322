"""Poisson bracket evaluators, the R-operator and Hamiltonian vector fields."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .calculus import GradientSet, grad
from .linalg import comm, dag, herm_part, pairing, proj_u, project_ub
from .points import ModelPoint1, ModelPoint2, PhasePoint, ReducedPoint, RSCoords
from .rmatrix import r_bracket, rmatrix_apply, rmatrix_factors

__all__ = [
    "BRACKET_KINDS",
    "bracket",
    "bracket_from_grads",
    "pencil",
    "r_operator",
    "rmatrix_apply",
    "rmatrix_factors",
    "r_bracket",
    "hamiltonian_vector_field",
    "jacobi_residual",
    "kind_bracket",
]

BRACKET_KINDS = ("double", "model1", "model2", "ctb1", "ctb2", "red1", "red2", "decoupled2")


def r_operator(X) -> np.ndarray:
    """R = (P_u - P_b) / 2 for the splitting gl = u(n) + b(n)."""
    Xu, Xb = project_ub(X)
    return 0.5 * (Xu - Xb)


def _check_point(kind: str, point) -> None:
    ok = {
        "double": isinstance(point, np.ndarray),
        "model1": isinstance(point, ModelPoint1),
        "model2": isinstance(point, ModelPoint2),
        "ctb1": isinstance(point, PhasePoint),
        "ctb2": isinstance(point, PhasePoint),
        "red1": isinstance(point, ReducedPoint),
        "red2": isinstance(point, ReducedPoint),
        "decoupled2": isinstance(point, RSCoords),
    }
    if kind not in ok:
        raise ValueError(f"unknown bracket kind {kind!r}")
    if not ok[kind]:
        raise TypeError(f"bracket {kind} is not defined on {type(point).__name__}")


def bracket_from_grads(kind: str, gf: GradientSet, gh: GradientSet, point) -> float:
    """Evaluate the bracket formula of ``kind`` from precomputed gradients."""
    if kind == "double":
        return (pairing(gf.nabla, r_operator(gh.nabla))
                + pairing(gf.nabla_prime, r_operator(gh.nabla_prime)))
    if kind == "model1":
        g, b = point.g, point.b
        binv = np.linalg.inv(b)
        return (pairing(gf.D2_prime, binv @ gh.D2 @ b)
                - pairing(gf.D1_prime, dag(g) @ gh.D1 @ g)
                + pairing(gf.D1, gh.D2)
                - pairing(gh.D1, gf.D2))
    if kind == "model2":
        g, L = point.g, point.L
        return (4 * pairing(L @ gf.d2, proj_u(L @ gh.d2))
                - pairing(gf.D1_prime, dag(g) @ gh.D1 @ g)
                + 2 * pairing(gf.D1, L @ gh.d2)
                - 2 * pairing(gh.D1, L @ gf.d2))
    if kind == "ctb1":
        L = point.L
        return (pairing(gf.D1, gh.d2) - pairing(gh.D1, gf.d2)
                + 2 * pairing(L @ gf.d2, gh.d2))
    if kind == "ctb2":
        g, L = point.g, point.L
        return (pairing(gf.D1, L @ gh.d2) - pairing(gh.D1, L @ gf.d2)
                + 2 * pairing(L @ gf.d2, proj_u(L @ gh.d2))
                - 0.5 * pairing(gf.D1_prime, dag(g) @ gh.D1 @ g))
    if kind == "red1":
        L = point.L
        return (pairing(gf.D1, gh.d2) - pairing(gh.D1, gf.d2)
                + pairing(L, r_bracket(point.torus, gf.d2, gh.d2)))
    if kind == "red2":
        L = point.L
        return (pairing(gf.D1, L @ gh.d2) - pairing(gh.D1, L @ gf.d2)
                + 2 * pairing(L @ gf.d2, rmatrix_apply(point.torus, L @ gh.d2)))
    if kind == "decoupled2":
        lam = point.lam
        rhs = (pairing(gf.DQ, gh.dp) - pairing(gh.DQ, gf.dp)
               + pairing(gf.Dlam_prime, np.linalg.inv(lam) @ gh.Dlam @ lam))
        return 0.5 * rhs
    raise ValueError(f"unknown bracket kind {kind!r}")


def bracket(kind: str, f, h, point, method: str = "auto") -> float:
    """{f, h} of the given kind at ``point``.

    ``f`` and ``h`` are trace-word observables (exact gradients) or arbitrary
    real callables of the point (finite-difference gradients).
    """
    _check_point(kind, point)
    return bracket_from_grads(kind, grad(f, point, method), grad(h, point, method), point)


def pencil(t: float) -> Callable[[object, object, PhasePoint], float]:
    """The bracket {,}_1 + t {,}_2 on U(n) x Herm(n)."""

    def br(f, h, point, method: str = "auto") -> float:
        gf, gh = grad(f, point, method), grad(h, point, method)
        return (bracket_from_grads("ctb1", gf, gh, point)
                + t * bracket_from_grads("ctb2", gf, gh, point))

    br.__name__ = f"ctb1+{t:g}*ctb2"
    return br


def kind_bracket(kind: str) -> Callable:
    def br(f, h, point, method: str = "auto") -> float:
        return bracket(kind, f, h, point, method)

    br.__name__ = kind
    return br


def jacobi_residual(br: Callable, f, g, h, point) -> float:
    """{{f,g},h} + {{g,h},f} + {{h,f},g}; inner brackets get FD gradients."""
    total = 0.0
    for a, b, c in ((f, g, h), (g, h, f), (h, f, g)):
        inner = lambda p, a=a, b=b: br(a, b, p)
        total += br(inner, c, point)
    return total


# --------------------------------------------------------- vector fields

def hamiltonian_vector_field(kind: str, h, point, method: str = "auto"):
    """Tangent vector (delta_g, delta_L) or delta_K generated by h.

    The field satisfies d/dt f = {f, h} along it.  For ``double`` the result
    is the matrix K-dot; for ``ctb1``/``ctb2`` a pair (g-dot, L-dot).
    """
    _check_point(kind, point)
    gh = grad(h, point, method)
    if kind == "double":
        K = point
        return r_operator(gh.nabla) @ K + K @ r_operator(gh.nabla_prime)
    g, L = point.g, point.L
    if kind == "ctb1":
        dg = gh.d2 @ g
        dL = comm(gh.d2, L) - herm_part(gh.D1)
        return dg, dL
    if kind == "ctb2":
        X = proj_u(L @ gh.d2)
        Xr = -0.5 * proj_u(dag(g) @ gh.D1 @ g)
        dg = X @ g + g @ Xr
        dL = herm_part(-gh.D1 @ L + 2 * X @ L)
        return dg, dL
    raise ValueError(f"no Hamiltonian vector field implemented for {kind!r}")
