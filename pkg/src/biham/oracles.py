"""Independent reference computations used by the verification suites.

Nothing here goes through the gradient/dualization machinery: directional
derivatives of trace words come from the plain product rule, with the
tangent of each letter written down per perturbation type.
"""

from __future__ import annotations

import numpy as np

from .factorization import split
from .linalg import basis, dag, pairing, proj_b, proj_u
from .observables import ObservableExpr, letter_matrices
from .points import ModelPoint1, PhasePoint, ReducedPoint, RSCoords


def _letter_tangents(point, slot: str, X: np.ndarray) -> tuple[dict, dict]:
    """Letter matrices at ``point`` and their tangents along X in ``slot``."""
    if isinstance(point, np.ndarray):
        s = split(point)
        g, b = s.gR, s.bR
        if slot == "nabla":
            dg = -g @ proj_u(np.linalg.solve(s.bL, X @ s.bL))
            db = -b @ proj_b(dag(s.gL) @ X @ s.gL)
        else:
            dg = -g @ proj_u(dag(g) @ X @ g)
            db = -b @ proj_b(np.linalg.solve(b, X @ b))
        mats = {"G": g, "Ginv": dag(g), "L": b @ dag(b)}
        tang = {"G": dg, "Ginv": -dag(g) @ dg @ dag(g), "L": db @ dag(b) + b @ dag(db)}
        return mats, tang
    mats = letter_matrices(point)
    n = point.n
    zero = np.zeros((n, n), dtype=complex)
    tang = {k: zero for k in mats}
    if isinstance(point, ReducedPoint):
        if slot == "D1":
            tang["Q"] = X @ mats["Q"]
            tang["Qinv"] = -mats["Qinv"] @ X
        else:
            tang["L"] = X
        return mats, tang
    if slot in ("D1", "D1_prime"):
        dg = X @ mats["G"] if slot == "D1" else mats["G"] @ X
        tang["G"] = dg
        tang["Ginv"] = -mats["Ginv"] @ dg @ mats["Ginv"]
        return mats, tang
    if isinstance(point, ModelPoint1):
        b = point.b
        db = X @ b if slot == "D2" else b @ X
        tang["L"] = db @ dag(b) + b @ dag(db)
        return mats, tang
    tang["L"] = X
    return mats, tang


def word_directional(f: ObservableExpr, point, slot: str, X: np.ndarray) -> float:
    """d/dt f along the ``slot`` perturbation X, by the product rule."""
    if isinstance(point, RSCoords):
        from .calculus import rs_directional

        return rs_directional(f, point, slot, X)
    mats, tang = _letter_tangents(point, slot, X)
    total = 0.0
    for term in f.terms:
        letters = term.letters()
        ms = [mats[a] for a in letters]
        d = 0j
        for i in range(len(ms)):
            prod = np.eye(X.shape[0], dtype=complex)
            for j, m in enumerate(ms):
                prod = prod @ (tang[letters[j]] if j == i else m)
            d += np.trace(prod)
        total += term.coef * (d.real if term.part == "Re" else d.imag)
    return float(total)


def pairing_residual(f: ObservableExpr, point, grads) -> float:
    """max over slots and basis directions of |<slot, X> - d/dt f|."""
    worst = 0.0
    n = point.shape[0] if isinstance(point, np.ndarray) else point.n
    for slot, value in grads.slots().items():
        for X in basis(grads.space(slot)[0], n):
            worst = max(worst, abs(pairing(value, X) - word_directional(f, point, slot, X)))
    return worst


def coordinate_observables(n: int) -> list[ObservableExpr]:
    """Re/Im tr(E_kl L) and Re/Im tr(E_kl G): enough to pin down a tangent vector."""
    from .observables import Term

    out = []
    for letter in ("L", "G"):
        for part in ("Re", "Im"):
            for k in range(n):
                for l in range(n):
                    out.append(_entry_observable(letter, part, k, l))
    return out


class _entry_observable:
    """(Re|Im) M_kl with M = L or g, as a plain callable."""

    def __init__(self, letter: str, part: str, k: int, l: int):
        self.letter, self.part, self.k, self.l = letter, part, k, l

    def __call__(self, point) -> float:
        M = point.L if self.letter == "L" else point.g
        z = M[self.k, self.l]
        return float(z.real if self.part == "Re" else z.imag)
