"""Hamiltonians, flows and constants of motion of the spin Ruijsenaars-Sutherland hierarchy."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .linalg import EPS_REG, dag, expm_antiherm, herm_part, mpow, regularity_gap
from .observables import ObservableExpr, Term, _compress, evaluate
from .points import PhasePoint, ReducedPoint, Torus
from .rmatrix import rmatrix_apply

HERM_DRIFT_TOL = 1e-8


class RegularityLost(RuntimeError):
    """Raised mid-integration; ``partial`` holds the steps completed so far."""

    def __init__(self, t: float, gap: float, partial: Trajectory | None = None):
        super().__init__(f"regularity gap {gap:.3e} too small at t = {t:.6g}")
        self.t = t
        self.gap = gap
        self.partial = partial


def hamiltonian_Hk(k: int, point) -> float:
    """H_k = tr(L^k) / k."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    tr = np.trace(mpow(point.L, k))
    if abs(tr.imag) > 1e-12 * max(1.0, abs(tr.real)):
        raise ValueError(f"tr(L^k) has imaginary part {tr.imag:.3e}")
    return float(tr.real) / k


def hamiltonian_word(k: int) -> ObservableExpr:
    """H_k as a trace-word observable."""
    return ObservableExpr((Term(1.0 / k, "Re", (("L", k),)),))


def explicit_flow(k: int, t: float, start: PhasePoint) -> PhasePoint:
    """(exp(i t L^k) g, L): the common flow of H_k under {,}_2 and H_{k+1} under {,}_1."""
    A = 1j * t * mpow(start.L, k)
    return PhasePoint(expm_antiherm(A) @ start.g, start.L)


def zeta(k: int, point: ReducedPoint) -> np.ndarray:
    """Gauge generator R(Q)(i L^k) - (i/2) L^k keeping the flow tangent to the torus."""
    Lk = mpow(point.L, k)
    return rmatrix_apply(point.torus, 1j * Lk) - 0.5j * Lk


def reduced_field(k: int, point: ReducedPoint) -> tuple[np.ndarray, np.ndarray]:
    """(Q-dot, L-dot) = (i (L^k)_0 Q, [R(Q)(i L^k), L])."""
    Lk = mpow(point.L, k)
    dQ = 1j * np.diag(np.diag(Lk)) @ point.Q
    A = rmatrix_apply(point.torus, 1j * Lk)
    return dQ, A @ point.L - point.L @ A


class _StageIrregular(Exception):
    def __init__(self, gap: float):
        self.gap = gap


def _rhs(k: int, q: np.ndarray, L: np.ndarray, eps_reg: float):
    gap = regularity_gap(np.exp(1j * q))
    if gap < 10 * eps_reg:
        raise _StageIrregular(gap)
    Lk = mpow(L, k)
    A = rmatrix_apply(np.exp(1j * q), 1j * Lk, eps_reg)
    return np.diag(Lk).real, A @ L - L @ A


@dataclass
class Trajectory:
    k: int
    times: np.ndarray
    q: np.ndarray  # (steps, n)
    L: np.ndarray  # (steps, n, n)
    min_gap: float
    max_herm_drift: float
    meta: dict = field(default_factory=dict)

    def point(self, i: int) -> ReducedPoint:
        return ReducedPoint(Torus(self.q[i]), self.L[i])

    def __len__(self) -> int:
        return len(self.times)


def integrate(k: int, start: ReducedPoint, t_end: float, dt: float, method: str = "rk4",
              eps_reg: float = EPS_REG) -> Trajectory:
    """Fixed-step RK4 for the reduced flow.

    Q is carried by its angles, so each stored Q is exactly diagonal unitary;
    L is re-Hermitized after every step.  Integration stops with
    ``RegularityLost`` when the gap drops below 10 * eps_reg at a step or
    at any intermediate stage; the reported time is the end of that step.
    """
    if method != "rk4":
        raise ValueError(f"unknown method {method!r}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    steps = int(round(t_end / dt))
    n = start.n
    qs = np.empty((steps + 1, n))
    Ls = np.empty((steps + 1, n, n), dtype=complex)
    q, L = start.q.copy(), start.L.copy()
    qs[0], Ls[0] = q, L
    min_gap = regularity_gap(np.exp(1j * q))
    drift = 0.0
    meta = {"t_end": t_end, "dt": dt, "method": method}
    for i in range(1, steps + 1):
        t = i * dt
        try:
            k1q, k1L = _rhs(k, q, L, eps_reg)
            k2q, k2L = _rhs(k, q + 0.5 * dt * k1q, L + 0.5 * dt * k1L, eps_reg)
            k3q, k3L = _rhs(k, q + 0.5 * dt * k2q, L + 0.5 * dt * k2L, eps_reg)
            k4q, k4L = _rhs(k, q + dt * k3q, L + dt * k3L, eps_reg)
        except _StageIrregular as exc:
            partial = Trajectory(k, np.arange(i) * dt, qs[:i], Ls[:i], min_gap, drift, meta)
            raise RegularityLost(t, exc.gap, partial) from None
        q = q + dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
        L = L + dt / 6 * (k1L + 2 * k2L + 2 * k3L + k4L)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(L))):
            raise FloatingPointError(f"non-finite state at t = {t:.6g}")
        step_drift = float(np.linalg.norm(L - dag(L)))
        if step_drift > HERM_DRIFT_TOL:
            raise FloatingPointError(f"Hermiticity drift {step_drift:.3e} at t = {t:.6g}")
        drift = max(drift, step_drift)
        L = herm_part(L)
        gap = regularity_gap(np.exp(1j * q))
        if gap < 10 * eps_reg:
            partial = Trajectory(k, np.arange(i) * dt, qs[:i], Ls[:i], min_gap, drift, meta)
            raise RegularityLost(t, gap, partial)
        min_gap = min(min_gap, gap)
        qs[i], Ls[i] = q, L
    return Trajectory(k, np.arange(steps + 1) * dt, qs, Ls, min_gap, drift, meta)


# ------------------------------------------------------ constants of motion

def _canonical(w: tuple[str, ...]) -> tuple[str, ...]:
    """Least rotation of w or of its reversal."""
    rots = [w[i:] + w[:i] for i in range(len(w))]
    rw = w[::-1]
    rots += [rw[i:] + rw[:i] for i in range(len(rw))]
    return min(rots)


def _is_real_word(w: tuple[str, ...]) -> bool:
    rw = w[::-1]
    return any(w[i:] + w[:i] == rw for i in range(len(w)))


def conserved_words(degree_cap: int = 4) -> list[ObservableExpr]:
    """Trace words in L and M = Q^-1 L Q up to ``degree_cap``.

    Words are taken up to rotation and reversal; words in M alone duplicate
    words in L and are dropped.  Re parts are always reported, Im parts only
    for words not equivalent to their reversal (otherwise the trace is real).
    """
    seen = set()
    out = []
    for d in range(1, degree_cap + 1):
        for w in product("LM", repeat=d):
            if "L" not in w:
                continue
            c = _canonical(w)
            if c in seen:
                continue
            seen.add(c)
            letters: list[str] = []
            for a in c:
                for x in (["L"] if a == "L" else ["Qinv", "L", "Q"]):
                    if letters and {letters[-1], x} == {"Q", "Qinv"}:
                        letters.pop()
                    else:
                        letters.append(x)
            word = _compress(letters)
            out.append(ObservableExpr((Term(1.0, "Re", word),)))
            if not _is_real_word(c):
                out.append(ObservableExpr((Term(1.0, "Im", word),)))
    return out


@dataclass
class ConservedRecord:
    observable: str
    initial: float
    max_drift: float


def conserved_suite(target, degree_cap: int = 4) -> list[ConservedRecord]:
    """Values (single point) or maximal drifts (trajectory) of the conserved words."""
    words = conserved_words(degree_cap)
    points = ([target.point(i) for i in range(len(target))]
              if isinstance(target, Trajectory) else [target])
    out = []
    for w in words:
        vals = np.array([evaluate(w, p) for p in points])
        out.append(ConservedRecord(str(w), float(vals[0]), float(np.max(np.abs(vals - vals[0])))))
    return out


# --------------------------------------------------------------- export

def trajectory_header(n: int) -> list[str]:
    cols = ["t"] + [f"q_{j + 1}" for j in range(n)]
    for i in range(n):
        for j in range(i, n):
            cols += [f"ReL_{i + 1}{j + 1}", f"ImL_{i + 1}{j + 1}"]
    return cols


def write_trajectory_csv(traj: Trajectory, path: Path) -> None:
    n = traj.q.shape[1]
    iu = np.triu_indices(n)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(trajectory_header(n))
        for t, q, L in zip(traj.times, traj.q, traj.L):
            row = [repr(float(t))] + [repr(float(x)) for x in q]
            for z in L[iu]:
                row += [repr(float(z.real)), repr(float(z.imag))]
            w.writerow(row)


def write_sidecar(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
