"""Named verification suites: seeded random trials, max-residual reports.

A suite is a trial function ``trial(rng, n, digest) -> dict[check, residual]``
plus a table of default tolerances.  Trial ``i`` of a run with seed ``s`` draws from
``SeedSequence(s, spawn_key=(i,))``, so any single trial can be replayed and
the aggregated report does not depend on scheduling order.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .brackets import bracket, bracket_from_grads, hamiltonian_vector_field, jacobi_residual, pencil
from .calculus import GradientSet, exactness_derivative, grad, grad_exact, grad_fd
from .coords import (
    rs_from,
    rs_hamiltonian,
    rs_to,
    sutherland_H,
    sutherland_from,
    sutherland_to,
)
from .dynamics import (
    conserved_suite,
    conserved_words,
    explicit_flow,
    hamiltonian_word,
    integrate,
    reduced_field,
    zeta,
)
from .factorization import (
    action_A1,
    action_A2,
    dressed_eta,
    m1,
    m1_inv,
    m2,
    m2_inv,
    model_map,
    model_map_inv,
    moment_Lambda,
    quasi_adjoint,
    split,
    undressed_A2,
)
from .linalg import (
    EPS_REG,
    comm,
    dag,
    frob,
    offdiag,
    pairing,
    proj_b,
    random_angles,
    random_hermitian,
    random_pos_triangular,
    random_positive,
    random_unitary,
    subspace_residual,
)
from .observables import ObservableExpr, evaluate, extend_invariant, identity_shift_derivative, word
from .observables import random_observable as _random_observable
from .oracles import coordinate_observables, pairing_residual
from .points import ModelPoint1, ModelPoint2, PhasePoint, ReducedPoint, RSCoords, Torus, unchecked
from .rmatrix import rmatrix_apply

GROUP_WORDS = ("G", "Ginv", "L")
TORUS_WORDS = ("Q", "Qinv", "L")
MIN_GAP = 0.3  # angle separation of sampled torus points


def _rel(err: float, ref: float) -> float:
    return float(err) / max(1.0, abs(float(ref)))


def _ginibre(rng: np.random.Generator, n: int) -> np.ndarray:
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)


# ------------------------------------------------------------ samplers

def sample_phase(rng, n: int, scale: float = 1.0) -> PhasePoint:
    return PhasePoint(random_unitary(rng, n), random_hermitian(rng, n, scale))


def sample_model2(rng, n: int) -> ModelPoint2:
    return ModelPoint2(random_unitary(rng, n), random_positive(rng, n, 0.5))


def sample_reduced(rng, n: int, scale: float = 1.0, positive: bool = False) -> ReducedPoint:
    L = random_positive(rng, n, 0.5) if positive else random_hermitian(rng, n, scale)
    return ReducedPoint(Torus(random_angles(rng, n, MIN_GAP)), L)


def sample_gl(rng, n: int) -> np.ndarray:
    """A well-conditioned K, drawn through the model map (Haar g, moderate L)."""
    return model_map_inv(random_unitary(rng, n), random_positive(rng, n, 0.5))


def random_obs(rng, alphabet=GROUP_WORDS, max_len: int = 4, n_terms: int = 2) -> ObservableExpr:
    return _random_observable(rng, alphabet, max_len=max_len, n_terms=n_terms)


# ------------------------------------------------------------- records

@dataclass(frozen=True)
class SuiteSpec:
    suite_id: str
    n: int = 3
    trials: int | None = None
    seed: int = 0
    tol: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.trials is not None and self.trials < 1:
            raise ValueError("trials must be at least 1")


@dataclass
class CheckRecord:
    name: str
    max_residual: float
    tolerance: float
    trials: int
    worst_trial: int
    worst_digest: str
    errors: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and self.max_residual <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "max_residual": self.max_residual if np.isfinite(self.max_residual) else None,
            "tolerance": self.tolerance,
            "trials": self.trials,
            "worst_trial": self.worst_trial,
            "worst_digest": self.worst_digest,
            "errors": self.errors,
        }


@dataclass
class SuiteReport:
    suite_id: str
    n: int
    trials: int
    seed: int
    checks: list[CheckRecord]
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        # wall time is left out so reports are byte-identical across runs
        return {
            "suite": self.suite_id,
            "version": __version__,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "pass": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def summary_lines(self) -> list[str]:
        out = []
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            res = f"{c.max_residual:.3e}" if np.isfinite(c.max_residual) else "error"
            out.append(f"{flag}  {self.suite_id}/{c.name}: max residual {res} "
                       f"(tol {c.tolerance:.0e}, {c.trials} trials)")
        return out


@dataclass(frozen=True)
class Suite:
    name: str
    description: str
    trial: Callable[[np.random.Generator, int, "_Digest"], dict[str, float]]
    tolerances: dict[str, float]
    default_trials: int
    min_n: int = 1


# ---------------------------------------------------------- trial bodies

class _Digest:
    """Collects the arrays a trial sampled, for the worst-case fingerprint."""

    def __init__(self):
        self.h = hashlib.sha256()

    def add(self, *arrays) -> None:
        for a in arrays:
            self.h.update(np.ascontiguousarray(np.asarray(a, dtype=complex)).tobytes())

    def hexdigest(self) -> str:
        return self.h.hexdigest()[:16]


def _trial_factorization(rng, n, dg):
    K = _ginibre(rng, n)
    dg.add(K)
    s = split(K)
    out = {"split_residual": s.residual(K)}
    out["split_consistency"] = _rel(frob(np.linalg.solve(s.bL, s.gL) - dag(s.gR) @ s.bR),
                                    frob(dag(s.gR) @ s.bR))
    s2 = split(s.gL @ np.linalg.inv(s.bR))
    out["resplit"] = max(_rel(frob(getattr(s, a) - getattr(s2, a)), frob(getattr(s, a)))
                         for a in ("gL", "bL", "gR", "bR"))
    out["m1_roundtrip"] = _rel(frob(m1_inv(*m1(K)) - K), frob(K))
    g, b = random_unitary(rng, n), random_pos_triangular(rng, n)
    dg.add(g, b)
    g2, b2 = m2_inv(*m2(g, b))
    out["m2_roundtrip"] = max(frob(g2 - g), _rel(frob(b2 - b), frob(b)))
    ref = np.linalg.inv(dag(K) @ K)
    out["bR_gram"] = _rel(frob(s.bR @ dag(s.bR) - ref), frob(ref))
    U = random_unitary(rng, n)
    dg.add(U)
    out["moment_of_unitary"] = frob(moment_Lambda(U) - np.eye(n))
    return out


def _trial_gradients(rng, n, dg):
    points = {
        "gl": (sample_gl(rng, n), GROUP_WORDS),
        "phase": (sample_phase(rng, n), GROUP_WORDS),
        "model1": (ModelPoint1(random_unitary(rng, n), random_pos_triangular(rng, n)), GROUP_WORDS),
        "reduced": (sample_reduced(rng, n), TORUS_WORDS),
        "rs": (rs_from(sample_reduced(rng, n, positive=True)), TORUS_WORDS),
    }
    out = {}
    for label, (point, alphabet) in points.items():
        f = random_obs(rng, alphabet)
        exact = grad_exact(f, point)
        fd = grad_fd(f, point, scheme="central4", h=1e-3)
        scale = max([1.0] + [frob(v) for v in exact.slots().values()])
        out[f"pairing_{label}"] = pairing_residual(f, point, exact) / scale
        out[f"fd_vs_exact_{label}"] = max(
            frob(fd.slots()[k] - v) for k, v in exact.slots().items()) / scale
        out[f"subspace_{label}"] = max(
            subspace_residual(v, exact.space(k)[1]) for k, v in exact.slots().items())
        dg.add(*_point_arrays(point))
    return out


def _point_arrays(point) -> list[np.ndarray]:
    if isinstance(point, np.ndarray):
        return [point]
    if isinstance(point, ModelPoint1):
        return [point.g, point.b]
    if isinstance(point, ReducedPoint):
        return [point.q, point.L]
    if isinstance(point, RSCoords):
        return [point.torus.q, point.p, point.lam]
    return [point.g, point.L]


def _trial_ladder(rng, n, dg):
    point = sample_phase(rng, n)
    dg.add(*_point_arrays(point))
    worst = 0.0
    Hs = {k: grad_exact(hamiltonian_word(k), point) for k in range(1, 5)}
    for _ in range(10):
        f = random_obs(rng)
        gf = grad_exact(f, point)
        for k in range(1, 4):
            a = bracket_from_grads("ctb2", gf, Hs[k], point)
            b = bracket_from_grads("ctb1", gf, Hs[k + 1], point)
            worst = max(worst, abs(a - b))
    return {"ladder": worst}


def _jacobi_point(rng, n, kind):
    if kind.startswith("red"):
        return sample_reduced(rng, n), TORUS_WORDS
    return sample_phase(rng, n), GROUP_WORDS


def _trial_jacobi(rng, n, dg):
    from .brackets import kind_bracket

    out = {}
    for kind in ("ctb1", "ctb2", "red1", "red2"):
        point, alphabet = _jacobi_point(rng, n, kind)
        dg.add(*_point_arrays(point))
        f, g, h = (random_obs(rng, alphabet, max_len=3) for _ in range(3))
        out[f"jacobi_{kind}"] = abs(jacobi_residual(kind_bracket(kind), f, g, h, point))
    return out


PENCIL_T = (-1.0, 0.5, 1.0, 2.0)


def _trial_compatibility(rng, n, dg):
    out = {}
    for t in PENCIL_T:
        point = sample_phase(rng, n)
        dg.add(*_point_arrays(point))
        f, g, h = (random_obs(rng, max_len=3) for _ in range(3))
        out[f"jacobi_pencil_t={t:g}"] = abs(jacobi_residual(pencil(t), f, g, h, point))
    return out


def _shifted_bracket(kind, f, h, point, Df, Dh):
    """{Df, h} + {f, Dh} with D the identity-shift derivation; zero words drop out."""
    total = 0.0
    if Df is not None:
        total += bracket(kind, Df, h, point)
    if Dh is not None:
        total += bracket(kind, f, Dh, point)
    return total


def _trial_exactness(rng, n, dg):
    point = sample_phase(rng, n)
    dg.add(*_point_arrays(point))
    f, h = random_obs(rng), random_obs(rng)
    Df, Dh = identity_shift_derivative(f), identity_shift_derivative(h)
    out = {}
    outer2 = exactness_derivative(lambda p: bracket("ctb2", f, h, p), point)
    rhs = outer2 - _shifted_bracket("ctb2", f, h, point, Df, Dh)
    lhs = bracket("ctb1", f, h, point)
    out["exactness_D"] = abs(lhs - rhs)
    outer1 = exactness_derivative(lambda p: bracket("ctb1", f, h, p), point)
    out["exactness_D2"] = abs(outer1 - _shifted_bracket("ctb1", f, h, point, Df, Dh))
    return out


def _trial_reduction(rng, n, dg):
    point = sample_reduced(rng, n)
    dg.add(*_point_arrays(point))
    phase = point.as_phase_point()
    out = {"red1_vs_ctb1": 0.0, "red2_vs_ctb2": 0.0, "extension_d2": 0.0, "extension_D1": 0.0}
    for _ in range(6):
        f, h = random_obs(rng, TORUS_WORDS), random_obs(rng, TORUS_WORDS)
        F, H = extend_invariant(f), extend_invariant(h)
        for i in ("1", "2"):
            a = bracket("red" + i, f, h, point)
            b = bracket("ctb" + i, F, H, phase)
            key = f"red{i}_vs_ctb{i}"
            out[key] = max(out[key], _rel(abs(a - b), b))
        gf, gF = grad_exact(f, point), grad_exact(F, phase)
        C = comm(point.L, gf.d2)
        Cp = np.triu(C, 1)
        ext_d2 = max(frob(gF.d2 - gf.d2), float(np.max(np.abs(np.diag(C)))))
        ext_D1 = frob(gF.D1 - (gf.D1 - Cp - 2 * rmatrix_apply(point.torus, Cp)))
        out["extension_d2"] = max(out["extension_d2"], ext_d2)
        out["extension_D1"] = max(out["extension_D1"], _rel(ext_D1, frob(gF.D1)))
    return out


def _random_normalizer(rng, n) -> np.ndarray:
    """A random element of N(n): permutation times diagonal unitary."""
    P = np.eye(n)[rng.permutation(n)]
    return P @ np.diag(np.exp(1j * rng.uniform(-np.pi, np.pi, n)))


def _conjugate_reduced(eta, point) -> ReducedPoint:
    Q2 = eta @ point.Q @ dag(eta)
    return ReducedPoint(Torus(np.angle(np.diag(Q2))), eta @ point.L @ dag(eta))


def _trial_invariance(rng, n, dg):
    point = sample_reduced(rng, n)
    eta = _random_normalizer(rng, n)
    dg.add(*_point_arrays(point), eta)
    moved = _conjugate_reduced(eta, point)
    out = {}
    f, h = random_obs(rng, TORUS_WORDS), random_obs(rng, TORUS_WORDS)
    for kind in ("red1", "red2"):
        a, b = bracket(kind, f, h, point), bracket(kind, f, h, moved)
        out[f"{kind}_normalizer"] = _rel(abs(a - b), a)
    words = conserved_words(4)
    out["conserved_words_normalizer"] = max(
        _rel(abs(evaluate(w, point) - evaluate(w, moved)), evaluate(w, point)) for w in words)
    X, Y = _ginibre(rng, n), _ginibre(rng, n)
    out["rmatrix_antisymmetry"] = abs(pairing(rmatrix_apply(point.torus, X), Y)
                                      + pairing(X, rmatrix_apply(point.torus, Y)))
    return out


def _trial_actions(rng, n, dg):
    K = sample_gl(rng, n)
    e1, e2 = random_unitary(rng, n), random_unitary(rng, n)
    dg.add(K, e1, e2)
    out = {}
    a12 = quasi_adjoint(e2, quasi_adjoint(e1, K))
    a = quasi_adjoint(e2 @ e1, K)
    out["quasi_adjoint_composition"] = _rel(frob(a12 - a), frob(a))
    out["quasi_adjoint_identity"] = _rel(frob(quasi_adjoint(np.eye(n), K) - K), frob(K))
    out["quasi_adjoint_at_one"] = frob(quasi_adjoint(e1, np.eye(n)) - np.eye(n))
    g, b = m1(K)
    gA, bA = m1(quasi_adjoint(e1, K))
    g1, b1 = action_A1(e1, g, b)
    out["A1_transport"] = max(frob(g1 - gA), _rel(frob(b1 - bA), frob(bA)))
    gm, Lm = model_map(K)
    g2, L2 = action_A2(e1, gm, Lm)
    gB, LB = model_map(quasi_adjoint(e1, K))
    out["A2_transport"] = max(frob(g2 - gB), _rel(frob(L2 - LB), frob(LB)))
    et = dressed_eta(e1, K)
    gu, Lu = undressed_A2(et, gm, Lm)
    out["A2_on_undressed_orbit"] = max(frob(gu - g2), _rel(frob(Lu - L2), frob(L2)))
    inv = word("Ginv", "L", "G", "L")
    P, P2 = PhasePoint(gm, Lm), PhasePoint(g2, L2)
    out["A2_invariant_word"] = _rel(abs(evaluate(inv, P) - evaluate(inv, P2)), evaluate(inv, P))
    # closure: brackets of invariant words are invariant under the undressed action
    point = sample_model2(rng, n)
    dg.add(*_point_arrays(point))
    F, H = random_obs(rng), random_obs(rng)
    gc, Lc = undressed_A2(e2, point.g, point.L)
    a, c = bracket("model2", F, H, point), bracket("model2", F, H, ModelPoint2(gc, Lc))
    out["model2_closure"] = _rel(abs(a - c), a)
    return out


def _fd4(phi, h):
    return (-phi(2 * h) + 8 * phi(h) - 8 * phi(-h) + phi(-2 * h)) / (12 * h)


def _trial_heisenberg(rng, n, dg):
    out = {}
    point = sample_model2(rng, n)
    dg.add(*_point_arrays(point))
    F, H = random_obs(rng), random_obs(rng)
    a, c = bracket("ctb2", F, H, point), bracket("model2", F, H, point)
    out["ctb2_half_model2"] = _rel(abs(a - 0.5 * c), a)
    K = sample_gl(rng, n)
    dg.add(K)
    vd = bracket("double", F, H, K)
    v1 = bracket("model1", F, H, ModelPoint1(*m1(K)))
    v2 = bracket("model2", F, H, ModelPoint2(*model_map(K)))
    out["double_model1_model2"] = max(_rel(abs(vd - v1), vd), _rel(abs(vd - v2), vd))
    # push the double-bracket field of psi(bR) forward through m1
    psi = random_obs(rng, ("L",))
    h = lambda K: evaluate(psi, K)
    Kd = hamiltonian_vector_field("double", h, K, method="fd")
    g, b = m1(K)
    Dpsi = grad_exact(psi, ModelPoint1(g, b)).D2
    step = 1e-3 * frob(K) / max(frob(Kd), 1e-300)
    gd = _fd4(lambda t: m1(K + t * Kd)[0], step)
    bd = _fd4(lambda t: m1(K + t * Kd)[1], step)
    gref, bref = Dpsi @ g, b @ proj_b(np.linalg.solve(b, Dpsi @ b))
    out["hvf_pushforward"] = max(_rel(frob(gd - gref), frob(gref)), _rel(frob(bd - bref), frob(bref)))
    out["dotK_closed_form"] = _rel(frob(Kd + K @ Dpsi), frob(Kd))
    # Hamiltonian vector fields reproduce the brackets on coordinate functions
    P = sample_phase(rng, n)
    dg.add(*_point_arrays(P))
    coords = coordinate_observables(n)
    for kind in ("ctb1", "ctb2"):
        h = random_obs(rng)
        dgv, dLv = hamiltonian_vector_field(kind, h, P)
        worst = 0.0
        for c in coords:
            dM = dLv if c.letter == "L" else dgv
            z = dM[c.k, c.l]
            lhs = z.real if c.part == "Re" else z.imag
            br = bracket(kind, c, h, P)
            worst = max(worst, abs(lhs - br))
        out[f"hvf_{kind}"] = worst
    return out


def _trial_flows(rng, n, dg):
    out = {}
    P = sample_phase(rng, n)
    dg.add(*_point_arrays(P))
    f = random_obs(rng)
    for k in (1, 2):
        d = _fd4(lambda t: evaluate(f, explicit_flow(k, t, P)), 1e-3)
        a = bracket("ctb2", f, hamiltonian_word(k), P)
        b = bracket("ctb1", f, hamiltonian_word(k + 1), P)
        out[f"explicit_flow_k{k}"] = max(_rel(abs(d - a), a), _rel(abs(d - b), b))
    t1, t2 = rng.uniform(-1, 1, 2)
    A = explicit_flow(2, t2, explicit_flow(1, t1, P))
    B = explicit_flow(1, t1, explicit_flow(2, t2, P))
    out["flows_commute"] = frob(A.g - B.g) + frob(A.L - B.L)
    R = sample_reduced(rng, n)
    dg.add(*_point_arrays(R))
    f = random_obs(rng, TORUS_WORDS)
    worst_field = worst_n17 = worst_dec = worst_tan = 0.0
    for k in (1, 2):
        dQ, dL = reduced_field(k, R)
        dq = np.diag(dQ @ dag(R.Q)).imag
        curve = lambda t: unchecked(ReducedPoint, torus=Torus(R.q + t * dq), L=R.L + t * dL)
        d = _fd4(lambda t: evaluate(f, curve(t)), 1e-3)
        a = bracket("red2", f, hamiltonian_word(k), R)
        b = bracket("red1", f, hamiltonian_word(k + 1), R)
        worst_field = max(worst_field, _rel(abs(d - a), a), _rel(abs(d - b), b))
        z = zeta(k, R)
        Lk = np.linalg.matrix_power(R.L, k)
        n17 = (1j * Lk @ R.Q + comm(z, R.Q)) @ dag(R.Q)
        worst_n17 = max(worst_n17, frob(offdiag(n17)), float(np.max(np.abs(np.diag(n17).real))))
        VQ = 1j * Lk @ R.Q
        worst_dec = max(worst_dec, frob(dQ - (VQ + comm(z, R.Q))), frob(dL - comm(z, R.L)))
        worst_tan = max(worst_tan, frob(offdiag(dQ @ dag(R.Q))))
    out["reduced_field_brackets"] = worst_field
    out["zeta_condition"] = worst_n17
    out["reduced_field_decomposition"] = worst_dec
    out["reduced_field_tangency"] = worst_tan
    return out


CONSERVATION_RUN = {"t_end": 10.0, "dt": 1e-2, "min_gap": 0.5, "scale": 0.5}


def _trial_conservation(rng, n, dg):
    c = CONSERVATION_RUN
    start = ReducedPoint(Torus(random_angles(rng, n, c["min_gap"])),
                         random_hermitian(rng, n, c["scale"]))
    dg.add(*_point_arrays(start))
    traj = integrate(1, start, c["t_end"], c["dt"])
    records = conserved_suite(traj, degree_cap=4)
    energy = next(r for r in records if r.observable == "1*Re tr(L^2)")
    return {
        "conserved_drift": max(r.max_drift for r in records),
        "energy_drift": energy.max_drift,
        "hermiticity_drift": traj.max_herm_drift,
        "regularity_margin": max(0.0, 10 * EPS_REG - traj.min_gap),
    }


def _trial_coords(rng, n, dg):
    out = {}
    R = sample_reduced(rng, n)
    dg.add(*_point_arrays(R))
    s = sutherland_from(R)
    back = sutherland_to(s)
    out["sutherland_roundtrip"] = _rel(frob(back.L - R.L), frob(R.L))
    half = 0.5 * np.trace(R.L @ R.L).real
    out["sutherland_hamiltonian"] = _rel(abs(half - sutherland_H(s)), half)
    Rp = sample_reduced(rng, n, positive=True)
    dg.add(*_point_arrays(Rp))
    c = rs_from(Rp)
    out["rs_roundtrip"] = _rel(frob(rs_to(c).L - Rp.L), frob(Rp.L))
    tr = np.trace(Rp.L).real
    out["rs_hamiltonian"] = _rel(abs(tr - rs_hamiltonian(c)), tr)
    f, h = random_obs(rng, TORUS_WORDS), random_obs(rng, TORUS_WORDS)
    gf = grad_fd(lambda p: evaluate(f, p), c)
    gh = grad_fd(lambda p: evaluate(h, p), c)
    a = bracket_from_grads("decoupled2", gf, gh, c)
    b = bracket("red2", f, h, Rp)
    out["decoupled_vs_red2"] = _rel(abs(a - b), b)
    return out


SUITES: dict[str, Suite] = {}


def _register(name, description, trial, tolerances, default_trials, min_n=1):
    SUITES[name] = Suite(name, description, trial, tolerances, default_trials, min_n)


_register("factorization", "Iwasawa splits, model maps and their inverses",
          _trial_factorization,
          {"split_residual": 1e-9, "split_consistency": 1e-9, "resplit": 1e-8,
           "m1_roundtrip": 1e-9, "m2_roundtrip": 1e-10, "bR_gram": 1e-9,
           "moment_of_unitary": 1e-9}, 100)
_register("gradients", "exact gradients vs product-rule derivatives and finite differences",
          _trial_gradients,
          {f"{c}_{p}": tol for p in ("gl", "phase", "model1", "reduced", "rs")
           for c, tol in (("pairing", 1e-10), ("fd_vs_exact", 1e-7), ("subspace", 1e-9))}, 20)
_register("jacobi", "nested finite-difference Jacobi residuals", _trial_jacobi,
          {f"jacobi_{k}": 1e-5 for k in ("ctb1", "ctb2", "red1", "red2")}, 20)
_register("compatibility", "Jacobi residual of ctb1 + t ctb2", _trial_compatibility,
          {f"jacobi_pencil_t={t:g}": 1e-5 for t in PENCIL_T}, 20)
_register("exactness", "the identity-shift derivation relates the two brackets",
          _trial_exactness, {"exactness_D": 1e-6, "exactness_D2": 1e-6}, 50)
_register("ladder", "{f, H_k}_2 = {f, H_k+1}_1 for k <= 3", _trial_ladder, {"ladder": 1e-8}, 50)
_register("reduction-oracle", "reduced brackets vs brackets of invariant extensions",
          _trial_reduction,
          {"red1_vs_ctb1": 1e-7, "red2_vs_ctb2": 1e-7, "extension_d2": 1e-8, "extension_D1": 1e-8}, 50)
_register("invariance", "normalizer invariance of reduced brackets and conserved words",
          _trial_invariance,
          {"red1_normalizer": 1e-8, "red2_normalizer": 1e-8,
           "conserved_words_normalizer": 1e-10, "rmatrix_antisymmetry": 1e-10}, 20)
_register("actions", "quasi-adjoint action and its transported forms", _trial_actions,
          {"quasi_adjoint_composition": 1e-9, "quasi_adjoint_identity": 1e-9,
           "quasi_adjoint_at_one": 1e-9, "A1_transport": 1e-9, "A2_transport": 1e-9,
           "A2_on_undressed_orbit": 1e-9, "A2_invariant_word": 1e-9,
           "model2_closure": 1e-7}, 20)
_register("heisenberg", "Heisenberg double vs its models, vector fields", _trial_heisenberg,
          {"ctb2_half_model2": 1e-8, "double_model1_model2": 1e-8, "hvf_pushforward": 1e-6,
           "dotK_closed_form": 1e-8, "hvf_ctb1": 1e-7, "hvf_ctb2": 1e-7}, 20)
_register("flows", "explicit and reduced flows vs bracket derivatives", _trial_flows,
          {"explicit_flow_k1": 1e-7, "explicit_flow_k2": 1e-7, "flows_commute": 1e-9,
           "reduced_field_brackets": 1e-7, "zeta_condition": 1e-9,
           "reduced_field_decomposition": 1e-10, "reduced_field_tangency": 1e-10}, 20)
_register("conservation", "RK4 drift of conserved words (t_end=10, dt=1e-2)",
          _trial_conservation,
          {"conserved_drift": 1e-7, "energy_drift": 1e-8, "hermiticity_drift": 1e-8,
           "regularity_margin": 0.0}, 5)
_register("coords", "Sutherland and Ruijsenaars coordinates", _trial_coords,
          {"sutherland_roundtrip": 1e-9, "sutherland_hamiltonian": 1e-9, "rs_roundtrip": 1e-9,
           "rs_hamiltonian": 1e-9, "decoupled_vs_red2": 1e-6}, 20)


# ------------------------------------------------------------- runner

def worker_count() -> int:
    cap = os.environ.get("BIHAM_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"BIHAM_THREADS must be an integer, got {cap!r}") from None
    return n


def _run_trial(suite: Suite, seed: int, i: int, n: int):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
    dg = _Digest()
    try:
        with np.errstate(all="ignore"):
            res = suite.trial(rng, n, dg)
        return i, res, dg.hexdigest(), None
    except Exception as exc:  # a failed trial is a failed check, not a crash
        return i, {}, dg.hexdigest(), f"trial {i}: {type(exc).__name__}: {exc}"


def run_suite(spec: SuiteSpec) -> SuiteReport:
    if spec.suite_id not in SUITES:
        raise KeyError(f"unknown suite {spec.suite_id!r}")
    suite = SUITES[spec.suite_id]
    if spec.n < suite.min_n:
        raise ValueError(f"suite {suite.name} needs n >= {suite.min_n}")
    unknown = set(spec.tol) - set(suite.tolerances)
    if unknown:
        raise KeyError(f"unknown check(s) for {suite.name}: {', '.join(sorted(unknown))}")
    trials = spec.trials or suite.default_trials
    tol = {**suite.tolerances, **spec.tol}
    t0 = time.perf_counter()
    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda i: _run_trial(suite, spec.seed, i, spec.n),
                                    range(trials)))
    else:
        results = [_run_trial(suite, spec.seed, i, spec.n) for i in range(trials)]
    results.sort(key=lambda r: r[0])
    checks = []
    for name in suite.tolerances:
        worst, worst_i, worst_d, errors = -np.inf, -1, "", []
        for i, res, digest, err in results:
            if err is not None:
                errors.append(err)
                continue
            r = float(res[name])
            if not np.isfinite(r):
                errors.append(f"trial {i}: non-finite residual")
                continue
            if r > worst:
                worst, worst_i, worst_d = r, i, digest
        if worst_i < 0:
            worst = np.inf
        checks.append(CheckRecord(name, worst, tol[name], trials, worst_i, worst_d, errors))
    return SuiteReport(suite.name, spec.n, trials, spec.seed, checks,
                       wall_time=time.perf_counter() - t0)
