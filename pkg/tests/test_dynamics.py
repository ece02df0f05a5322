from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biham.brackets import bracket
from biham.dynamics import (
    RegularityLost,
    conserved_suite,
    conserved_words,
    explicit_flow,
    hamiltonian_Hk,
    hamiltonian_word,
    integrate,
    reduced_field,
    zeta,
)
from biham.linalg import dag, random_angles, random_positive, random_unitary
from biham.observables import evaluate, random_observable
from biham.points import PhasePoint, ReducedPoint, Torus
from biham.rmatrix import rmatrix_apply

from conftest import phase_point, reduced_point

seeds = st.integers(min_value=0, max_value=2**32 - 1)
TW = ("Q", "Qinv", "L")


def _standard_start(rng, n=3):
    return ReducedPoint(Torus(random_angles(rng, n, 0.5)), random_positive(rng, n, 0.5))


def test_hamiltonian_examples():
    p = PhasePoint(np.eye(2), np.diag([1.0, 2.0]))
    assert hamiltonian_Hk(1, p) == 3
    assert hamiltonian_Hk(2, p) == 2.5
    with pytest.raises(ValueError):
        hamiltonian_Hk(0, p)


def test_hamiltonian_word_matches(n, rng):
    p = phase_point(rng, n)
    for k in range(1, 5):
        assert evaluate(hamiltonian_word(k), p) == pytest.approx(hamiltonian_Hk(k, p))
        eta = random_unitary(rng, n)
        q = PhasePoint(p.g, eta @ p.L @ dag(eta))
        assert hamiltonian_Hk(k, q) == pytest.approx(hamiltonian_Hk(k, p), abs=1e-10)


def test_explicit_flow_examples(rng):
    p = phase_point(rng, 3)
    same = explicit_flow(2, 0.0, p)
    np.testing.assert_allclose(same.g, p.g, atol=1e-14)
    g0 = random_unitary(rng, 2)
    out = explicit_flow(1, np.pi, PhasePoint(g0, np.diag([1.0, -1.0])))
    np.testing.assert_allclose(out.g, -g0, atol=1e-14)
    np.testing.assert_array_equal(out.L, np.diag([1.0, -1.0]))


def test_explicit_flows_commute(n, rng):
    p = phase_point(rng, n)
    a = explicit_flow(2, 0.4, explicit_flow(1, 0.7, p))
    b = explicit_flow(1, 0.7, explicit_flow(2, 0.4, p))
    np.testing.assert_allclose(a.g, b.g, atol=1e-9)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_explicit_flow_is_hamiltonian(k, rng):
    for _ in range(5):
        p = phase_point(rng, 3)
        f = random_observable(rng)
        h = 1e-3
        val = lambda t: evaluate(f, explicit_flow(k, t, p))
        ddt = (-val(2 * h) + 8 * val(h) - 8 * val(-h) + val(-2 * h)) / (12 * h)
        assert ddt == pytest.approx(bracket("ctb2", f, hamiltonian_word(k), p), abs=1e-7)
        assert ddt == pytest.approx(bracket("ctb1", f, hamiltonian_word(k + 1), p), abs=1e-7)


def test_zeta_examples(rng):
    r = reduced_point(rng, 3)
    assert not zeta(1, ReducedPoint(r.torus, np.zeros((3, 3)))).any()
    D = np.diag([0.3, -1.2, 2.0])
    for k in (1, 2, 3):
        np.testing.assert_allclose(zeta(k, ReducedPoint(r.torus, D)),
                                   -0.5j * np.linalg.matrix_power(D, k), atol=1e-15)


@given(seeds, st.integers(min_value=1, max_value=3))
@settings(max_examples=100, deadline=None)
def test_zeta_gauge_condition(seed, k):
    rng = np.random.default_rng(seed)
    r = reduced_point(rng, 3)
    Z, Q = zeta(k, r), r.Q
    Lk = np.linalg.matrix_power(r.L, k)
    np.testing.assert_allclose(Z + dag(Z), 0, atol=1e-10)
    X = (1j * Lk @ Q + Z @ Q - Q @ Z) @ dag(Q)
    scale = max(1.0, np.linalg.norm(Lk))
    assert np.linalg.norm(X - np.diag(np.diag(X))) <= 1e-9 * scale
    assert np.abs(np.diag(X).real).max() <= 1e-9 * scale


@given(seeds, st.integers(min_value=1, max_value=3))
@settings(max_examples=50, deadline=None)
def test_reduced_field_decomposition(seed, k):
    rng = np.random.default_rng(seed)
    r = reduced_point(rng, 3)
    dQ, dL = reduced_field(k, r)
    Z, Q, L = zeta(k, r), r.Q, r.L
    Lk = np.linalg.matrix_power(L, k)
    scale = max(1.0, np.linalg.norm(Lk) * np.linalg.norm(L))
    assert np.linalg.norm(dQ - (1j * Lk @ Q + Z @ Q - Q @ Z)) <= 1e-10 * scale
    assert np.linalg.norm(dL - (Z @ L - L @ Z)) <= 1e-10 * scale
    T = dQ @ dag(Q)
    assert np.linalg.norm(T - np.diag(np.diag(T))) <= 1e-10 * scale
    np.testing.assert_allclose(dL, dag(dL), atol=1e-10 * scale)


def test_reduced_field_diagonal(rng):
    r = ReducedPoint(Torus([0.1, 1.5, -2.0]), np.diag([0.5, -1.0, 2.0]))
    for k in (1, 2):
        dQ, dL = reduced_field(k, r)
        np.testing.assert_allclose(dQ, 1j * np.linalg.matrix_power(r.L, k) @ r.Q, atol=1e-15)
        assert not dL.any()


@pytest.mark.parametrize("k", [1, 2, 3])
def test_reduced_field_generates_brackets(k, rng):
    for _ in range(5):
        r = reduced_point(rng, 3)
        f = random_observable(rng, TW)
        dQ, dL = reduced_field(k, r)
        dq = np.diag(dQ @ dag(r.Q)).imag

        def val(t):
            return evaluate(f, ReducedPoint(Torus(r.q + t * dq), r.L + t * dL))

        h = 1e-3
        ddt = (-val(2 * h) + 8 * val(h) - 8 * val(-h) + val(-2 * h)) / (12 * h)
        assert ddt == pytest.approx(bracket("red2", f, hamiltonian_word(k), r), abs=1e-7)
        assert ddt == pytest.approx(bracket("red1", f, hamiltonian_word(k + 1), r), abs=1e-7)


def test_integrate_diagonal_closed_form():
    q0 = np.array([0.0, 2.1, -2.1])
    D = np.diag([0.4, 0.1, -0.2])
    for k in (1, 2):
        tr = integrate(k, ReducedPoint(Torus(q0), D), 5.0, 0.05)
        expect = q0[None, :] + tr.times[:, None] * np.diag(D)[None, :] ** k
        np.testing.assert_allclose(np.exp(1j * tr.q), np.exp(1j * expect), atol=1e-12)
        assert np.all(tr.L == D)


def test_integrate_conserves_standard_run():
    tr = integrate(1, _standard_start(np.random.default_rng(0)), 10.0, 1e-2)
    assert len(tr) == 1001
    recs = {r.observable: r.max_drift for r in conserved_suite(tr)}
    assert recs["1*Re tr(L^2)"] <= 1e-8
    assert recs["1*Re tr(L Qinv L Q)"] <= 1e-7
    assert max(recs.values()) <= 1e-7
    assert tr.min_gap > 0
    assert tr.max_herm_drift <= 1e-8


def test_rk4_fourth_order():
    start = _standard_start(np.random.default_rng(1))
    ref = integrate(2, start, 1.0, 1e-3)
    errs = []
    for dt in (0.1, 0.05, 0.025):
        tr = integrate(2, start, 1.0, dt)
        errs.append(np.linalg.norm(tr.L[-1] - ref.L[-1]) + np.linalg.norm(tr.q[-1] - ref.q[-1]))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 3.6)


def test_integrate_regularity_loss():
    start = ReducedPoint(Torus([0.0, 0.05]), np.diag([1.0, 0.0]))
    with pytest.raises(RegularityLost) as info:
        integrate(1, start, 1.0, 0.01)
    assert info.value.t == pytest.approx(0.05)
    assert info.value.gap < 1e-7
    assert len(info.value.partial) == 5


def test_integrate_rejects_bad_args(rng):
    r = reduced_point(rng, 2)
    with pytest.raises(ValueError):
        integrate(1, r, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate(1, r, 1.0, 0.1, method="euler")


def test_conserved_words_enumeration():
    assert [str(w) for w in conserved_words(1)] == ["1*Re tr(L)"]
    two = {str(w) for w in conserved_words(2)}
    assert two == {"1*Re tr(L)", "1*Re tr(L^2)", "1*Re tr(L Qinv L Q)"}
    words = [str(w) for w in conserved_words(4)]
    assert len(words) == len(set(words))


def test_conserved_words_invariant_under_normalizer(rng):
    for _ in range(10):
        r = reduced_point(rng, 3)
        perm = rng.permutation(3)
        eta = np.eye(3)[perm] @ np.diag(np.exp(1j * rng.uniform(-3, 3, 3)))
        r2 = ReducedPoint(Torus(r.q[perm]), eta @ r.L @ dag(eta))
        np.testing.assert_allclose(r2.Q, eta @ r.Q @ dag(eta), atol=1e-14)
        for w in conserved_words(4):
            assert evaluate(w, r2) == pytest.approx(evaluate(w, r), abs=1e-10)


def test_conserved_suite_point(rng):
    r = reduced_point(rng, 3)
    recs = conserved_suite(r, degree_cap=3)
    assert all(rec.max_drift == 0 for rec in recs)
    assert recs[0].initial == pytest.approx(np.trace(r.L).real)


def test_rmatrix_in_rhs_is_antihermitian_generator(rng):
    r = reduced_point(rng, 3)
    A = rmatrix_apply(r.torus, 1j * r.L @ r.L)
    np.testing.assert_allclose(A + dag(A), 0, atol=1e-12)
