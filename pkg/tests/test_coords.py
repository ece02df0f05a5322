from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biham.coords import (
    linearized_bplus,
    rs_from,
    rs_hamiltonian,
    rs_potentials,
    rs_to,
    solve_bplus,
    sutherland_H,
    sutherland_from,
    sutherland_to,
    to_reduced,
)
from biham.linalg import dag, random_angles, random_hermitian
from biham.points import ReducedPoint, RSCoords, SutherlandCoords, Torus
from biham.rmatrix import rmatrix_apply

from conftest import ginibre, reduced_point

seeds = st.integers(min_value=0, max_value=2**32 - 1)
sizes = st.integers(min_value=1, max_value=4)


def _phi(rng, n):
    phi = random_hermitian(rng, n)
    np.fill_diagonal(phi, 0)
    return phi


@given(seeds, st.integers(min_value=2, max_value=4))
@settings(max_examples=100, deadline=None)
def test_sutherland_roundtrip(seed, n):
    rng = np.random.default_rng(seed)
    r = reduced_point(rng, n)
    c = sutherland_from(r)
    back = sutherland_to(c)
    assert np.linalg.norm(back.L - r.L) <= 1e-10 * max(1, np.linalg.norm(r.L))
    c2 = SutherlandCoords(random_angles(rng, n, 0.3), rng.standard_normal(n), _phi(rng, n))
    again = sutherland_from(sutherland_to(c2))
    np.testing.assert_allclose(again.phi, c2.phi, atol=1e-10)
    np.testing.assert_allclose(again.p, c2.p, atol=1e-12)


@given(seeds, st.integers(min_value=2, max_value=4))
@settings(max_examples=100, deadline=None)
def test_sutherland_hamiltonian(seed, n):
    rng = np.random.default_rng(seed)
    c = SutherlandCoords(random_angles(rng, n, 0.3), rng.standard_normal(n), _phi(rng, n))
    L = sutherland_to(c).L
    half = 0.5 * np.trace(L @ L).real
    assert sutherland_H(c) == pytest.approx(half, abs=1e-9 * max(1, half))


def test_sutherland_examples():
    q, p = np.array([0.3, -1.0, 2.0]), np.array([1.0, -2.0, 0.5])
    r = sutherland_to(SutherlandCoords(q, p, np.zeros((3, 3))))
    np.testing.assert_allclose(r.L, np.diag(p), atol=1e-15)
    assert sutherland_H(SutherlandCoords(q, p, np.zeros((3, 3)))) == pytest.approx(0.5 * p @ p)
    phi = np.array([[0, 1], [1, 0]], dtype=complex)
    assert sutherland_H(SutherlandCoords([np.pi / 2, -np.pi / 2], [0.0, 0.0], phi)) == pytest.approx(0.25)
    phi = np.array([[0, 0.3 + 0.4j], [0.3 - 0.4j, 0]])
    c = SutherlandCoords([0.7, -0.4], [1.0, 2.0], phi)
    s = np.sin(1.1 / 2) ** 2
    assert sutherland_H(c) == pytest.approx(0.5 * 5 + 0.25 * 0.25 / s)


def test_sutherland_inverse_formula(rng):
    r = reduced_point(rng, 3)
    c = sutherland_from(r)
    Lp = r.L - np.diag(np.diag(r.L))
    np.testing.assert_allclose(Lp, -rmatrix_apply(r.torus, c.phi) - 0.5 * c.phi, atol=1e-12)


def test_sutherland_rejects_bad_phi():
    with pytest.raises(ValueError):
        SutherlandCoords([0.0, 1.0], [0.0, 0.0], np.eye(2))
    with pytest.raises(ValueError):
        SutherlandCoords([0.0, 0.0], [0.0, 0.0], np.zeros((2, 2)))


@given(seeds, sizes)
@settings(max_examples=100, deadline=None)
def test_rs_roundtrip_and_hamiltonian(seed, n):
    rng = np.random.default_rng(seed)
    r = reduced_point(rng, n, positive=True)
    c = rs_from(r)
    np.testing.assert_allclose(np.diag(c.lam), 1, atol=1e-12)
    back = rs_to(c)
    assert np.linalg.norm(back.L - r.L) <= 1e-9 * max(1, np.linalg.norm(r.L))
    trL = np.trace(r.L).real
    assert rs_hamiltonian(c) == pytest.approx(trL, abs=1e-9 * max(1, trL))


def test_rs_scalar_case():
    c = rs_from(ReducedPoint(Torus([0.4]), np.array([[2.5]])))
    assert c.lam[0, 0] == 1
    assert c.p[0] == pytest.approx(0.5 * np.log(2.5))
    assert rs_hamiltonian(c) == pytest.approx(2.5)


def test_rs_trivial_lambda_means_diagonal(rng):
    t = Torus(random_angles(rng, 4, 0.3))
    np.testing.assert_allclose(solve_bplus(t, np.eye(4)), np.eye(4), atol=1e-15)
    p = rng.standard_normal(4)
    r = rs_to(RSCoords(t, p, np.eye(4)))
    np.testing.assert_allclose(r.L, np.diag(np.exp(2 * p)), atol=1e-12)
    np.testing.assert_allclose(rs_potentials(RSCoords(t, p, np.eye(4))), 1, atol=1e-15)


def test_solve_bplus_defining_relation(rng):
    for _ in range(20):
        t = Torus(random_angles(rng, 4, 0.3))
        lam = np.eye(4) + np.triu(ginibre(rng, 4), 1)
        b = solve_bplus(t, lam)
        np.testing.assert_allclose(np.diag(b), 1)
        assert not np.tril(b, -1).any()
        np.testing.assert_allclose(b @ lam, dag(t.Q) @ b @ t.Q, atol=1e-10 * np.abs(b).max())


def test_linearized_bplus_matches_fd(rng):
    t = Torus(random_angles(rng, 3, 0.3))
    lam = np.eye(3) + np.triu(ginibre(rng, 3), 1)
    dlam = np.triu(ginibre(rng, 3), 1)
    b = solve_bplus(t, lam)
    h = 1e-5
    fd = (solve_bplus(t, lam + h * dlam) - solve_bplus(t, lam - h * dlam)) / (2 * h)
    np.testing.assert_allclose(linearized_bplus(t, lam, -b @ dlam), fd, atol=1e-8)


def test_rs_requires_positive_L(rng):
    with pytest.raises(ValueError):
        rs_from(ReducedPoint(Torus([0.0, 2.0]), np.diag([1.0, -1.0])))


def test_to_reduced_dispatch(rng):
    r = reduced_point(rng, 3, positive=True)
    np.testing.assert_allclose(to_reduced(rs_from(r)).L, r.L, atol=1e-10)
    np.testing.assert_allclose(to_reduced(sutherland_from(r)).L, r.L, atol=1e-10)
    with pytest.raises(TypeError):
        to_reduced(r)
