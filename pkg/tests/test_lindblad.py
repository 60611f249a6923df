import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from atomopo.errors import DimensionMismatch, NonUniqueSteadyState
from atomopo.hilbert import annihilation, enumerate_basis, number_operator, sigma_minus
from atomopo.lindblad import (build_liouvillian, check_density_matrix, evolve, evolve_many,
                              expectation, parity_sector, spost, spre, steady_state, unvec, vec)
from atomopo.params import SystemParams

rates = st.tuples(st.floats(0.05, 30), st.floats(0.05, 30), st.floats(0.05, 3),
                  st.floats(1e-4, 1e-2))


def test_vectorisation_convention():
    rng = np.random.default_rng(0)
    A, X, B = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(3))
    assert np.allclose(spre(A) @ vec(X), vec(A @ X))
    assert np.allclose(spost(B) @ vec(X), vec(X @ B))
    assert np.allclose(unvec(vec(X)), X)


def test_unvec_rejects_non_square():
    with pytest.raises(DimensionMismatch):
        unvec(np.zeros(7))


@given(rates)
def test_trace_preserving(r):
    g, kappa, gamma, F = r
    L = build_liouvillian(SystemParams(g=g, kappa=kappa, gamma=gamma, F=F))
    assert np.allclose(vec(np.eye(5)).conj() @ L, 0, atol=1e-12)


@given(rates)
def test_steady_state_is_density_matrix(r):
    g, kappa, gamma, F = r
    p = SystemParams(g=g, kappa=kappa, gamma=gamma, F=F)
    L = build_liouvillian(p)
    rho = steady_state(L)
    check_density_matrix(rho)
    assert np.max(np.abs(L @ vec(rho))) < 1e-10
    space = enumerate_basis(2)
    assert abs(expectation(rho, annihilation(space))) < 1e-12
    assert abs(expectation(rho, sigma_minus(space))) < 1e-12


def test_no_drive_gives_vacuum(bad_cavity):
    rho = steady_state(build_liouvillian(bad_cavity.replace(F=0.0)))
    expected = np.zeros((5, 5))
    expected[0, 0] = 1
    assert np.allclose(rho, expected, atol=1e-14)


def test_truncation_convergence():
    p = SystemParams(g=1.0, kappa=10.0, F=1e-3)
    n2 = expectation(steady_state(build_liouvillian(p)), number_operator(enumerate_basis(2)))
    p3 = p.replace(n_max=3)
    n3 = expectation(steady_state(build_liouvillian(p3)), number_operator(enumerate_basis(3)))
    assert abs(n2 - n3) / abs(n3) < 1e-5


def test_degenerate_null_space():
    p = SystemParams(g=0.0, kappa=1.0, gamma=0.0, F=1e-3)
    L = build_liouvillian(p)
    with pytest.raises(NonUniqueSteadyState):
        steady_state(L)
    vac = np.zeros((5, 5))
    vac[0, 0] = 1
    rho = steady_state(L, rho0=vac)
    check_density_matrix(rho)
    assert np.allclose(rho, evolve(vac, L, 200.0), atol=1e-8)


def test_evolve_approaches_steady_state(bad_cavity):
    L = build_liouvillian(bad_cavity)
    vac = np.zeros((5, 5))
    vac[0, 0] = 1
    late = evolve(vac, L, 60.0)
    assert np.allclose(late, steady_state(L), atol=1e-12)


def test_evolve_many_starts_at_initial(bad_cavity):
    L = build_liouvillian(bad_cavity)
    vac = np.zeros((5, 5))
    vac[0, 0] = 1
    out = evolve_many(vac, L, [0.0, 0.1, 0.2])
    assert np.allclose(out[0], vac)
    for rho in out:
        check_density_matrix(rho, tol=1e-9)
    with pytest.raises(ValueError):
        evolve_many(vac, L, [0.2, 0.1])


@given(rates)
def test_parity_sectors_decouple(r):
    g, kappa, gamma, F = r
    space = enumerate_basis(2)
    L = build_liouvillian(SystemParams(g=g, kappa=kappa, gamma=gamma, F=F), space)
    odd, even = parity_sector(space, 1), parity_sector(space, 0)
    assert len(odd) + len(even) == 25
    assert np.all(L[np.ix_(odd, even)] == 0)
    assert np.all(L[np.ix_(even, odd)] == 0)


def test_expectation_dimension_check():
    with pytest.raises(DimensionMismatch):
        expectation(np.eye(5), np.eye(3))
