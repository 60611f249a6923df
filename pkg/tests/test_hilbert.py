import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from atomopo.hilbert import (Atom, BasisState, annihilation, creation, enumerate_basis,
                             excitation_operator, hamiltonian, identity, number_operator,
                             sigma_minus, sigma_plus)
from atomopo.params import SystemParams


def test_two_quanta_basis_order():
    space = enumerate_basis(2)
    assert [s.label() for s in space.states] == ["|g,0>", "|g,1>", "|e,0>", "|g,2>", "|e,1>"]
    assert space.dim == 5


def test_vacuum_only_and_three_quanta():
    assert [s.label() for s in enumerate_basis(0).states] == ["|g,0>"]
    space = enumerate_basis(3)
    assert space.dim == 7
    assert max(s.photons for s in space.states) == 3


def test_negative_truncation_rejected():
    with pytest.raises(ValueError):
        enumerate_basis(-1)


@given(st.integers(min_value=0, max_value=8))
def test_basis_complete_and_ordered(n_max):
    space = enumerate_basis(n_max)
    expected = {BasisState(Atom.GROUND, n) for n in range(n_max + 1)}
    expected |= {BasisState(Atom.EXCITED, n) for n in range(n_max)}
    assert set(space.states) == expected
    assert len(space.states) == len(expected)
    keys = [(s.quanta, s.atom is Atom.EXCITED, s.photons) for s in space.states]
    assert keys == sorted(keys)
    if n_max >= 1:
        assert space.dim == 2 * n_max + 1


def test_annihilation_elements():
    space = enumerate_basis(2)
    a = annihilation(space)
    assert a[space.index("g", 1), space.index("g", 2)] == pytest.approx(np.sqrt(2))
    assert a[space.index("e", 0), space.index("e", 1)] == pytest.approx(1.0)
    assert np.count_nonzero(a) == 3


def test_sigma_minus_elements():
    space = enumerate_basis(2)
    sm = sigma_minus(space)
    assert sm[space.index("g", 0), space.index("e", 0)] == 1
    assert sm[space.index("g", 1), space.index("e", 1)] == 1
    assert np.allclose(sigma_plus(space), sm.T)


@given(st.integers(min_value=1, max_value=8))
def test_lowering_operators_lower_total_quanta(n_max):
    space = enumerate_basis(n_max)
    q = space.quanta
    for op in (annihilation(space), sigma_minus(space)):
        rows, cols = np.nonzero(op)
        assert np.all(q[rows] == q[cols] - 1)


@given(st.integers(min_value=1, max_value=8))
def test_commutator_is_identity_below_top_shell(n_max):
    space = enumerate_basis(n_max)
    a, ad = annihilation(space), creation(space)
    comm = a @ ad - ad @ a
    inner = space.quanta < n_max
    assert np.allclose(comm[np.ix_(inner, inner)], np.eye(inner.sum()))


def test_number_and_excitation_diagonal():
    space = enumerate_basis(3)
    assert np.allclose(np.diag(number_operator(space)), [s.photons for s in space.states])
    assert np.allclose(np.diag(excitation_operator(space)),
                       [s.atom is Atom.EXCITED for s in space.states])
    assert np.allclose(identity(space), np.eye(space.dim))


@given(st.floats(0, 50), st.floats(0.01, 100), st.floats(0, 2), st.integers(1, 6))
def test_hamiltonian_hermitian_and_quanta_parity(g, kappa, F, n_max):
    space = enumerate_basis(n_max)
    H = hamiltonian(SystemParams(g=g, kappa=kappa, F=F, n_max=n_max), space)
    assert np.allclose(H, H.conj().T)
    rows, cols = np.nonzero(np.abs(H) > 0)
    assert np.all((space.parity[rows] ^ space.parity[cols]) == 0)
