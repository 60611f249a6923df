"""Truncated atom + cavity-mode state space and operator matrices.

Kets are ``|atom, n>`` with ``atom`` in {g, e} and ``n`` cavity photons.  The
space keeps every ket whose total number of quanta (photons plus one for an
excited atom) is at most ``n_max``.  Ordering is ascending total quanta, ground
before excited, so the five kets for ``n_max = 2`` are::

    |g,0>, |g,1>, |e,0>, |g,2>, |e,1>

Operators are plain complex ``numpy`` arrays indexed ``[bra, ket]``.  Products
of truncated matrices do not always respect adjoint relations at the top shell
(``a @ sigma_plus != sigma_plus @ a`` there), so the Hamiltonian is assembled
as ``X - X^dagger`` to stay exactly Hermitian.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

__all__ = [
    "Atom",
    "BasisState",
    "StateSpace",
    "enumerate_basis",
    "annihilation",
    "creation",
    "sigma_minus",
    "sigma_plus",
    "number_operator",
    "excitation_operator",
    "identity",
    "hamiltonian",
]


class Atom(Enum):
    GROUND = "g"
    EXCITED = "e"


@dataclass(frozen=True, order=False)
class BasisState:
    atom: Atom
    photons: int

    @property
    def quanta(self) -> int:
        return self.photons + (1 if self.atom is Atom.EXCITED else 0)

    @property
    def parity(self) -> int:
        return self.quanta % 2

    def label(self) -> str:
        return f"|{self.atom.value},{self.photons}>"

    def __repr__(self) -> str:
        return self.label()


@dataclass(frozen=True)
class StateSpace:
    n_max: int
    states: tuple[BasisState, ...] = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    @cached_property
    def _lookup(self) -> dict[BasisState, int]:
        return {s: i for i, s in enumerate(self.states)}

    def index(self, atom: Atom | str, photons: int) -> int:
        """Position of ``|atom, photons>`` in the ordered basis."""
        atom = Atom(atom) if isinstance(atom, str) else atom
        try:
            return self._lookup[BasisState(atom, photons)]
        except KeyError:
            raise KeyError(f"|{atom.value},{photons}> is outside n_max={self.n_max}") from None

    def __contains__(self, state: BasisState) -> bool:
        return state in self._lookup

    def __iter__(self):
        return iter(self.states)

    @cached_property
    def quanta(self) -> np.ndarray:
        return np.array([s.quanta for s in self.states])

    @cached_property
    def parity(self) -> np.ndarray:
        return self.quanta % 2

    def top_shell(self) -> np.ndarray:
        """Boolean mask of kets in the highest total-quanta shell."""
        return self.quanta == self.n_max


def enumerate_basis(n_max: int) -> StateSpace:
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    states = []
    for q in range(n_max + 1):
        states.append(BasisState(Atom.GROUND, q))
        if q >= 1:
            states.append(BasisState(Atom.EXCITED, q - 1))
    return StateSpace(n_max, tuple(states))


def annihilation(space: StateSpace) -> np.ndarray:
    a = np.zeros((space.dim, space.dim), dtype=complex)
    for j, s in enumerate(space.states):
        if s.photons > 0:
            a[space.index(s.atom, s.photons - 1), j] = np.sqrt(s.photons)
    return a


def creation(space: StateSpace) -> np.ndarray:
    return annihilation(space).conj().T


def sigma_minus(space: StateSpace) -> np.ndarray:
    sm = np.zeros((space.dim, space.dim), dtype=complex)
    for j, s in enumerate(space.states):
        if s.atom is Atom.EXCITED:
            sm[space.index(Atom.GROUND, s.photons), j] = 1.0
    return sm


def sigma_plus(space: StateSpace) -> np.ndarray:
    return sigma_minus(space).conj().T


def number_operator(space: StateSpace) -> np.ndarray:
    return np.diag([s.photons for s in space.states]).astype(complex)


def excitation_operator(space: StateSpace) -> np.ndarray:
    """Projector onto excited-atom kets (sigma_plus @ sigma_minus)."""
    return np.diag([1.0 if s.atom is Atom.EXCITED else 0.0 for s in space.states]).astype(complex)


def identity(space: StateSpace) -> np.ndarray:
    return np.eye(space.dim, dtype=complex)


def hamiltonian(params, space: StateSpace) -> np.ndarray:
    """Resonant rotating-frame Hamiltonian in units of hbar.

    ``H = iF(a^dag^2 - a^2) + ig(a^dag sigma_- - a sigma_+)``; the free
    ``omega (a^dag a + sigma_z / 2)`` term vanishes in the frame rotating at
    the common atom/cavity frequency.
    """
    a = annihilation(space)
    ad = a.conj().T
    pair = ad @ ad
    jc = ad @ sigma_minus(space)
    return 1j * params.F * (pair - pair.conj().T) + 1j * params.g * (jc - jc.conj().T)
