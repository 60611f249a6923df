"""Lowest-order-in-F steady state and the F-scaling hierarchy.

The reduced model keeps the ground-state population at unity, the two
coherences driven directly by the pair source (order F) and the populations and
coherences they feed (order F^2).  Its equations are cut out of the machine
built generator at ``n_max = 2`` by splitting ``L = L0 + F L1``: an order-k
element keeps the ``L0`` couplings among order-k elements and the ``L1``
couplings from order-(k-1) elements.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from .errors import InsufficientGrid, SingularSystem
from .hilbert import Atom, StateSpace, enumerate_basis
from .lindblad import build_liouvillian, steady_state
from .params import SystemParams

__all__ = [
    "ELEMENTS",
    "EXPECTED_ORDER",
    "WeakFieldState",
    "ScalingReport",
    "weakfield_steady_state",
    "reduced_rhs",
    "elements_from_density_matrix",
    "verify_scalings",
]

# name -> (bra ket, ket ket) as (atom, photons); rho_{0,-;2,-} is <g,0|rho|g,2>.
ELEMENTS: dict[str, tuple[tuple[str, int], tuple[str, int]]] = {
    "p00": (("g", 0), ("g", 0)),
    "pe0": (("e", 0), ("e", 0)),
    "p1": (("g", 1), ("g", 1)),
    "pe1": (("e", 1), ("e", 1)),
    "p2": (("g", 2), ("g", 2)),
    "c01p": (("g", 0), ("e", 1)),
    "c02": (("g", 0), ("g", 2)),
    "ce1": (("e", 0), ("g", 1)),
    "c12": (("e", 1), ("g", 2)),
}

EXPECTED_ORDER = {"pe0": 2, "p1": 2, "pe1": 2, "p2": 2, "c01p": 1, "c02": 1, "ce1": 2, "c12": 2}

_ORDER1 = ["c02", "c01p"]
_ORDER2 = ["pe0", "p1", "pe1", "p2", "ce1", "c12"]


@dataclass(frozen=True)
class WeakFieldState:
    p00: complex
    pe0: complex
    p1: complex
    pe1: complex
    p2: complex
    c01p: complex
    c02: complex
    ce1: complex
    c12: complex

    def as_dict(self) -> dict[str, complex]:
        return asdict(self)

    @property
    def mean_photon_number(self) -> float:
        return float(np.real(self.p1 + self.pe1 + 2 * self.p2))

    @property
    def mean_field(self) -> complex:
        # <a> = rho_{0,-;1,-} + sqrt(2) rho_{1,-;2,-}; neither element is driven.
        return 0j


def _flat(space: StateSpace, bra, ket) -> int:
    d = space.dim
    return space.index(Atom(ket[0]), ket[1]) * d + space.index(Atom(bra[0]), bra[1])


def _index_sets(space: StateSpace):
    """Vectorised indices of the order-1 and order-2 element sets, conjugates included."""
    def with_conj(names):
        idx = []
        for n in names:
            bra, ket = ELEMENTS[n]
            idx.append(_flat(space, bra, ket))
            if bra != ket:
                idx.append(_flat(space, ket, bra))
        return list(dict.fromkeys(idx))

    return _flat(space, ("g", 0), ("g", 0)), with_conj(_ORDER1), with_conj(_ORDER2)


def _split_generator(params: SystemParams):
    space = enumerate_basis(2)
    L0 = build_liouvillian(params.replace(F=0.0, n_max=2), space)
    L1 = build_liouvillian(params.replace(F=1.0, n_max=2), space) - L0
    return space, L0, L1


def _solve(A: np.ndarray, b: np.ndarray, what: str) -> np.ndarray:
    if np.linalg.cond(A) < 1e12:
        return np.linalg.solve(A, b)
    # undamped but undriven elements (e.g. the excited population at g = gamma = 0)
    x = np.linalg.lstsq(A, b, rcond=1e-12)[0]
    if np.max(np.abs(A @ x - b)) > 1e-12 * max(np.max(np.abs(b)), 1e-300):
        raise SingularSystem(f"{what} block of the reduced model is singular")
    return x


def weakfield_steady_state(params: SystemParams) -> WeakFieldState:
    """Steady state of the reduced (lowest order in F) model."""
    if params.F <= 0:
        raise ValueError("weak-field reduction needs F > 0")
    space, L0, L1 = _split_generator(params)
    i0, o1, o2 = _index_sets(space)
    F = params.F
    x = np.zeros(L0.shape[0], dtype=complex)
    x[i0] = 1.0
    x[o1] = _solve(L0[np.ix_(o1, o1)], -F * L1[o1, i0], "coherence")
    x[o2] = _solve(L0[np.ix_(o2, o2)], -F * L1[np.ix_(o2, o1)] @ x[o1], "population")
    return WeakFieldState(**{n: complex(x[_flat(space, *ELEMENTS[n])]) for n in ELEMENTS})


def reduced_rhs(params: SystemParams, state: WeakFieldState) -> dict[str, complex]:
    """Time derivatives of the retained elements under the reduced model."""
    space, L0, L1 = _split_generator(params)
    i0, o1, o2 = _index_sets(space)
    x = np.zeros(L0.shape[0], dtype=complex)
    for n, value in state.as_dict().items():
        bra, ket = ELEMENTS[n]
        x[_flat(space, bra, ket)] = value
        if bra != ket:
            x[_flat(space, ket, bra)] = np.conj(value)
    dx = np.zeros_like(x)
    dx[o1] = L0[np.ix_(o1, o1)] @ x[o1] + params.F * L1[o1, i0] * x[i0]
    dx[o2] = L0[np.ix_(o2, o2)] @ x[o2] + params.F * L1[np.ix_(o2, o1)] @ x[o1]
    return {n: complex(dx[_flat(space, *ELEMENTS[n])]) for n in ELEMENTS}


def elements_from_density_matrix(rho: np.ndarray, space: StateSpace) -> WeakFieldState:
    def el(bra, ket):
        return complex(rho[space.index(Atom(bra[0]), bra[1]), space.index(Atom(ket[0]), ket[1])])
    return WeakFieldState(**{n: el(*ELEMENTS[n]) for n in ELEMENTS})


@dataclass
class ScalingReport:
    params: dict
    f_grid: list[float]
    fitted: dict[str, float | None]
    expected: dict[str, int]
    tolerance: float = 0.05
    flagged: list[str] = field(default_factory=list)

    def passed(self, name: str) -> bool | None:
        value = self.fitted[name]
        if value is None:
            return None
        return abs(value - self.expected[name]) <= self.tolerance

    @property
    def all_passed(self) -> bool:
        return all(self.passed(n) is not False for n in self.fitted)

    def to_json(self) -> str:
        body = asdict(self)
        body["passed"] = {n: self.passed(n) for n in self.fitted}
        body["all_passed"] = self.all_passed
        return json.dumps(body, indent=2, sort_keys=True)


def _reachable_from(L: np.ndarray, start: int) -> np.ndarray:
    """Elements the generator can ever feed starting from element ``start``."""
    order = breadth_first_order(csr_matrix(np.abs(L.T) > 0), start, directed=True,
                                return_predecessors=False)
    mask = np.zeros(L.shape[0], dtype=bool)
    mask[order] = True
    return mask


def verify_scalings(params: SystemParams, f_grid, tolerance: float = 0.05) -> ScalingReport:
    """Fit log|element| against log F over ``f_grid`` using the full solver.

    Elements that vanish identically for these rates (for example the excited
    population when g = gamma = 0) get ``None`` and are listed in ``flagged``.
    """
    f_grid = np.sort(np.asarray(f_grid, dtype=float))
    if len(f_grid) < 3 or np.any(f_grid <= 0) or f_grid[-1] / f_grid[0] < 10 * (1 - 1e-12):
        raise InsufficientGrid("need at least three positive drive values spanning a decade")
    space = enumerate_basis(params.n_max)
    vacuum = np.zeros((space.dim, space.dim), dtype=complex)
    vacuum[0, 0] = 1.0
    reachable = _reachable_from(build_liouvillian(params.replace(F=float(f_grid[0])), space), 0)
    values = {n: [] for n in EXPECTED_ORDER}
    for F in f_grid:
        p = params.replace(F=float(F))
        rho = steady_state(build_liouvillian(p, space), rho0=vacuum)
        el = elements_from_density_matrix(rho, space).as_dict()
        for n in values:
            values[n].append(abs(el[n]))
    fitted, flagged = {}, []
    for n, v in values.items():
        v = np.asarray(v)
        if not reachable[_flat(space, *ELEMENTS[n])] or np.any(v == 0):
            fitted[n] = None
            flagged.append(n)
            continue
        slope = np.polyfit(np.log(f_grid), np.log(v), 1)[0]
        fitted[n] = float(slope)
    return ScalingReport(params=params.as_dict(), f_grid=[float(f) for f in f_grid], fitted=fitted,
                         expected=dict(EXPECTED_ORDER), tolerance=tolerance, flagged=flagged)
