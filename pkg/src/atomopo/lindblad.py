"""Lindblad generator, steady states and time evolution of density matrices.

Density matrices are vectorised by column stacking (Fortran order), so that
``vec(A @ X @ B) = kron(B.T, A) @ vec(X)``.  Every consumer of the
superoperator shares this convention through :func:`vec` and :func:`unvec`.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp

from .errors import DimensionMismatch, IntegrationFailure, NonUniqueSteadyState, NumericalError
from .hilbert import StateSpace, annihilation, enumerate_basis, hamiltonian, sigma_minus
from .params import SystemParams

__all__ = [
    "vec",
    "unvec",
    "spre",
    "spost",
    "dissipator",
    "build_liouvillian",
    "steady_state",
    "expectation",
    "evolve",
    "evolve_many",
    "parity_sector",
    "check_density_matrix",
]

STEADY_STATE_RESIDUAL = 1e-10


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.shape[-1])))
    if d * d != v.shape[-1]:
        raise DimensionMismatch(f"vector of length {v.shape[-1]} is not a vectorised square matrix")
    return np.asarray(v).reshape(v.shape[:-1] + (d, d), order="F")


def spre(op: np.ndarray) -> np.ndarray:
    """Superoperator of left multiplication, X -> op @ X."""
    return np.kron(np.eye(op.shape[0]), op)


def spost(op: np.ndarray) -> np.ndarray:
    """Superoperator of right multiplication, X -> X @ op."""
    return np.kron(op.T, np.eye(op.shape[0]))


def dissipator(c: np.ndarray) -> np.ndarray:
    """2 c X c^dag - c^dag c X - X c^dag c."""
    cdc = c.conj().T @ c
    return 2.0 * np.kron(c.conj(), c) - spre(cdc) - spost(cdc)


def build_liouvillian(params: SystemParams, space: StateSpace | None = None) -> np.ndarray:
    """Full generator ``L`` with ``d vec(rho)/dt = L @ vec(rho)``.

    ``L rho = -i[H, rho] + (gamma/2) D[sigma_-] rho + kappa D[a] rho`` with
    ``D[c] rho = 2 c rho c^dag - c^dag c rho - rho c^dag c``.
    """
    if space is None:
        space = enumerate_basis(params.n_max)
    H = hamiltonian(params, space)
    L = -1j * (spre(H) - spost(H))
    L += 0.5 * params.gamma * dissipator(sigma_minus(space))
    L += params.kappa * dissipator(annihilation(space))
    return L


def _null_tol(s: np.ndarray, n: int) -> float:
    return s[0] * n * np.finfo(float).eps * 10


def _null_space_dim(L: np.ndarray) -> int:
    s = sla.svdvals(L)
    return int(np.sum(s <= _null_tol(s, L.shape[0])))


def _projected_steady_state(L: np.ndarray, rho0: np.ndarray) -> np.ndarray:
    # long-time limit of exp(Lt) rho0: spectral projector onto the null space
    U, s, Vh = sla.svd(L)
    k = int(np.sum(s <= _null_tol(s, L.shape[0])))
    R = Vh[-k:].conj().T
    W = U[:, -k:]
    coeff = np.linalg.solve(W.conj().T @ R, W.conj().T @ vec(rho0))
    return unvec(R @ coeff)


def steady_state(liouvillian: np.ndarray, check_unique: bool = True,
                 rho0: np.ndarray | None = None) -> np.ndarray:
    """Trace-one null vector of the generator.

    The equation for the first diagonal element is replaced by the trace
    condition and the resulting square system is solved by LU with one round
    of iterative refinement.  When the null space is degenerate the result is
    only defined relative to an initial state: pass ``rho0`` to get the state
    it relaxes to, otherwise :class:`NonUniqueSteadyState` is raised.
    """
    n = liouvillian.shape[0]
    d = int(round(np.sqrt(n)))
    if check_unique and _null_space_dim(liouvillian) > 1:
        if rho0 is None:
            raise NonUniqueSteadyState("generator has a degenerate null space (disconnected blocks)")
        rho = _projected_steady_state(liouvillian, rho0)
        rho = 0.5 * (rho + rho.conj().T)
        return rho / np.trace(rho).real
    A = np.array(liouvillian, dtype=complex)
    A[0, :] = vec(np.eye(d))
    b = np.zeros(n, dtype=complex)
    b[0] = 1.0
    lu = sla.lu_factor(A)
    x = sla.lu_solve(lu, b)
    x += sla.lu_solve(lu, b - A @ x)
    rho = unvec(x)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    residual = np.max(np.abs(liouvillian @ vec(rho)))
    if residual > STEADY_STATE_RESIDUAL:
        raise NumericalError(f"steady-state residual {residual:.2e} exceeds {STEADY_STATE_RESIDUAL:g}")
    return rho


def expectation(rho: np.ndarray, op: np.ndarray) -> complex:
    if rho.shape != op.shape:
        raise DimensionMismatch(f"state {rho.shape} and operator {op.shape} differ")
    return complex(np.trace(op @ rho))


def evolve_many(rho0: np.ndarray, liouvillian: np.ndarray, times, rtol: float = 1e-10,
                atol: float = 1e-12) -> np.ndarray:
    """Density matrices at each of ``times`` (non-decreasing, starting at >= 0)."""
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-negative and sorted")
    v0 = vec(rho0).astype(complex)
    if v0.shape[0] != liouvillian.shape[0]:
        raise DimensionMismatch("initial state does not match the generator")
    out = np.empty((len(times), v0.shape[0]), dtype=complex)
    start = 0
    while start < len(times) and times[start] == 0.0:
        out[start] = v0
        start += 1
    if start < len(times):
        sol = solve_ivp(lambda t, y: liouvillian @ y, (0.0, times[-1]), v0, method="DOP853",
                        t_eval=times[start:], rtol=rtol, atol=atol)
        if sol.status < 0:
            raise IntegrationFailure(sol.message)
        out[start:] = sol.y.T
    return unvec(out)


def evolve(rho0: np.ndarray, liouvillian: np.ndarray, t: float, **kwargs) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return np.array(rho0, dtype=complex)
    return evolve_many(rho0, liouvillian, [t], **kwargs)[0]


def parity_sector(space: StateSpace, relative_parity: int) -> np.ndarray:
    """Vectorised indices of elements ``|i><j|`` with parity(i) xor parity(j) fixed.

    The generator never mixes the two relative-parity sectors: the drive changes
    the number of quanta by two, the coupling conserves it and both jumps lower
    bra and ket together.
    """
    p = space.parity
    d = space.dim
    return np.array([j * d + i for j in range(d) for i in range(d)
                     if (p[i] ^ p[j]) == relative_parity])


def check_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, trace-one and positive."""
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > 1e-12 + tol:
        raise ValueError(f"trace is {np.trace(rho)}")
    if np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) < -tol:
        raise ValueError("density matrix has a negative eigenvalue")
