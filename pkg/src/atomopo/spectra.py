"""Incoherent and squeezing spectra from the quantum regression theorem.

Two-time correlations are written as ``tr[B exp(L tau) X0]`` with ``X0`` one of
``rho A`` or ``A rho``.  All four correlations used here (normal and anomalous,
cavity and atom) involve operators that change the number of quanta by one, so
``X0`` lives in the odd relative-parity sector of the generator, where ``L`` is
invertible.  Fourier transforms are taken with the ``exp(+i omega tau)``
convention::

    R(omega) = int_0^inf exp(i omega tau) G(tau) dtau = readout . (-M - i omega)^-1 . initial

and the one-sided cosine transform is ``(R(omega) + R(-omega)) / 2``.

A second, independent route uses the eight-element reduced regression vector
(``|0,-> = |g,0>``, ``|1,+> = |e,1>`` and so on).  Its matrix can be the
hand-reduced closed form (``closed_form``), the same with one misplaced drive
entry moved (``corrected``), or cut directly out of the ``n_max = 2``
generator (``derived``).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.optimize import linprog

from .errors import ChannelUnavailable, InsufficientGrid, NumericalError, SingularResolvent
from .hilbert import (Atom, StateSpace, annihilation, creation, enumerate_basis, sigma_minus,
                      sigma_plus)
from .lindblad import build_liouvillian, parity_sector, steady_state, vec
from .params import SystemParams

__all__ = [
    "RegressionSystem",
    "SpectrumTable",
    "IdentityReport",
    "REDUCED_ELEMENTS",
    "regression_matrix_closed_form",
    "regression_matrix_reduced",
    "closed_form_discrepancies",
    "correlation_system",
    "regression_system",
    "reduced_regression_system",
    "resolvent_values",
    "resolvent_spectrum",
    "cosine_transform",
    "default_omega_grid",
    "check_grid",
    "transmitted_spectrum",
    "fluorescent_spectrum",
    "reduced_spectrum",
    "squeezing_identity_check",
]

Channel = Literal["A", "B", "C", "D"]

# (bra, ket) labels of the reduced regression vector, "n-" = |g,n>, "n+" = |e,n>
REDUCED_ELEMENTS = [("0-", "0+"), ("0-", "1-"), ("1-", "0-"), ("1+", "0+"),
                ("2-", "1-"), ("0+", "0-"), ("1+", "1-"), ("2-", "0+")]

_STABILITY_TOL = 1e-10


@dataclass(frozen=True)
class RegressionSystem:
    """Linear system ``x' = evolution @ x`` whose contraction with ``readout`` is a correlation."""

    evolution: np.ndarray
    initial: np.ndarray
    readout: np.ndarray
    label: str = ""

    @property
    def tau0_value(self) -> complex:
        return complex(self.readout @ self.initial)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.evolution)

    def check_stable(self) -> None:
        lam = self.eigenvalues()
        if np.max(lam.real) > _STABILITY_TOL:
            raise NumericalError(f"{self.label}: evolution has a growing mode (Re = {lam.real.max():.3g})")


def _ops(space: StateSpace, channel: str) -> tuple[np.ndarray, np.ndarray]:
    """(operator at time 0, operator at time tau) for ``<first(0) second(tau)>``."""
    if channel == "A":
        return creation(space), annihilation(space)
    if channel == "B":
        return creation(space), creation(space)
    if channel == "C":
        return sigma_plus(space), sigma_minus(space)
    if channel == "D":
        return sigma_plus(space), sigma_plus(space)
    raise ValueError(f"unknown channel {channel!r}")


def correlation_system(liouvillian: np.ndarray, space: StateSpace, rho: np.ndarray,
                       first: np.ndarray, second: np.ndarray, reverse: bool = False,
                       label: str = "") -> RegressionSystem:
    """Regression system for ``<first(0) second(tau)>`` (or ``<first(tau) second(0)>`` if reverse)."""
    if reverse:
        x0, obs = second @ rho, first
    else:
        x0, obs = rho @ first, second
    x0 = vec(x0)
    # tr(obs X) = sum_ij obs_ij X_ji = vec(obs.T) . vec(X)
    r = vec(obs.T)
    sector = parity_sector(space, 1)
    outside = np.delete(np.arange(x0.size), sector)
    if outside.size and np.max(np.abs(x0[outside])) > 1e-14 * max(np.max(np.abs(x0)), 1e-300):
        raise NumericalError("initial operator is not confined to the odd parity sector")
    return RegressionSystem(liouvillian[np.ix_(sector, sector)], x0[sector], r[sector], label)


def regression_system(params: SystemParams, channel: Channel, rho_ss: np.ndarray,
                      reverse: bool = False, liouvillian: np.ndarray | None = None
                      ) -> RegressionSystem:
    """Regression system of one correlation channel on the full truncated space.

    A: <a^dag(0) a(tau)>, B: <a^dag(0) a^dag(tau)>, C: <sigma_+(0) sigma_-(tau)>,
    D: <sigma_+(0) sigma_+(tau)>.  With ``reverse`` the time arguments swap.
    """
    if params.n_max < 2:
        raise ChannelUnavailable("correlation channels need n_max >= 2")
    space = enumerate_basis(params.n_max)
    if rho_ss.shape != (space.dim, space.dim):
        raise ValueError("steady state does not match params.n_max")
    L = build_liouvillian(params, space) if liouvillian is None else liouvillian
    first, second = _ops(space, channel)
    return correlation_system(L, space, rho_ss, first, second, reverse,
                              label=channel + ("'" if reverse else ""))


# ----------------------------------------------------------------- reduced path

def _label_state(label: str) -> tuple[Atom, int]:
    return (Atom.EXCITED if label[1] == "+" else Atom.GROUND), int(label[0])


def _reduced_indices(space: StateSpace) -> list[int]:
    d = space.dim
    return [space.index(*_label_state(k)) * d + space.index(*_label_state(b)) for b, k in REDUCED_ELEMENTS]


def regression_matrix_closed_form(params: SystemParams, corrected: bool = False) -> np.ndarray:
    """Eight-by-eight reduced regression matrix in hand-reduced closed form.

    With ``corrected`` the drive entry in row 3 (the ``<1,-|A|0,->``
    equation) is moved to row 5 (``<2,-|A|1,->``), where the generator puts it.
    """
    g, k, gm, F = params.g, params.kappa, params.gamma, params.F
    s = np.sqrt(2.0)
    M = np.array([
        [-gm / 2, -g, 0, 0, 0, 0, 0, 0],
        [g, -k, 0, 0, 0, 0, 0, 0],
        [0, s * F, -k, gm, 2 * s * k, g, 0, 0],
        [0, 0, 0, -(gm + k), 0, 0, -g, -s * g],
        [0, 0, 0, 0, -3 * k, 0, s * g, g],
        [0, 0, -g, 0, 0, -gm / 2, 2 * k, 0],
        [0, 0, 0, g, -s * g, 0, -(gm / 2 + 2 * k), 0],
        [s * F, 0, 0, s * g, -g, 0, 0, -(gm / 2 + 2 * k)],
    ], dtype=complex)
    if corrected:
        M[2, 1] = 0.0
        M[4, 1] = s * F
    return M


def regression_matrix_reduced(params: SystemParams) -> np.ndarray:
    """The generator at ``n_max = 2`` restricted to the eight reduced elements."""
    space = enumerate_basis(2)
    idx = _reduced_indices(space)
    return build_liouvillian(params.replace(n_max=2), space)[np.ix_(idx, idx)]


def closed_form_discrepancies(params: SystemParams, corrected: bool = False, atol: float = 1e-12
                               ) -> list[tuple[int, int, complex, complex]]:
    """Entries (1-based row, column, closed-form, derived) where the two matrices differ."""
    P = regression_matrix_closed_form(params, corrected)
    D = regression_matrix_reduced(params)
    rows, cols = np.nonzero(np.abs(P - D) > atol)
    return [(int(i) + 1, int(j) + 1, complex(P[i, j]), complex(D[i, j])) for i, j in zip(rows, cols)]


def reduced_regression_system(params: SystemParams, channel: Literal["A", "C"],
                              rho_ss: np.ndarray | None = None,
                              matrix: Literal["closed_form", "corrected", "derived"] = "corrected",
                              matrix_hook: Callable[[np.ndarray], np.ndarray] | None = None
                              ) -> RegressionSystem:
    """Eight-element regression system for the normally ordered channels.

    The initial vector holds ``<i| rho_ss op^dag |j>`` on the reduced elements and
    the readout is ``tr(op X)`` restricted to them.  ``matrix_hook`` may replace
    the matrix (used for fault injection in validation).
    """
    if channel not in ("A", "C"):
        raise ChannelUnavailable("the reduced vector only carries the normally ordered channels")
    p2 = params.replace(n_max=2)
    space = enumerate_basis(2)
    if rho_ss is None:
        rho_ss = steady_state(build_liouvillian(p2, space))
    idx = _reduced_indices(space)
    first, second = _ops(space, channel)
    x0 = vec(rho_ss @ first)[idx]
    r = vec(second.T)[idx]
    if matrix == "derived":
        M = regression_matrix_reduced(p2)
    else:
        M = regression_matrix_closed_form(p2, corrected=(matrix == "corrected"))
    if matrix_hook is not None:
        M = matrix_hook(np.array(M))
    return RegressionSystem(M, x0, r, label=f"{channel}/{matrix}")


# ------------------------------------------------------------------- transforms

def _check_modes(system: RegressionSystem, omega: np.ndarray) -> np.ndarray:
    lam = np.linalg.eigvals(system.evolution)
    if np.max(lam.real) > _STABILITY_TOL:
        raise NumericalError(f"{system.label}: evolution has a growing mode (Re = {lam.real.max():.3g})")
    scale = max(np.max(np.abs(lam)), 1.0)
    gap = np.min(np.abs(lam[None, :] + 1j * omega[:, None])) if omega.size else np.inf
    if gap < 1e-13 * scale:
        raise SingularResolvent(f"{system.label}: undamped mode on the frequency grid")
    return lam


def resolvent_values(system: RegressionSystem, omega,
                     method: Literal["solve", "eig"] = "solve", chunk: int = 2048) -> np.ndarray:
    """Complex one-sided transform ``R(omega)`` at every grid point.

    ``solve`` (default) LU-factorises ``-M - i omega`` at each frequency, in
    batches.  Partial pivoting keeps the structural zeros of the sparse
    evolution intact, so results stay accurate relative to their own size even
    though the weak-drive correlations are O(F^2) sums of O(F) pieces.
    ``eig`` reuses one eigendecomposition across the grid; it is faster but
    loses about eps/F in relative accuracy and serves as the cross-check.
    """
    omega = np.asarray(omega, dtype=float)
    M = np.asarray(system.evolution, dtype=complex)
    lam = _check_modes(system, omega)
    if method == "eig":
        lam, V = np.linalg.eig(M)
        coeff = np.linalg.solve(V, system.initial)
        weights = system.readout @ V
        return (weights[None, :] * coeff[None, :] / (-lam[None, :] - 1j * omega[:, None])).sum(axis=1)
    if method == "solve":
        n = M.shape[0]
        step = max(1, chunk * 144 // max(n * n, 1))
        out = np.empty(omega.size, dtype=complex)
        eye = np.eye(n)
        for i in range(0, omega.size, step):
            w = omega[i:i + step]
            A = -M[None, :, :] - 1j * w[:, None, None] * eye[None, :, :]
            rhs = np.broadcast_to(system.initial, (w.size, n))[..., None]
            out[i:i + step] = np.linalg.solve(A, rhs)[..., 0] @ system.readout
        return out
    raise ValueError(f"unknown method {method!r}")


def resolvent_spectrum(system: RegressionSystem, omega,
                       method: Literal["solve", "eig"] = "solve") -> np.ndarray:
    """``2 Re int_0^inf exp(i omega tau) G(tau) dtau``."""
    return 2.0 * resolvent_values(system, omega, method).real


def cosine_transform(system: RegressionSystem, omega,
                     method: Literal["solve", "eig"] = "solve") -> np.ndarray:
    """Complex ``int_0^inf cos(omega tau) G(tau) dtau`` as a half-sum of resolvents at +-omega."""
    omega = np.asarray(omega, dtype=float)
    both = resolvent_values(system, np.concatenate([omega, -omega]), method)
    return 0.5 * (both[:omega.size] + both[omega.size:])


# ---------------------------------------------------------------------- tables

@dataclass
class SpectrumTable:
    omega: np.ndarray
    incoherent: np.ndarray
    squeeze_0: np.ndarray
    squeeze_90: np.ndarray
    channel: Literal["transmitted", "fluorescent"]
    params: SystemParams | None = field(default=None, repr=False)

    HEADER = ("omega", "incoherent", "squeeze_0", "squeeze_90", "incoherent_normalized")

    @property
    def incoherent_normalized(self) -> np.ndarray:
        peak = np.max(np.abs(self.incoherent))
        return self.incoherent / peak if peak > 0 else np.zeros_like(self.incoherent)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.HEADER)
            cols = (self.omega, self.incoherent, self.squeeze_0, self.squeeze_90,
                    self.incoherent_normalized)
            for row in zip(*cols):
                w.writerow([f"{v:.17g}" for v in row])

    @classmethod
    def from_csv(cls, path, channel="transmitted") -> "SpectrumTable":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3], channel)


def _grid_limit(params: SystemParams) -> float:
    rates = [r for r in (params.kappa, params.gamma) if r > 0]
    return min(rates) / 20.0


def default_omega_grid(params: SystemParams, omega_max: float | None = None,
                       points: int | None = None) -> np.ndarray:
    """Uniform grid on [-omega_max, omega_max], omega_max = 4 max(g, kappa, gamma).

    At least 4001 points, refined when needed so the spacing stays below
    min(kappa, gamma) / 20; the point count is odd so omega = 0 is on the grid.
    """
    if omega_max is None:
        omega_max = 4.0 * max(params.g, params.kappa, params.gamma)
    if points is None:
        points = max(4001, int(np.ceil(2 * omega_max / _grid_limit(params))) + 1)
        points += 1 - points % 2
    return np.linspace(-omega_max, omega_max, points)


def check_grid(omega: np.ndarray, params: SystemParams) -> None:
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 1 or omega.size < 3 or np.any(np.diff(omega) <= 0):
        raise InsufficientGrid("frequency grid must be increasing with at least three points")
    if np.max(np.diff(omega)) > _grid_limit(params) * (1 + 1e-9):
        raise InsufficientGrid(
            f"grid spacing {np.max(np.diff(omega)):.3g} is coarser than min(kappa, gamma)/20 = "
            f"{_grid_limit(params):.3g}")


def _spectrum_table(params: SystemParams, omega, normal: str, anomalous: str, kind: str,
                    check: bool) -> SpectrumTable:
    if params.n_max < 2:
        raise ChannelUnavailable("spectra need n_max >= 2")
    omega = default_omega_grid(params) if omega is None else np.asarray(omega, dtype=float)
    if check:
        check_grid(omega, params)
    space = enumerate_basis(params.n_max)
    L = build_liouvillian(params, space)
    rho = steady_state(L)
    both = np.concatenate([omega, -omega])
    n = omega.size
    half = {}
    forward = None
    for ch in (normal, anomalous):
        for rev in (False, True):
            s = regression_system(params, ch, rho, reverse=rev, liouvillian=L)
            vals = resolvent_values(s, both)
            if (ch, rev) == (normal, False):
                forward = vals[:n]
            half[ch, rev] = 0.5 * (vals[:n] + vals[n:])
    incoherent = 2.0 * forward.real
    # integral over all tau of cos(omega tau) <X^dag(tau) X(0)>: tau < 0 is the forward ordering
    normal_part = (half[normal, True] + half[normal, False]).real
    anomalous_part = half[anomalous, True] + half[anomalous, False]
    squeeze_0 = normal_part + anomalous_part.real
    squeeze_90 = normal_part - anomalous_part.real
    return SpectrumTable(omega, incoherent, squeeze_0, squeeze_90, kind, params)


def transmitted_spectrum(params: SystemParams, omega=None, check: bool = True) -> SpectrumTable:
    """Incoherent and squeezing spectra of the light leaving the output mirror.

    The elastic part vanishes because <a> = 0, so the incoherent spectrum is the
    whole spectrum.
    """
    return _spectrum_table(params, omega, "A", "B", "transmitted", check)


def fluorescent_spectrum(params: SystemParams, omega=None, check: bool = True) -> SpectrumTable:
    """Incoherent and squeezing spectra of the light scattered out the side."""
    return _spectrum_table(params, omega, "C", "D", "fluorescent", check)


def reduced_spectrum(params: SystemParams, channel: Literal["A", "C"], omega,
                     matrix: Literal["closed_form", "corrected", "derived"] = "corrected",
                     matrix_hook=None) -> np.ndarray:
    """Incoherent spectrum through the eight-element reduced regression system."""
    return resolvent_spectrum(reduced_regression_system(params, channel, matrix=matrix,
                                                        matrix_hook=matrix_hook), omega)


# -------------------------------------------------------------------- identity

@dataclass(frozen=True)
class IdentityReport:
    constant: float | None
    residual: float | None
    cancellation: float | None
    degenerate: bool

    def as_dict(self) -> dict:
        return {"constant": self.constant, "residual": self.residual,
                "cancellation": self.cancellation, "degenerate": self.degenerate}


def squeezing_identity_check(table: SpectrumTable) -> IdentityReport:
    """Test ``incoherent = c (S(omega, 0) + S(omega, pi/2))`` for a single constant ``c``.

    ``c`` minimises the max-norm misfit (a two-variable linear programme); the
    residual is that misfit relative to max|incoherent|.  ``cancellation`` is
    max|S0 + S90| / max|S0|, the size of what survives the first-order
    cancellation between the two quadratures.
    """
    y = np.asarray(table.incoherent, dtype=float)
    x = np.asarray(table.squeeze_0 + table.squeeze_90, dtype=float)
    s0 = np.max(np.abs(table.squeeze_0))
    if np.max(np.abs(y)) == 0 or np.max(np.abs(x)) == 0:
        return IdentityReport(None, None, None, True)
    scale_y, scale_x = np.max(np.abs(y)), np.max(np.abs(x))
    yn, xn = y / scale_y, x / scale_x
    # minimise t subject to |yn - c xn| <= t
    n = yn.size
    A = np.block([[-xn[:, None], -np.ones((n, 1))], [xn[:, None], -np.ones((n, 1))]])
    b = np.concatenate([-yn, yn])
    res = linprog([0.0, 1.0], A_ub=A, b_ub=b, bounds=[(None, None), (0, None)], method="highs")
    c = res.x[0] * scale_y / scale_x
    residual = float(np.max(np.abs(y - c * x)) / scale_y)
    return IdentityReport(float(c), residual, float(scale_x / s0) if s0 > 0 else None, False)
