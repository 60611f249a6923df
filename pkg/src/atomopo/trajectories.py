"""Monte Carlo wave-function unraveling of the master equation.

Jump operators are ``sqrt(2 kappa) a`` (photon through the output mirror) and
``sqrt(gamma) sigma_-`` (spontaneous emission), which makes the ensemble
average reproduce the generator in :mod:`atomopo.lindblad` exactly.  Between
jumps the unnormalised state follows ``exp(-i H_eff t)``; the propagator is
applied in closed form from one eigendecomposition, so drift carries no
integration error and jump times are located by bisection on the squared norm
(the waiting-time method).

Each trajectory draws from its own PCG64 stream seeded by
``SeedSequence(seed, spawn_key=(index,))``: results depend only on
``(seed, index)``, never on how trajectories are scheduled.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import NumericalError, TruncationOverflow
from .hilbert import (StateSpace, annihilation, enumerate_basis, excitation_operator, hamiltonian,
                      number_operator, sigma_minus)
from .lindblad import build_liouvillian, steady_state
from .params import SystemParams

__all__ = [
    "CHANNELS",
    "TrajectoryRecord",
    "EnsembleAverage",
    "default_trajectory_n_max",
    "jump_operators",
    "effective_hamiltonian",
    "trajectory_rng",
    "run_trajectory",
    "ensemble_average",
    "no_jump_state",
    "conditioned_after_emission",
]

CHANNELS = ("cavity", "spontaneous")
TOP_SHELL_LIMIT = 1e-6
NORM_TOL = 1e-10


def default_trajectory_n_max(params: SystemParams) -> int:
    """Truncation sized to the drive: 2 up to F/gamma = 0.01, 6 up to 0.5, else 10."""
    ratio = params.F / params.gamma if params.gamma > 0 else np.inf
    if ratio <= 0.01:
        return 2
    if ratio <= 0.5:
        return 6
    return 10


def jump_operators(params: SystemParams, space: StateSpace) -> dict[str, np.ndarray]:
    return {"cavity": np.sqrt(2.0 * params.kappa) * annihilation(space),
            "spontaneous": np.sqrt(params.gamma) * sigma_minus(space)}


def effective_hamiltonian(params: SystemParams, space: StateSpace | None = None) -> np.ndarray:
    """``H - (i/2) sum_c c^dag c = H - i kappa a^dag a - i (gamma/2) sigma_+ sigma_-``."""
    if space is None:
        space = enumerate_basis(params.n_max)
    H = hamiltonian(params, space).astype(complex)
    for c in jump_operators(params, space).values():
        H = H - 0.5j * (c.conj().T @ c)
    return H


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


class _Drift:
    """Closed-form ``exp(-i H_eff t)`` through an eigendecomposition.

    ``H_eff`` never mixes even and odd total quanta, so each parity block is
    diagonalised on its own; forbidden amplitudes then stay exactly zero.
    """

    def __init__(self, heff: np.ndarray, parity: np.ndarray):
        gen = -1j * heff
        self.blocks = []
        for p in (0, 1):
            idx = np.nonzero(parity == p)[0]
            if idx.size == 0:
                continue
            sub = gen[np.ix_(idx, idx)]
            lam, V = np.linalg.eig(sub)
            if np.linalg.cond(V) < 1e8:
                self.blocks.append((idx, lam, V, np.linalg.inv(V), None))
            else:
                self.blocks.append((idx, None, None, None, sub))

    def many(self, psi: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Columns are the propagated state at each time in ``t``."""
        out = np.zeros((psi.size, t.size), dtype=complex)
        for idx, lam, V, Vinv, sub in self.blocks:
            part = psi[idx]
            if not np.any(part):
                continue
            if sub is None:
                out[idx] = V @ (np.exp(np.outer(lam, t)) * (Vinv @ part)[:, None])
            else:
                out[idx] = np.stack([sla.expm(sub * s) @ part for s in t], axis=1)
        return out

    def one(self, psi: np.ndarray, t: float) -> np.ndarray:
        return self.many(psi, np.array([t]))[:, 0]


@dataclass
class TrajectoryRecord:
    """Conditioned observables sampled on a uniform grid, plus the jump log."""

    times: np.ndarray
    photon_number: np.ndarray
    excitation: np.ndarray
    jump_log: list[tuple[float, str]] = field(default_factory=list)
    states: np.ndarray | None = field(default=None, repr=False)

    @property
    def peak_photon_number(self) -> float:
        return float(np.max(self.photon_number))

    def jump_counts(self) -> dict[str, int]:
        return {ch: sum(1 for _, c in self.jump_log if c == ch) for ch in CHANNELS}

    def to_csv(self, path, jumps_path=None) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("time", "photon_number", "excitation"))
            for row in zip(self.times, self.photon_number, self.excitation):
                w.writerow([f"{v:.17g}" for v in row])
        if jumps_path is not None:
            with open(jumps_path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(("time", "channel"))
                for t, ch in self.jump_log:
                    w.writerow([f"{t:.17g}", ch])


def _sample_grid(t_max: float, sample_dt: float) -> np.ndarray:
    if t_max <= 0 or sample_dt <= 0:
        raise ValueError("t_max and sample_dt must be positive")
    n = max(1, int(round(t_max / sample_dt)))
    return np.linspace(0.0, t_max, n + 1)


def _vacuum(space: StateSpace) -> np.ndarray:
    psi = np.zeros(space.dim, dtype=complex)
    psi[0] = 1.0
    return psi


class _Unraveling:
    def __init__(self, params: SystemParams):
        self.params = params
        self.space = enumerate_basis(params.n_max)
        self.jumps = jump_operators(params, self.space)
        self.drift = _Drift(effective_hamiltonian(params, self.space), self.space.parity)
        self.n_op = number_operator(self.space)
        self.e_op = excitation_operator(self.space)
        self.top = self.space.quanta == self.space.n_max

    def run(self, rng: np.random.Generator, times: np.ndarray, psi0: np.ndarray,
            keep_states: bool, check_truncation: bool) -> TrajectoryRecord:
        nt = times.size
        photons = np.empty(nt)
        excit = np.empty(nt)
        states = np.empty((nt, self.space.dim), dtype=complex) if keep_states else None
        log: list[tuple[float, str]] = []
        psi = psi0 / np.linalg.norm(psi0)
        t0, i, r = 0.0, 0, rng.random()
        while i < nt:
            dt = times[i:] - t0
            P = self.drift.many(psi, dt)
            norm2 = np.einsum("ij,ij->j", P.conj(), P).real
            below = np.nonzero(norm2 < r)[0]
            stop = below[0] if below.size else dt.size
            seg = P[:, :stop] / np.sqrt(norm2[:stop])
            photons[i:i + stop] = np.einsum("ij,ij->j", seg.conj(), self.n_op @ seg).real
            excit[i:i + stop] = np.einsum("ij,ij->j", seg.conj(), self.e_op @ seg).real
            if check_truncation and stop:
                top = np.max(np.sum(np.abs(seg[self.top]) ** 2, axis=0))
                if top > TOP_SHELL_LIMIT:
                    raise TruncationOverflow(
                        f"top shell population {top:.2e} > {TOP_SHELL_LIMIT:g}; raise n_max")
            if keep_states:
                states[i:i + stop] = seg.T
            if stop == dt.size:
                break
            t_jump = self._crossing(psi, r, 0.0 if stop == 0 else dt[stop - 1], dt[stop])
            psi = self.drift.one(psi, t_jump)
            weights = np.array([np.linalg.norm(c @ psi) ** 2 for c in self.jumps.values()])
            if weights.sum() <= 0:
                raise NumericalError("norm decayed with no open jump channel")
            k = rng.choice(len(weights), p=weights / weights.sum())
            name = list(self.jumps)[k]
            psi = self.jumps[name] @ psi
            psi /= np.linalg.norm(psi)
            t0 += t_jump
            log.append((t0, name))
            i += stop
            r = rng.random()
        return TrajectoryRecord(times, photons, excit, log, states)

    def _crossing(self, psi, r, lo, hi) -> float:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            excess = np.linalg.norm(self.drift.one(psi, mid)) ** 2 - r
            if abs(excess) <= NORM_TOL or hi - lo <= 1e-15 * max(hi, 1.0):
                return mid
            if excess > 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def run_trajectory(params: SystemParams, t_max: float, seed: int, sample_dt: float,
                   initial: np.ndarray | None = None, index: int = 0, keep_states: bool = False,
                   check_truncation: bool = True) -> TrajectoryRecord:
    """One conditioned trajectory from ``initial`` (default: vacuum, atom in ground state).

    Raises :class:`TruncationOverflow` when the top total-quanta shell of the
    conditioned state carries more than 1e-6 of the population at a sample time.
    """
    unr = _Unraveling(params)
    psi0 = _vacuum(unr.space) if initial is None else np.asarray(initial, dtype=complex)
    return unr.run(trajectory_rng(seed, index), _sample_grid(t_max, sample_dt), psi0,
                   keep_states, check_truncation)


@dataclass
class EnsembleAverage:
    times: np.ndarray
    photon_number: np.ndarray
    photon_number_se: np.ndarray
    excitation: np.ndarray
    excitation_se: np.ndarray
    n_traj: int
    density: np.ndarray | None = field(default=None, repr=False)
    density_se: np.ndarray | None = field(default=None, repr=False)
    jump_counts: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("time", "photon_number", "photon_number_se", "excitation", "excitation_se"))
            for row in zip(self.times, self.photon_number, self.photon_number_se, self.excitation,
                           self.excitation_se):
                w.writerow([f"{v:.17g}" for v in row])


class _Welford:
    """Running mean and sum of squared deviations (complex values allowed)."""

    def __init__(self, shape, dtype=float):
        self.n = 0
        self.mean = np.zeros(shape, dtype=dtype)
        self.m2 = np.zeros(shape)

    def add(self, x):
        self.n += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.n
        self.m2 += (np.conj(delta) * (x - self.mean)).real

    def result(self):
        if self.n < 2:
            return self.mean, np.full(self.mean.shape, np.nan)
        return self.mean, np.sqrt(self.m2 / (self.n - 1) / self.n)


def ensemble_average(params: SystemParams, n_traj: int, t_max: float, seed: int,
                     sample_dt: float, initial: np.ndarray | None = None, density: bool = False,
                     check_truncation: bool = True) -> EnsembleAverage:
    """Mean and standard error of the conditioned observables over ``n_traj`` trajectories.

    Trajectory ``k`` uses stream ``(seed, k)``.  With ``density`` the averaged
    projector ``|psi><psi|`` and its elementwise standard error (real and
    imaginary parts combined in quadrature) are also returned.  The standard
    error is NaN for a single trajectory.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    unr = _Unraveling(params)
    times = _sample_grid(t_max, sample_dt)
    psi0 = _vacuum(unr.space) if initial is None else np.asarray(initial, dtype=complex)
    photons, excit = _Welford(times.size), _Welford(times.size)
    dens = _Welford((times.size, unr.space.dim, unr.space.dim), complex) if density else None
    counts = dict.fromkeys(CHANNELS, 0)
    for k in range(n_traj):
        rec = unr.run(trajectory_rng(seed, k), times, psi0, density, check_truncation)
        photons.add(rec.photon_number)
        excit.add(rec.excitation)
        for ch, c in rec.jump_counts().items():
            counts[ch] += c
        if density:
            dens.add(rec.states[:, :, None] * rec.states[:, None, :].conj())
    n_mean, n_se = photons.result()
    e_mean, e_se = excit.result()
    rho_mean, rho_se = dens.result() if density else (None, None)
    return EnsembleAverage(times, n_mean, n_se, e_mean, e_se, n_traj, rho_mean, rho_se, counts)


def no_jump_state(params: SystemParams, space: StateSpace | None = None) -> np.ndarray:
    """Normalised state a trajectory relaxes to while no jump occurs.

    It is the eigenvector of ``H_eff`` with the slowest norm decay, i.e. the
    pure state carrying the steady-state coherences between jumps.
    """
    if space is None:
        space = enumerate_basis(params.n_max)
    lam, V = np.linalg.eig(-1j * effective_hamiltonian(params, space))
    psi = V[:, np.argmax(lam.real)]
    psi = psi / np.linalg.norm(psi)
    return psi * (abs(psi[0]) / psi[0]) if psi[0] != 0 else psi


def conditioned_after_emission(params: SystemParams, t_post: float, sample_dt: float,
                               preparation: str = "pure") -> TrajectoryRecord:
    """Conditioned photon number following a cavity emission.

    ``preparation="pure"`` represents the pre-jump steady state by the no-jump
    pure state (:func:`no_jump_state`), the state a trajectory occupies when it
    emits; ``"mixed"`` uses the full ``rho_ss``, which also contains trajectories
    caught between the two photons of a pair.  The detection prepares
    ``a rho a^dag / tr(.)``, which is carried forward under the no-jump drift (a
    linear map, so mixedness is harmless) and renormalised at every sample.  The
    record's jump log holds the single conditioning event at t = 0.
    """
    space = enumerate_basis(params.n_max)
    if preparation == "pure":
        psi = no_jump_state(params, space)
        rho = np.outer(psi, psi.conj())
    elif preparation == "mixed":
        rho = steady_state(build_liouvillian(params, space))
    else:
        raise ValueError(f"unknown preparation {preparation!r}")
    a = annihilation(space)
    post = a @ rho @ a.conj().T
    if np.trace(post).real <= 0:
        raise NumericalError("pre-jump state holds no photons to detect")
    post /= np.trace(post).real
    times = _sample_grid(t_post, sample_dt)
    drift = _Drift(effective_hamiltonian(params, space), space.parity)
    # U[:, j, k] = exp(-i H_eff t_k) e_j
    U = np.stack([drift.many(col, times) for col in np.eye(space.dim, dtype=complex)], axis=1)
    R = np.einsum("ajk,jl,blk->kab", U, post, U.conj())
    norm = np.einsum("kaa->k", R).real
    n_op, e_op = number_operator(space), excitation_operator(space)
    photons = np.einsum("ab,kba->k", n_op, R).real / norm
    excit = np.einsum("ab,kba->k", e_op, R).real / norm
    return TrajectoryRecord(times, photons, excit, [(0.0, "cavity")])
