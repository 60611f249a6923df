"""Acceptance suite: one test per criterion, summarised at the end of the run.

Each test records a PASS/FAIL line through ``record_criterion`` before
asserting, so the summary lists every criterion even when some fail.
"""
import time

import numpy as np
import pytest
import scipy.linalg as sla

from atomopo.cli import main
from atomopo.hilbert import annihilation, creation, enumerate_basis, number_operator, sigma_minus, sigma_plus
from atomopo.lindblad import build_liouvillian, expectation, steady_state, vec
from atomopo.lineshape import (find_holes, fit_lorentzian, fit_squared_lorentzian, fwhm,
                               local_maxima, lobe_center)
from atomopo.oracle import compare_spectra, spectrum_via_transform, time_domain_correlation
from atomopo.params import SystemParams
from atomopo.presets import PRESETS, get_preset, spectral_drive
from atomopo.spectra import (default_omega_grid, fluorescent_spectrum, squeezing_identity_check,
                             transmitted_spectrum)
from atomopo.trajectories import conditioned_after_emission, default_trajectory_n_max, ensemble_average
from atomopo.weakfield import verify_scalings

pytestmark = [pytest.mark.slow,
              pytest.mark.filterwarnings("ignore::atomopo.oracle.MagnitudeScaleWarning")]

SPECTRAL = [name for name, p in PRESETS.items() if p.task != "trajectory"]


def spectral_params(g, kappa, gamma=1.0):
    return SystemParams(g=g, kappa=kappa, gamma=gamma, F=spectral_drive(kappa, gamma))


def spectrum_for(params, channel="transmitted"):
    fn = transmitted_spectrum if channel == "transmitted" else fluorescent_spectrum
    return fn(params)


def preset_table(name):
    p = get_preset(name)
    return spectrum_for(p.params(), p.task)


def center_hole(omega, values):
    mid = int(np.argmin(np.abs(omega)))
    return next((h for h in find_holes(omega, values) if h.omega == omega[mid]), None)


def off_center_holes(omega, values):
    return [h for h in find_holes(omega, values, exclude_center=True) if h.omega != 0]


def test_c01_bad_cavity_lorentzian(record_criterion):
    t0 = time.perf_counter()
    p = get_preset("fig2").params()
    table = transmitted_spectrum(p)
    fit = fit_lorentzian(table.omega, table.incoherent)
    target = 2 * p.kappa * (1 + 2 * p.g ** 2 / (p.kappa * p.gamma))
    sq = fit_squared_lorentzian(table.omega, table.incoherent)
    elapsed = time.perf_counter() - t0
    err = abs(fit.fwhm / target - 1)
    record_criterion(1, "bad-cavity Lorentzian",
                     err <= 0.05 and fit.max_residual < 0.02 and elapsed < 5,
                     f"Lorentzian FWHM {fit.fwhm:.4g} vs {target:.4g} ({err:.1%}), residual "
                     f"{fit.max_residual:.2%}; squared-Lorentzian w {sq.width:.4g} vs "
                     f"{target / 2:.4g}, residual {sq.max_residual:.2%}; {elapsed:.2f}s")


def test_c02_bare_opo_squared_lorentzian(record_criterion):
    t0 = time.perf_counter()
    p = spectral_params(0.0, 10.0)
    table = transmitted_spectrum(p)
    fit = fit_squared_lorentzian(table.omega, table.incoherent)
    elapsed = time.perf_counter() - t0
    err = abs(fit.width / p.kappa - 1)
    record_criterion(2, "bare-OPO squared Lorentzian", err <= 0.02 and elapsed < 5,
                     f"w {fit.width:.5g} vs kappa {p.kappa:g} ({err:.2%}); {elapsed:.2f}s")


def test_c03_hole_onset(record_criterion):
    t0 = time.perf_counter()
    with_hole = preset_table("fig3")
    without = preset_table("fig2")
    hole = center_hole(with_hole.omega, with_hole.incoherent)
    others = find_holes(without.omega, without.incoherent)
    elapsed = time.perf_counter() - t0
    ok = hole is not None and hole.contrast >= 0.01 and not others and elapsed < 5
    record_criterion(3, "spectral hole onset", ok,
                     f"fig3 center contrast {hole.contrast if hole else 0:.3g}; "
                     f"fig2 holes {len(others)}; {elapsed:.2f}s")


def _lobe_holes(table, g):
    holes = off_center_holes(table.omega, table.incoherent)
    left = [h for h in holes if h.omega < 0]
    right = [h for h in holes if h.omega > 0]
    return left, right


def test_c04_vacuum_rabi_holes(record_criterion):
    t0 = time.perf_counter()
    base = preset_table("fig7")
    g = get_preset("fig7").g
    centers = [lobe_center(base.omega, base.incoherent, s) for s in (-1, 1)]
    left, right = _lobe_holes(base, g)
    deeper = preset_table("fig8")
    dl, dr = _lobe_holes(deeper, get_preset("fig8").g)
    elapsed = time.perf_counter() - t0
    c_base = min((max(h.contrast for h in side) for side in (left, right) if side), default=0)
    c_deep = min((max(h.contrast for h in side) for side in (dl, dr) if side), default=0)
    loc_err = max(abs(abs(c) / g - 1) for c in centers)
    ok = (loc_err <= 0.03 and left and right and dl and dr and c_deep > c_base and elapsed < 10)
    record_criterion(4, "vacuum-Rabi holes", ok,
                     f"lobe centers {centers[0]:.4g}, {centers[1]:.4g} (off {loc_err:.1%}); "
                     f"holes L/R {len(left)}/{len(right)} contrast {c_base:.3g} -> "
                     f"{c_deep:.3g} at kappa=100, g=30; {elapsed:.2f}s")


def test_c05_good_cavity_lines(record_criterion):
    t0 = time.perf_counter()
    narrow = preset_table("fig9")
    width = fwhm(narrow.omega, narrow.incoherent)
    doublet = preset_table("fig10")
    n_peaks = len(local_maxima(doublet.incoherent))
    holes = off_center_holes(doublet.omega, doublet.incoherent)
    elapsed = time.perf_counter() - t0
    ok = width < get_preset("fig9").gamma and n_peaks == 2 and not holes and elapsed < 5
    record_criterion(5, "good-cavity subnatural line", ok,
                     f"FWHM {width:.3g} (gamma 1); doublet maxima {n_peaks}, holes {len(holes)}; "
                     f"{elapsed:.2f}s")


def test_c06_fluorescent_complementarity(record_criterion):
    t0 = time.perf_counter()
    bad = {name: preset_table(name) for name in ("fig11", "fig12")}
    bad_holes = {n: len(off_center_holes(t.omega, t.incoherent)) for n, t in bad.items()}
    good = {name: preset_table(name) for name in ("fig14", "fig15")}
    depth = {}
    for name, t in good.items():
        left, right = _lobe_holes(t, get_preset(name).g)
        depth[name] = min(max(h.contrast for h in s) for s in (left, right)) if left and right else 0
    elapsed = time.perf_counter() - t0
    ok = (not any(bad_holes.values()) and depth["fig14"] > 0 and depth["fig15"] > depth["fig14"]
          and elapsed < 15)
    record_criterion(6, "fluorescent-channel complementarity", ok,
                     f"bad-cavity holes {bad_holes}; good-cavity contrast "
                     f"{depth['fig14']:.3g} (kappa=0.1) -> {depth['fig15']:.3g} (kappa=0.01); "
                     f"{elapsed:.2f}s")


def test_c07_squeezing_identity(record_criterion):
    worst, constants, ratios = 0.0, [], []
    for name in PRESETS:
        p = get_preset(name)
        params = p.params()
        for channel in ("transmitted", "fluorescent"):
            omega = default_omega_grid(params, points=801)
            fn = transmitted_spectrum if channel == "transmitted" else fluorescent_spectrum
            full = squeezing_identity_check(fn(params, omega, check=False))
            half = squeezing_identity_check(fn(params.replace(F=params.F / 2), omega, check=False))
            if full.degenerate:
                continue
            worst = max(worst, full.residual)
            constants.append(full.constant)
            ratios.append(full.cancellation / half.cancellation)
    spread = max(constants) - min(constants)
    # cancellation is measured relative to the squeezing amplitude
    ok = worst < 1e-8 and all(abs(r - 2) <= 0.1 for r in ratios)
    record_criterion(7, "squeezing identity and cancellation", ok,
                     f"constant {np.mean(constants):.12g} (spread {spread:.1e}), worst residual "
                     f"{worst:.1e}; cancellation ratio under halving F "
                     f"{min(ratios):.3f}..{max(ratios):.3f} over {len(ratios)} preset channels")


def test_c08_scaling_hierarchy(record_criterion):
    worst, failing, missing, mean_field = 0.0, [], [], 0.0
    for name in SPECTRAL:
        params = get_preset(name).params()
        report = verify_scalings(params, np.logspace(-4, -2, 5) * params.gamma)
        for key, value in report.fitted.items():
            if value is None:
                missing.append(f"{name}:{key}")
            else:
                worst = max(worst, abs(value - report.expected[key]))
        if not report.all_passed:
            failing.append(name)
    for name in PRESETS:
        params = get_preset(name).params()
        space = enumerate_basis(params.n_max)
        rho = steady_state(build_liouvillian(params, space))
        mean_field = max(mean_field, abs(expectation(rho, annihilation(space))))
    ok = not failing and not missing and worst <= 0.05 and mean_field < 1e-12
    record_criterion(8, "scaling hierarchy", ok,
                     f"worst exponent error {worst:.2e}, failing {failing}, unfitted {missing}; "
                     f"max |<a>| {mean_field:.1e}")


def test_c09_oracle_equivalence(record_criterion):
    t0 = time.perf_counter()
    devs = {}
    for name in ("fig2", "fig6", "fig10", "fig14"):
        p = get_preset(name)
        params = p.params()
        space = enumerate_basis(params.n_max)
        omega = default_omega_grid(params, points=401)
        if p.task == "transmitted":
            table = transmitted_spectrum(params, omega, check=False)
            ops = creation(space), annihilation(space)
        else:
            table = fluorescent_spectrum(params, omega, check=False)
            ops = sigma_plus(space), sigma_minus(space)
        series = time_domain_correlation(params, *ops)
        devs[name] = compare_spectra(table.incoherent, spectrum_via_transform(series, omega))
    elapsed = time.perf_counter() - t0
    worst = max(devs.values())
    record_criterion(9, "dual-path oracle equivalence", worst < 1e-6 and elapsed < 60,
                     ", ".join(f"{k} {v:.1e}" for k, v in devs.items()) + f"; {elapsed:.1f}s")


def test_c10_trajectory_consistency(record_criterion):
    t0 = time.perf_counter()
    preset = get_preset("fig16")
    params = preset.params()
    params = params.replace(n_max=default_trajectory_n_max(params))
    ens = ensemble_average(params, 10_000, preset.t_max, seed=0, sample_dt=preset.sample_dt)
    space = enumerate_basis(params.n_max)
    L = build_liouvillian(params, space)
    step = sla.expm(L * (ens.times[1] - ens.times[0]))
    n_op = vec(number_operator(space).T).real
    x = np.zeros(space.dim ** 2)
    x[0] = 1.0
    exact = np.empty(len(ens.times))
    for k in range(len(ens.times)):
        exact[k] = (n_op @ x).real
        x = step @ x
    within = np.abs(ens.photon_number - exact) <= 3 * ens.photon_number_se
    conditioned = conditioned_after_emission(params, 2.0, preset.sample_dt)
    elapsed = time.perf_counter() - t0
    ok = within.all() and conditioned.peak_photon_number >= 0.9 and elapsed < 180
    record_criterion(10, "trajectory consistency", ok,
                     f"{len(within) - within.sum()} of {len(within)} samples outside 3 SE "
                     f"(of those, {np.sum(~within & (ens.photon_number_se == 0))} with zero SE); "
                     f"post-emission peak <n> {conditioned.peak_photon_number:.3f}; "
                     f"{elapsed:.1f}s")


def test_c11_reproducibility(tmp_path, record_criterion):
    differing = []
    for name, p in PRESETS.items():
        task = "spectrum" if p.task != "trajectory" else "trajectory"
        runs = []
        for rep in ("a", "b"):
            out = tmp_path / f"{name}_{rep}"
            assert main([task, "--preset", name, "--seed", "11", "--out", str(out)]) == 0
            runs.append({f.name: f.read_bytes() for f in sorted(out.glob("*.csv"))})
        if runs[0] != runs[1] or not runs[0]:
            differing.append(name)
    record_criterion(11, "reproducibility", not differing,
                     f"{len(PRESETS)} presets rerun, differing {differing}")
