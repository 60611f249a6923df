import numpy as np
import pytest

from atomopo.errors import DecayIncomplete, GridMismatch
from atomopo.hilbert import annihilation, creation, enumerate_basis, number_operator
from atomopo.lindblad import build_liouvillian, expectation, steady_state
from atomopo.oracle import (CorrelationSeries, MagnitudeScaleWarning, compare_spectra,
                            spectrum_via_transform, time_domain_correlation)
from atomopo.params import SystemParams
from atomopo.presets import get_preset
from atomopo.spectra import default_omega_grid, regression_system, transmitted_spectrum

space = enumerate_basis(2)


def _exponential(kappa, h, tau_max=40.0):
    tau = np.arange(0.0, tau_max + h / 2, h)
    return CorrelationSeries(tau, np.exp(-kappa * tau).astype(complex), complex(-kappa))


def test_single_exponential_transform():
    kappa = 2.0
    omega = np.linspace(-20, 20, 81)
    got = spectrum_via_transform(_exponential(kappa, 1 / 400), omega)
    exact = 2 * kappa / (kappa**2 + omega**2)
    assert np.max(np.abs(got - exact)) / np.max(exact) < 1e-6


def test_plain_trapezoid_is_second_order():
    kappa, omega = 2.0, np.linspace(-10, 10, 41)
    exact = 2 * kappa / (kappa**2 + omega**2)
    errs = [np.max(np.abs(spectrum_via_transform(_exponential(kappa, h), omega,
                                                 endpoint_correction=False) - exact))
            for h in (0.02, 0.01)]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_zero_series_zero_spectrum():
    tau = np.linspace(0, 1, 11)
    assert not np.any(spectrum_via_transform(CorrelationSeries(tau, np.zeros(11, complex)),
                                             np.linspace(-1, 1, 5)))


def test_tau_zero_and_decay(bad_cavity):
    series = time_domain_correlation(bad_cavity, creation(space), annihilation(space))
    rho = steady_state(build_liouvillian(bad_cavity))
    assert series.values[0] == pytest.approx(expectation(rho, number_operator(space)), rel=1e-12)
    assert abs(series.values[-1]) < 1e-8 * abs(series.values[0])


def test_zero_drive_zero_correlation(bad_cavity):
    series = time_domain_correlation(bad_cavity.replace(F=0.0), creation(space), annihilation(space))
    assert not np.any(series.values)


def test_short_window_detected(bad_cavity):
    with pytest.raises(DecayIncomplete):
        time_domain_correlation(bad_cavity, creation(space), annihilation(space), tau_max=0.5)


def test_bare_oscillator_rates():
    p = SystemParams(g=0.0, kappa=2.0, F=1e-6)
    system = regression_system(p, "A", steady_state(build_liouvillian(p)))
    lam, V = np.linalg.eig(system.evolution)
    weights = np.abs((system.readout @ V) * np.linalg.solve(V, system.initial))
    active = -lam.real[weights > 1e-6 * weights.max()]
    for rate in active:
        assert min(abs(rate - k * 2.0) for k in (1, 2, 3)) < 1e-4


def test_matches_resolvent_fig6():
    p = get_preset("fig6").params()
    omega = default_omega_grid(p, points=401)
    series = time_domain_correlation(p, creation(space), annihilation(space))
    ref = transmitted_spectrum(p, omega, check=False).incoherent
    assert compare_spectra(spectrum_via_transform(series, omega), ref) < 1e-6


def test_compare_spectra_contract():
    a = np.array([1.0, 2.0, 3.0])
    b = np.array([1.0, 2.5, 3.0])
    assert compare_spectra(a, a) == 0.0
    assert compare_spectra(a, b) == compare_spectra(b, a)
    with pytest.raises(GridMismatch):
        compare_spectra(a, b[:2])
    with pytest.raises(GridMismatch):
        compare_spectra(a, b, omega_a=[0, 1, 2], omega_b=[0, 1, 3])
    with pytest.warns(MagnitudeScaleWarning):
        compare_spectra(a, a / 3.0 * 1e-3)
