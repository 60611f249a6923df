import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from atomopo.lineshape import (find_holes, fit_lorentzian, fit_squared_lorentzian, fwhm,
                               lobe_center, lorentzian, squared_lorentzian)

omega = np.linspace(-50, 50, 20001)


@given(st.floats(0.5, 8.0), st.floats(0.1, 10.0))
def test_lorentzian_recovered(hwhm, amp):
    fit = fit_lorentzian(omega, lorentzian(omega, amp, hwhm))
    assert fit.fwhm == pytest.approx(2 * hwhm, rel=1e-6)
    assert fit.max_residual < 1e-6


@given(st.floats(0.5, 8.0))
def test_squared_lorentzian_recovered(w):
    fit = fit_squared_lorentzian(omega, squared_lorentzian(omega, 1.0, w))
    assert fit.width == pytest.approx(w, rel=1e-6)
    assert fwhm(omega, squared_lorentzian(omega, 1.0, w)) == pytest.approx(fit.fwhm, rel=1e-4)


def test_single_peak_has_no_holes():
    assert find_holes(omega, lorentzian(omega, 1, 2)) == []


def test_hole_inside_peak():
    y = lorentzian(omega, 1, 3) - 0.5 * lorentzian(omega, 1, 0.5)
    holes = find_holes(omega, y)
    assert len(holes) == 1 and holes[0].omega == 0.0
    assert holes[0].contrast > 0.01


def test_shallow_dip_below_contrast_threshold():
    y = lorentzian(omega, 1, 3) - 0.004 * lorentzian(omega, 1, 0.5)
    assert find_holes(omega, y) == [] or all(h.contrast < 0.01 for h in find_holes(omega, y, 0.0))


def test_doublet_lobes_and_center_exclusion():
    y = lorentzian(omega - 20, 1, 1) + lorentzian(omega + 20, 1, 1)
    assert find_holes(omega, y, exclude_center=True) == []
    assert len(find_holes(omega, y)) == 1
    assert lobe_center(omega, y, 1) == pytest.approx(20, rel=1e-3)
    assert lobe_center(omega, y, -1) == pytest.approx(-20, rel=1e-3)
