"""Line-shape analysis: peaks, holes, widths and Lorentzian-family fits.

A *hole* is a strict local minimum lying between two strict local maxima whose
contrast, ``(min flanking max - dip) / min flanking max``, is at least 1%.  The
dip at omega = 0 between the two halves of a vacuum-Rabi doublet is the
normal-mode splitting, not a hole; callers that care pass ``exclude_center``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

__all__ = [
    "Hole",
    "FitResult",
    "local_maxima",
    "local_minima",
    "find_holes",
    "half_max_crossings",
    "fwhm",
    "lobe_center",
    "lorentzian",
    "squared_lorentzian",
    "fit_lorentzian",
    "fit_squared_lorentzian",
]

MIN_CONTRAST = 0.01


@dataclass(frozen=True)
class Hole:
    omega: float
    depth: float
    contrast: float
    left_peak: float
    right_peak: float


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    width: float
    fwhm: float
    max_residual: float  # relative to the fitted peak, over the fit window
    window: float
    converged: bool


def local_maxima(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    return np.nonzero((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:]))[0] + 1


def local_minima(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    return np.nonzero((y[1:-1] < y[:-2]) & (y[1:-1] < y[2:]))[0] + 1


def find_holes(omega, values, min_contrast: float = MIN_CONTRAST,
               exclude_center: bool = False) -> list[Hole]:
    """Strict local minima bracketed by strict local maxima with enough contrast."""
    omega, y = np.asarray(omega, float), np.asarray(values, float)
    maxima = local_maxima(y)
    holes = []
    for m in local_minima(y):
        left, right = maxima[maxima < m], maxima[maxima > m]
        if not left.size or not right.size:
            continue
        if exclude_center and abs(omega[m]) <= 0.5 * abs(omega[1] - omega[0]):
            continue
        lp, rp = y[left[-1]], y[right[0]]
        ref = min(lp, rp)
        if ref <= 0:
            continue
        contrast = (ref - y[m]) / ref
        if contrast >= min_contrast:
            holes.append(Hole(float(omega[m]), float(y[m]), float(contrast),
                              float(omega[left[-1]]), float(omega[right[0]])))
    return holes


def _crossing(x0, x1, y0, y1, level):
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0)


def half_max_crossings(omega, values) -> tuple[float, float]:
    """Outermost half-maximum crossings, linearly interpolated."""
    omega, y = np.asarray(omega, float), np.asarray(values, float)
    half = 0.5 * y.max()
    above = np.nonzero(y >= half)[0]
    i, j = above[0], above[-1]
    if i == 0 or j == y.size - 1:
        raise ValueError("spectrum does not fall to half maximum inside the grid")
    lo = _crossing(omega[i - 1], omega[i], y[i - 1], y[i], half)
    hi = _crossing(omega[j], omega[j + 1], y[j], y[j + 1], half)
    return float(lo), float(hi)


def fwhm(omega, values) -> float:
    lo, hi = half_max_crossings(omega, values)
    return hi - lo


def lobe_center(omega, values, side: int = 1) -> float:
    """Centre of one lobe of a doublet: midpoint of its outermost half-max crossings.

    Only the half-line ``sign(omega) == side`` is used, so a hole inside the lobe
    does not shift the estimate toward one of its sub-maxima.
    """
    omega, y = np.asarray(omega, float), np.asarray(values, float)
    mask = omega * side > 0
    order = np.argsort(omega[mask] * side)
    w, v = (omega[mask] * side)[order], y[mask][order]
    half = 0.5 * v.max()
    above = np.nonzero(v >= half)[0]
    i, j = above[0], above[-1]
    lo = w[0] if i == 0 else _crossing(w[i - 1], w[i], v[i - 1], v[i], half)
    if j == v.size - 1:
        raise ValueError("lobe does not fall to half maximum inside the grid")
    hi = _crossing(w[j], w[j + 1], v[j], v[j + 1], half)
    return side * 0.5 * (lo + hi)


def lorentzian(omega, amplitude, hwhm):
    return amplitude * hwhm**2 / (hwhm**2 + np.asarray(omega) ** 2)


def squared_lorentzian(omega, amplitude, width):
    return amplitude * (width**2 / (width**2 + np.asarray(omega) ** 2)) ** 2


def _fit(model, omega, y, width0, windows: float, fwhm_of, max_iter: int = 20) -> FitResult:
    omega, y = np.asarray(omega, float), np.asarray(y, float)
    amp, width = float(y.max()), float(width0)
    # the window edge is only resolved to one grid step
    step = float(np.max(np.diff(omega)))
    converged = False
    for _ in range(max_iter):
        mask = np.abs(omega) <= windows * width
        if mask.sum() < 5:
            raise ValueError("fit window holds fewer than five grid points")
        res = least_squares(lambda p: (model(omega[mask], *p) - y[mask]) / amp,
                            [amp, width], bounds=([0, 0], [np.inf, np.inf]))
        new_amp, new_width = res.x
        done = abs(new_width - width) <= max(1e-8 * width, step / windows)
        amp, width = float(new_amp), float(new_width)
        if done:
            converged = True
            break
    mask = np.abs(omega) <= windows * width
    resid = np.max(np.abs(model(omega[mask], amp, width) - y[mask])) / amp
    return FitResult(amp, width, fwhm_of(width), float(resid), windows * width, converged)


def fit_lorentzian(omega, values, windows: float = 3.0) -> FitResult:
    """Least-squares Lorentzian centred at zero; ``width`` is the half width.

    The window is ``|omega| <= windows * width`` and is iterated with the fit.
    """
    return _fit(lorentzian, omega, values, 0.5 * fwhm(omega, values), windows, lambda w: 2 * w)


def fit_squared_lorentzian(omega, values, windows: float = 3.0) -> FitResult:
    """Least-squares fit of ``A [w^2 / (w^2 + omega^2)]^2`` centred at zero."""
    c = np.sqrt(np.sqrt(2.0) - 1.0)  # half width in units of w
    return _fit(squared_lorentzian, omega, values, 0.5 * fwhm(omega, values) / c, windows,
                lambda w: 2 * c * w)
