"""Cross-checks run by ``atomopo validate``.

Each check compares two independent computations of the same quantity and is
reported with its measured value and tolerance.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .hilbert import annihilation, creation, enumerate_basis, sigma_minus, sigma_plus
from .lindblad import build_liouvillian, expectation, steady_state
from .oracle import compare_spectra, spectrum_via_transform, time_domain_correlation
from .params import SystemParams
from .spectra import (default_omega_grid, fluorescent_spectrum, reduced_spectrum,
                      squeezing_identity_check, transmitted_spectrum)
from .weakfield import verify_scalings

__all__ = ["CheckResult", "ValidationReport", "validate", "top_shell_population",
           "ORACLE_TOL", "REDUCED_TOL", "IDENTITY_TOL", "ELASTIC_TOL"]

ORACLE_TOL = 1e-6
REDUCED_TOL = 1e-8
IDENTITY_TOL = 1e-8
ELASTIC_TOL = 1e-12
TOP_SHELL_WARN = 1e-6


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float | None
    tolerance: float | None
    detail: str = ""


@dataclass
class ValidationReport:
    params: SystemParams
    checks: list[CheckResult] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_json(self) -> str:
        return json.dumps({"params": self.params.as_dict(), "passed": self.passed,
                           "checks": [asdict(c) for c in self.checks],
                           "warnings": self.warnings}, indent=2, sort_keys=True)


def top_shell_population(params: SystemParams, rho: np.ndarray | None = None) -> float:
    space = enumerate_basis(params.n_max)
    if rho is None:
        rho = steady_state(build_liouvillian(params, space))
    return float(np.sum(np.diag(rho).real[space.top_shell()]))


def validate(params: SystemParams, omega_points: int = 401, matrix_hook=None,
             scaling: bool = True) -> ValidationReport:
    """Run every cross-check for ``params``.

    ``matrix_hook`` is applied to the reduced regression matrix before use; it
    exists so tests can corrupt an entry and watch the comparison fail.
    """
    report = ValidationReport(params)
    space = enumerate_basis(params.n_max)
    rho = steady_state(build_liouvillian(params, space))
    top = top_shell_population(params, rho)
    if top > TOP_SHELL_WARN:
        report.warnings.append(f"truncation: top shell (n_max={params.n_max}) holds {top:.2e} "
                               f"of the steady-state population; raise n_max")
    if not params.weak_field:
        report.warnings.append(f"F={params.F:g} is outside the weak-drive regime (F > 0.1 kappa)")

    mean_a = abs(expectation(rho, annihilation(space)))
    mean_s = abs(expectation(rho, sigma_minus(space)))
    report.checks.append(CheckResult("elastic_absent", max(mean_a, mean_s) < ELASTIC_TOL,
                                     max(mean_a, mean_s), ELASTIC_TOL, "|<a>|, |<sigma_->|"))

    omega = default_omega_grid(params, points=omega_points)
    pairs = {"transmitted": (transmitted_spectrum, creation(space), annihilation(space), "A"),
             "fluorescent": (fluorescent_spectrum, sigma_plus(space), sigma_minus(space), "C")}
    for kind, (fn, left, right, channel) in pairs.items():
        table = fn(params, omega, check=False)
        series = time_domain_correlation(params, left, right)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            dev = compare_spectra(table.incoherent, spectrum_via_transform(series, omega))
        report.checks.append(CheckResult(f"oracle_{kind}", dev < ORACLE_TOL, dev, ORACLE_TOL,
                                         "resolvent vs time-domain transform"))
        if params.weak_field:
            red = reduced_spectrum(params, channel, omega, matrix_hook=matrix_hook)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                dev = compare_spectra(table.incoherent, red)
            report.checks.append(CheckResult(f"reduced_{kind}", dev < REDUCED_TOL, dev, REDUCED_TOL,
                                             "eight-element regression vs full superoperator"))
        ident = squeezing_identity_check(table)
        if ident.degenerate:
            report.checks.append(CheckResult(f"identity_{kind}", True, None, IDENTITY_TOL, "degenerate"))
        else:
            report.checks.append(CheckResult(f"identity_{kind}", ident.residual < IDENTITY_TOL,
                                             ident.residual, IDENTITY_TOL,
                                             f"constant={ident.constant:.12g}"))
    if scaling and params.F > 0:
        unit = params.gamma if params.gamma > 0 else params.kappa
        sc = verify_scalings(params, np.logspace(-4, -2, 5) * unit)
        worst = max((abs(sc.fitted[k] - sc.expected[k]) for k in sc.fitted
                     if sc.fitted[k] is not None), default=0.0)
        report.checks.append(CheckResult("scaling", sc.all_passed, worst, sc.tolerance,
                                         f"flagged={sorted(sc.flagged)}"))
    return report
