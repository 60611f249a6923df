"""Two-level atom in a weakly driven degenerate parametric oscillator.

Steady states, incoherent and squeezing spectra of the transmitted and
fluorescent light, and quantum trajectories.
"""
from .errors import AtomOPOError, NumericalError
from .params import SystemParams

__version__ = "0.1.0"

__all__ = ["SystemParams", "AtomOPOError", "NumericalError", "__version__"]
