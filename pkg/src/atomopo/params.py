"""Physical parameters of the atom + OPO system."""
from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass

__all__ = ["SystemParams", "WeakFieldWarning", "WEAK_FIELD_RATIO"]

# F above this fraction of kappa is flagged as outside the weak-drive regime.
WEAK_FIELD_RATIO = 0.1


class WeakFieldWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SystemParams:
    """Rates of the model, all in the same (arbitrary) inverse-time unit.

    Attributes
    ----------
    g : atom-cavity coupling.
    kappa : cavity field decay rate through the output mirror.
    gamma : spontaneous emission rate into non-cavity modes.
    F : effective two-photon drive produced by the pumped crystal.
    n_max : maximum total number of quanta kept in the basis.
    """

    g: float
    kappa: float
    gamma: float = 1.0
    F: float = 1e-3
    n_max: int = 2

    def __post_init__(self):
        for name in ("g", "kappa", "gamma", "F"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or value != value:
                raise ValueError(f"{name} must be a real number, got {value!r}")
        if self.g < 0 or self.gamma < 0 or self.F < 0:
            raise ValueError("g, gamma and F must be non-negative")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ValueError(f"n_max must be a non-negative integer, got {self.n_max!r}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def weak_field(self) -> bool:
        return self.F <= WEAK_FIELD_RATIO * self.kappa

    def check_weak_field(self) -> bool:
        """Warn (and return False) when F is too large for the weak-drive picture."""
        if not self.weak_field:
            warnings.warn(
                f"F={self.F:g} exceeds {WEAK_FIELD_RATIO:g}*kappa={WEAK_FIELD_RATIO * self.kappa:g}",
                WeakFieldWarning,
                stacklevel=2,
            )
            return False
        return True

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)
