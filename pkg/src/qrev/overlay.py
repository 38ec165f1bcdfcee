"""Reported squeezing experiments mapped onto ``(r, nu)``."""
from dataclasses import dataclass

import numpy as np

OVERLAY_VERSION = 1


@dataclass(frozen=True)
class ExperimentPoint:
    """Squeezed / anti-squeezed quadrature variances in dB relative to vacuum."""

    label: str
    s_db: float
    a_db: float

    def __post_init__(self):
        if not (self.s_db > 0 and self.a_db > 0):
            raise ValueError(f"{self.label}: dB magnitudes must be positive")
        if self.a_db < self.s_db:
            raise ValueError(f"{self.label}: anti-squeezing below squeezing gives nu < 1")

    @property
    def v_minus(self) -> float:
        return 10.0 ** (-self.s_db / 10.0)

    @property
    def v_plus(self) -> float:
        return 10.0 ** (self.a_db / 10.0)

    @property
    def nu(self) -> float:
        return float(np.sqrt(self.v_minus * self.v_plus))

    @property
    def r(self) -> float:
        return float(0.25 * np.log(self.v_plus / self.v_minus))

    @property
    def x(self) -> float:
        return float(np.cosh(2.0 * self.r) / self.nu)


BUILTIN_OVERLAY = (
    ExperimentPoint("Mehmet2011", 12.3, 19.3),
    ExperimentPoint("Mehmet2011", 11.4, 16.8),
    ExperimentPoint("Meylahn2022", 13.5, 22.3),
    ExperimentPoint("Meylahn2022", 13.2, 23.4),
    ExperimentPoint("Meylahn2022", 11.5, 17.5),
)
