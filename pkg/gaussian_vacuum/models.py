"""
Model and result types shared by the gap, energy and corrections modules.
"""
import dataclasses
import enum
import math
from typing import Any, Dict, Optional, Union

from .exceptions import DomainError
from .util import DIMENSIONLESS, MASS_SQ
from .wick import Polynomial


class Branch(enum.Enum):
    SYMMETRIC = "symmetric"
    BROKEN_W0 = "broken_w0"
    BROKEN_WM1 = "broken_wm1"
    MEAN_FIELD = "mean_field"
    GENERIC = "generic"


class Stability(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    SADDLE = "saddle"
    MARGINAL = "marginal"


@dataclasses.dataclass(frozen=True)
class Theory:
    """
    A polynomial interaction ``:V(phi):`` Wick-ordered with respect to the
    free field of mass squared ``m0_sq``.
    """

    potential: Polynomial
    m0_sq: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.m0_sq) and self.m0_sq > 0):
            raise DomainError("m0_sq must be a positive number", value=self.m0_sq)

    @property
    def scale(self) -> float:
        return max(1.0, self.m0_sq, *(abs(c) for c in self.potential.coeffs))

    @property
    def theory(self) -> "Theory":
        return self

    def is_bounded_below(self) -> bool:
        p = self.potential
        return p.degree >= 2 and p.degree % 2 == 0 and p.coeffs[-1] > 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "potential": list(self.potential.coeffs),
            "m0_sq": self.m0_sq,
            "units": {"m0_sq": MASS_SQ},
        }


@dataclasses.dataclass(frozen=True)
class ModelParams:
    """The lambda phi^4 + sigma phi^2 model."""

    lam: float
    sigma: float
    m0_sq: float

    def __post_init__(self) -> None:
        for name in ("lam", "sigma", "m0_sq"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite", value=getattr(self, name))
        if self.lam <= 0:
            raise DomainError("the quartic coupling must be positive", value=self.lam)
        if self.m0_sq <= 0:
            raise DomainError("m0_sq must be positive", value=self.m0_sq)

    @property
    def potential(self) -> Polynomial:
        return Polynomial.phi4(self.lam, self.sigma)

    @property
    def theory(self) -> Theory:
        return Theory(self.potential, self.m0_sq)

    @property
    def scale(self) -> float:
        return max(1.0, abs(self.sigma), self.lam, self.m0_sq)

    def replace(self, **changes: float) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lam,
            "sigma": self.sigma,
            "m0_sq": self.m0_sq,
            "units": {"lambda": MASS_SQ, "sigma": MASS_SQ, "m0_sq": MASS_SQ},
        }


Model = Union[ModelParams, Theory]


def as_theory(model: Model) -> Theory:
    return model.theory


@dataclasses.dataclass(frozen=True)
class GapSolution:
    xi: float
    m_sq: float
    branch: Branch
    stability: Optional[Stability] = None
    energy: Optional[float] = None
    residual: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.m_sq > 0:
            raise DomainError("a gap solution needs m_sq > 0", value=self.m_sq)

    @property
    def log_m_sq(self) -> float:
        return math.log(self.m_sq)

    def replace(self, **changes: Any) -> "GapSolution":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "xi": self.xi,
            "m_sq": self.m_sq,
            "branch": self.branch.value,
            "stability": self.stability.value if self.stability else None,
            "energy": self.energy,
            "residual": self.residual,
            "units": {
                "xi": DIMENSIONLESS,
                "m_sq": MASS_SQ,
                "energy": MASS_SQ,
                "residual": MASS_SQ,
            },
        }


@dataclasses.dataclass(frozen=True)
class EnergyPoint:
    xi: float
    m_sq: float
    epsilon: float

    def __post_init__(self) -> None:
        if not self.m_sq > 0:
            raise DomainError("m_sq must be positive", value=self.m_sq)
        if not math.isfinite(self.epsilon):
            raise DomainError("energy density is not finite", value=self.epsilon)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "xi": self.xi,
            "m_sq": self.m_sq,
            "epsilon": self.epsilon,
            "units": {"xi": DIMENSIONLESS, "m_sq": MASS_SQ, "epsilon": MASS_SQ},
        }
