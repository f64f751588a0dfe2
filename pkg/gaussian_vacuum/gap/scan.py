"""
Parameter scans of the phi^4 phase structure.

Broken solutions exist exactly where ``ln|z| <= -1`` for the Lambert argument
``z = -(pi m0^2/6 lam) exp(2 pi sigma/3 lam)``; the critical parameters are
the roots of ``ln|z| + 1``.
"""
import dataclasses
import math
from concurrent.futures import Executor
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy import optimize

from ..exceptions import DomainError
from ..models import GapSolution, ModelParams
from ..util import DIMENSIONLESS, MASS_SQ, get_logger
from .closed_form import branch_argument, log_branch_magnitude
from .stability import solve_all

logger = get_logger(__name__)

PARAMETERS = ("lam", "sigma", "m0_sq")
CSV_COLUMNS = ("parameter", "branch", "xi", "m_sq", "energy", "stability")

# |ln|z| + 1| below this is treated as touching the branch point, not crossing it
_TANGENCY = 1e-12


@dataclasses.dataclass(frozen=True)
class CriticalPoint:
    parameter: str
    value: float
    # "appear" when broken solutions exist just above ``value``
    direction: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "parameter": self.parameter,
            "value": self.value,
            "direction": self.direction,
            "units": {"value": MASS_SQ},
        }


@dataclasses.dataclass(frozen=True)
class ScanRow:
    index: int
    value: float
    branch_argument: float
    solutions: List[GapSolution]


@dataclasses.dataclass(frozen=True)
class PhaseScan:
    base: ModelParams
    parameter: str
    rows: List[ScanRow]
    critical: List[CriticalPoint]

    def table(self) -> Dict[str, Any]:
        rows = [
            [
                row.value,
                sol.branch.value,
                sol.xi,
                sol.m_sq,
                sol.energy,
                sol.stability.value,
            ]
            for row in self.rows
            for sol in row.solutions
        ]
        return {"columns": list(CSV_COLUMNS), "rows": rows}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.base.to_dict(),
            "parameter": self.parameter,
            "rows": [
                {
                    "index": row.index,
                    "value": row.value,
                    "branch_argument": row.branch_argument,
                    "solutions": [sol.to_dict() for sol in row.solutions],
                }
                for row in self.rows
            ],
            "critical": [c.to_dict() for c in self.critical],
            "units": {"value": MASS_SQ, "branch_argument": DIMENSIONLESS},
        }


def scan_grid(lo: float, hi: float, steps: int, spacing: str = "linear") -> np.ndarray:
    if steps < 1:
        raise DomainError("a scan needs at least one step", value=steps)
    if steps == 1:
        return np.array([float(lo)])
    if spacing == "linear":
        return np.linspace(lo, hi, steps)
    if spacing == "geometric":
        if lo <= 0 or hi <= 0:
            raise DomainError("geometric spacing needs positive bounds", value=(lo, hi))
        return np.geomspace(lo, hi, steps)
    raise DomainError(f"unknown spacing {spacing!r}", value=spacing)


def _criticality(base: ModelParams, parameter: str, value: float) -> float:
    return log_branch_magnitude(base.replace(**{parameter: value})) + 1.0


def _refine(base: ModelParams, parameter: str, a: float, b: float) -> float:
    return optimize.brentq(
        lambda p: _criticality(base, parameter, p),
        a,
        b,
        xtol=1e-14 * max(abs(a), abs(b)),
        rtol=1e-12,
    )


def stationary_values(base: ModelParams, parameter: str) -> List[float]:
    """
    Where ``ln|z| + 1`` turns around as a function of ``parameter``. Only
    ``lam`` has one: for ``sigma < 0`` it peaks at ``lam = 2 pi |sigma| / 3``.
    """
    if parameter == "lam" and base.sigma < 0:
        return [-2.0 * math.pi * base.sigma / 3.0]
    return []


def _split(values: Sequence[float], turning: Sequence[float]) -> List[float]:
    # the turning points become extra nodes, so no cell holds two crossings
    inner = [t for t in turning if values[0] < t < values[-1]]
    return sorted(set(values) | set(inner))


def _crossings(
    base: ModelParams, parameter: str, values: Sequence[float]
) -> List[CriticalPoint]:
    if values:
        values = _split(values, stationary_values(base, parameter))
    g = [_criticality(base, parameter, v) for v in values]
    found = []
    for a, b, ga, gb in zip(values, values[1:], g, g[1:]):
        if abs(ga) <= _TANGENCY or abs(gb) <= _TANGENCY or ga * gb > 0:
            continue
        direction = "appear" if ga > 0 else "disappear"
        value = _refine(base, parameter, a, b)
        found.append(CriticalPoint(parameter, value, direction))
    return found


def critical_couplings(
    base: ModelParams, parameter: str, lo: float, hi: float, samples: int = 2001
) -> List[CriticalPoint]:
    """
    Every value of ``parameter`` in ``[lo, hi]`` where the Lambert argument
    crosses ``-1/e``, located on a dense sample and refined with Brent's method.
    """
    if parameter not in PARAMETERS:
        raise DomainError(f"unknown scan parameter {parameter!r}", value=parameter)
    spacing = "geometric" if lo > 0 and parameter != "sigma" else "linear"
    return _crossings(base, parameter, list(scan_grid(lo, hi, samples, spacing)))


def _scan_point(args: Any) -> ScanRow:
    index, base, parameter, value = args
    params = base.replace(**{parameter: value})
    return ScanRow(
        index=index,
        value=value,
        branch_argument=branch_argument(params),
        solutions=solve_all(params),
    )


def phase_scan(
    base: ModelParams,
    parameter: str,
    lo: float,
    hi: float,
    steps: int,
    spacing: str = "linear",
    executor: Optional[Executor] = None,
) -> PhaseScan:
    """
    Solve, classify and rank every grid point, and report where broken
    solutions appear or disappear between neighbouring points. A turning
    point of the criticality between two points is bracketed on its own, so
    a pair of crossings inside one cell is still found.

    Grid points are independent; pass an ``executor`` to evaluate them
    concurrently. Rows keep grid order either way.
    """
    if parameter not in PARAMETERS:
        raise DomainError(f"unknown scan parameter {parameter!r}", value=parameter)
    values = [float(v) for v in scan_grid(lo, hi, steps, spacing)]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise DomainError("scan grid must be strictly increasing", value=(lo, hi))

    jobs = [(i, base, parameter, v) for i, v in enumerate(values)]
    mapper = executor.map if executor is not None else map
    rows = sorted(mapper(_scan_point, jobs), key=lambda row: row.index)
    critical = _crossings(base, parameter, values)
    for point in critical:
        logger.info(
            "broken solutions %s at %s = %.12g",
            point.direction,
            parameter,
            point.value,
        )
    return PhaseScan(base=base, parameter=parameter, rows=rows, critical=critical)
