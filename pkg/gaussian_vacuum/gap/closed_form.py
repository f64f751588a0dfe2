"""
Closed-form gap solutions of the lambda phi^4 + sigma phi^2 model.

The symmetric solution is
``m^2 = (3 lam/pi) W0((pi m0^2/3 lam) exp(2 pi sigma/3 lam))``.
Broken solutions satisfy ``m^2 = 8 lam xi^2`` together with
``m^2 = m0^2 exp((2pi/3 lam)(2 lam xi^2 + sigma))``; eliminating ``m^2`` gives
``xi^2 = -3t/4pi`` with ``t = W(-(pi m0^2/6 lam) exp(2 pi sigma/3 lam))`` on
either real branch.

The two branches label two families of broken solutions. The ``MINUS_ONE``
branch gives ``t <= -1`` and is labelled ``BROKEN_WM1``. As ``lam -> 0`` it
continues the classical minimum, since ``t -> 2 pi sigma/3 lam`` and so
``xi^2 -> -sigma/2 lam``. As ``lam -> oo`` it is the large-mass solution, with
``xi^2`` growing like ``ln lam``. The principal branch gives ``-1 <= t < 0``
and is labelled ``BROKEN_W0``. Its field stays below ``xi^2 = 3/4 pi`` and
collapses onto ``xi = 0`` in both limits. When ``m0^2 = -4 sigma`` the
classical point sits on the ``MINUS_ONE`` branch for ``2 pi sigma/3 lam <= -1``
and on the principal one above it, so that solution is labelled
``MEAN_FIELD`` by value instead of by branch.
"""
import math
from typing import List, Optional, Tuple

import numpy as np

from ..energy import vacuum_energy
from ..exceptions import DomainError
from ..models import Branch, GapSolution, ModelParams
from ..special.lambert import (
    BranchId,
    lambert_w,
    lambert_w0_exp,
    lambert_wm1_negexp,
)
from ..util import get_logger
from .residual import gap_residual, log_mass_jacobian, residual_norm, residual_tolerance

logger = get_logger(__name__)

# exp() of anything below this underflows to a subnormal or zero
_LOG_UNDERFLOW = -700.0


def log_branch_magnitude(params: ModelParams) -> float:
    """``ln|z|`` for the broken-branch Lambert argument ``z``."""
    lam, sigma = params.lam, params.sigma
    return math.log(math.pi * params.m0_sq / (6.0 * lam)) + (
        2.0 * math.pi * sigma / (3.0 * lam)
    )


def branch_argument(params: ModelParams) -> float:
    """
    ``-(pi m0^2/6 lam) exp(2 pi sigma/3 lam)``. Real broken solutions exist
    iff this is at least ``-1/e``.
    """
    s = log_branch_magnitude(params)
    if s > 700.0:
        return -math.inf
    return -math.exp(s)


def has_broken_solutions(params: ModelParams) -> bool:
    return log_branch_magnitude(params) <= -1.0


def mean_field(params: ModelParams) -> List[Tuple[float, float]]:
    """
    Classical minima ``(xi_c, m_c^2)`` of the potential with
    ``m_c^2 = V''(xi_c)``.
    """
    if params.sigma > 0:
        return [(0.0, 2.0 * params.sigma)]
    if params.sigma < 0:
        xi = math.sqrt(-params.sigma / (2.0 * params.lam))
        return [(xi, -4.0 * params.sigma), (-xi, -4.0 * params.sigma)]
    raise DomainError("sigma = 0 has a massless classical minimum", value=params.sigma)


def _polish(
    params: ModelParams, xi: float, m_sq: float, steps: int = 3
) -> Tuple[float, float]:
    # Newton in (xi, ln m^2), accepting only steps that shrink the residual
    tolerance = residual_tolerance(params)
    best = float(residual_norm(params, xi, m_sq))
    for _ in range(steps):
        if best <= tolerance:
            break
        r = np.array(gap_residual(params, xi, m_sq), dtype=float)
        try:
            step = np.linalg.solve(log_mass_jacobian(params, xi, math.log(m_sq)), -r)
        except np.linalg.LinAlgError:
            break
        new_xi, new_m_sq = xi + step[0], m_sq * math.exp(step[1])
        new_norm = float(residual_norm(params, new_xi, new_m_sq))
        if not new_norm < best:
            break
        xi, m_sq, best = new_xi, new_m_sq, new_norm
    return xi, m_sq


def _solution(
    params: ModelParams, xi: float, m_sq: float, branch: Branch
) -> GapSolution:
    xi, m_sq = _polish(params, xi, m_sq)
    residual = float(residual_norm(params, xi, m_sq))
    if residual > residual_tolerance(params):
        logger.warning(
            "%s solution of %r has residual %.3e above tolerance",
            branch.value,
            params,
            residual,
        )
    return GapSolution(
        xi=xi,
        m_sq=m_sq,
        branch=branch,
        energy=vacuum_energy(params, xi, m_sq),
        residual=residual,
    )


def solve_symmetric(params: ModelParams) -> GapSolution:
    lam, sigma = params.lam, params.sigma
    s = math.log(math.pi * params.m0_sq / (3.0 * lam)) + (
        2.0 * math.pi * sigma / (3.0 * lam)
    )
    m_sq = 3.0 * lam / math.pi * lambert_w0_exp(s)
    return _solution(params, 0.0, m_sq, Branch.SYMMETRIC)


def _is_mean_field(params: ModelParams, t: float) -> bool:
    if params.sigma >= 0:
        return False
    z = 2.0 * math.pi * params.sigma / (3.0 * params.lam)
    same_mass = abs(params.m0_sq + 4.0 * params.sigma) <= 1e-12 * params.scale
    return same_mass and abs(t - z) <= 1e-9 * abs(z)


def _branch_values(s: float) -> List[Tuple[BranchId, float]]:
    out = []
    if s > _LOG_UNDERFLOW:
        out.append((BranchId.PRINCIPAL, lambert_w(-math.exp(s))))
    out.append((BranchId.MINUS_ONE, lambert_wm1_negexp(s)))
    return out


def solve_broken(params: ModelParams) -> List[GapSolution]:
    """
    All real solutions with ``xi != 0``, in ``(+xi, -xi)`` pairs, principal
    branch first. Empty when the Lambert argument is below ``-1/e``.
    """
    s = log_branch_magnitude(params)
    if s > -1.0:
        return []

    solutions: List[GapSolution] = []
    seen: Optional[float] = None
    for branch_id, t in _branch_values(s):
        if not t < 0.0 or (seen is not None and abs(t - seen) <= 1e-12 * abs(t)):
            continue
        seen = t
        xi_sq = -3.0 * t / (4.0 * math.pi)
        m_sq = 8.0 * params.lam * xi_sq
        if _is_mean_field(params, t):
            branch = Branch.MEAN_FIELD
        elif branch_id is BranchId.PRINCIPAL:
            branch = Branch.BROKEN_W0
        else:
            branch = Branch.BROKEN_WM1
        xi = math.sqrt(xi_sq)
        for sign in (1.0, -1.0):
            solutions.append(_solution(params, sign * xi, m_sq, branch))
    return solutions


def solve_closed_form(params: ModelParams) -> List[GapSolution]:
    return [solve_symmetric(params)] + solve_broken(params)
