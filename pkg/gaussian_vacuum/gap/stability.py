"""
Stability of gap solutions.

A solution is a stationary point of the vacuum energy over ``(xi, Y)``; its
local character comes from the signs of the Hessian. A local minimum whose
energy lies above another local minimum is a false vacuum and is labelled
``unstable`` as well.
"""
import enum
from typing import Iterable, List, Optional, Sequence

import numpy as np

from ..energy import energy_hessian, vacuum_energy
from ..models import GapSolution, Model, ModelParams, Stability, as_theory
from ..util import get_logger
from .closed_form import solve_closed_form
from .generic import solve_generic

logger = get_logger(__name__)

MARGINAL_TOLERANCE = 1e-12


class LocalCharacter(enum.Enum):
    MINIMUM = "minimum"
    MAXIMUM = "maximum"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


def local_character(model: Model, sol: GapSolution) -> LocalCharacter:
    theory = as_theory(model)
    hessian = energy_hessian(theory, sol.xi, sol.m_sq)
    det = float(np.linalg.det(hessian))
    if abs(det) <= MARGINAL_TOLERANCE * theory.scale**2:
        logger.warning(
            "degenerate energy Hessian at xi=%r m_sq=%r (det=%.3e)",
            sol.xi,
            sol.m_sq,
            det,
        )
        return LocalCharacter.DEGENERATE
    if det < 0:
        return LocalCharacter.SADDLE
    if np.trace(hessian) > 0:
        return LocalCharacter.MINIMUM
    return LocalCharacter.MAXIMUM


def find_solutions(model: Model) -> List[GapSolution]:
    """Closed forms for the phi^4 model, the generic solver otherwise."""
    if isinstance(model, ModelParams):
        return solve_closed_form(model)
    return list(solve_generic(model))


def _energy(model: Model, sol: GapSolution) -> float:
    if sol.energy is not None:
        return sol.energy
    return vacuum_energy(model, sol.xi, sol.m_sq)


def classify_stability(
    model: Model, sol: GapSolution, others: Optional[Iterable[GapSolution]] = None
) -> Stability:
    """
    ``stable`` for the lowest local minimum, ``unstable`` for local maxima and
    false vacua, ``saddle`` for indefinite Hessians and ``marginal`` when the
    Hessian is degenerate. ``others`` defaults to every solution of ``model``.
    """
    character = local_character(model, sol)
    if character is LocalCharacter.DEGENERATE:
        return Stability.MARGINAL
    if character is LocalCharacter.SADDLE:
        return Stability.SADDLE
    if character is LocalCharacter.MAXIMUM:
        return Stability.UNSTABLE

    if others is None:
        others = find_solutions(model)
    energy = _energy(model, sol)
    slack = 1e-12 * as_theory(model).scale
    for other in others:
        if _energy(model, other) < energy - slack and (
            local_character(model, other) is LocalCharacter.MINIMUM
        ):
            return Stability.UNSTABLE
    return Stability.STABLE


def rank_solutions(model: Model, solutions: Sequence[GapSolution]) -> List[GapSolution]:
    """Label every solution and sort by energy, ties broken by ``xi``."""
    labelled = [
        sol.replace(
            stability=classify_stability(model, sol, solutions),
            energy=_energy(model, sol),
        )
        for sol in solutions
    ]
    return sorted(labelled, key=lambda s: (s.energy, s.xi))


def solve_all(model: Model) -> List[GapSolution]:
    return rank_solutions(model, find_solutions(model))


def selected_phase(solutions: Sequence[GapSolution]) -> Optional[GapSolution]:
    """Lowest-energy stable solution of an already ranked list."""
    for sol in solutions:
        if sol.stability is Stability.STABLE:
            return sol
    return None
