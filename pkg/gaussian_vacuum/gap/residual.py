import math
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from ..exceptions import DomainError
from ..models import Model, as_theory
from ..util import get_setting
from ..wick import ArrayLike, smeared_derivative

EIGHT_PI = 8.0 * math.pi


def gap_residual(
    model: Model, xi: ArrayLike, m_sq: ArrayLike
) -> Tuple[ArrayLike, ArrayLike]:
    """
    ``(V_Y'(xi), V_Y''(xi) - m^2)`` with ``V_Y = smear(V, ln(m0^2/m^2)/8pi)``.

    Both components vanish exactly at a solution of the gap equations.
    Broadcasts over arrays of ``xi`` and ``m_sq``.
    """
    theory = as_theory(model)
    m_sq = np.asarray(m_sq, dtype=float)
    if np.any(~(m_sq > 0)):
        raise DomainError("gap_residual needs m_sq > 0", value=m_sq)
    Y = np.log(theory.m0_sq / m_sq) / EIGHT_PI
    r1 = smeared_derivative(theory.potential, Y, xi, 1)
    r2 = smeared_derivative(theory.potential, Y, xi, 2) - m_sq
    if np.ndim(r2) == 0:
        return r1, float(r2)
    return r1, r2


def residual_norm(model: Model, xi: ArrayLike, m_sq: ArrayLike) -> ArrayLike:
    r1, r2 = gap_residual(model, xi, m_sq)
    return np.hypot(r1, r2)


def residual_tolerance(model: Model) -> float:
    relative = get_setting("GAUSSIAN_VACUUM_RESIDUAL_TOLERANCE", 1e-10)
    return relative * as_theory(model).scale


def log_mass_jacobian(model: Model, xi: ArrayLike, log_m_sq: ArrayLike) -> np.ndarray:
    """
    Jacobian of the residual with respect to ``(xi, ln m^2)``, shaped
    ``(..., 2, 2)``.
    """
    theory = as_theory(model)
    p = theory.potential
    u = np.asarray(log_m_sq, dtype=float)
    Y = (math.log(theory.m0_sq) - u) / EIGHT_PI
    v2, v3, v4 = (smeared_derivative(p, Y, xi, k) for k in (2, 3, 4))
    v2, v3, v4 = np.broadcast_arrays(v2, v3, v4)
    jac = np.empty(v2.shape + (2, 2))
    jac[..., 0, 0] = v2
    jac[..., 0, 1] = -v3 / EIGHT_PI
    jac[..., 1, 0] = v3
    jac[..., 1, 1] = -v4 / EIGHT_PI - np.exp(u)
    return jac


def _exact_smeared_derivative(
    coeffs: Sequence[Fraction], Y: Fraction, x: Fraction, k: int
) -> Fraction:
    total = Fraction(0)
    degree = len(coeffs) - 1
    for j in range(0, (degree - k) // 2 + 1):
        order = 2 * j + k
        value = sum(
            (
                c * math.perm(i, order) * x ** (i - order)
                for i, c in enumerate(coeffs)
                if i >= order
            ),
            Fraction(0),
        )
        total += Y**j / math.factorial(j) * value
    return total


def exact_gap_system(
    model: Model,
    xi: float,
    log_m_sq: float,
    smearing: Optional[Fraction] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Residual and ``(xi, ln m^2)`` Jacobian at one point, summed in rational
    arithmetic and rounded once.

    The float evaluation cancels terms of size ``|V''|`` down to ``m^2`` and
    cannot place ``xi`` once ``m^2`` nears the rounding of those terms.
    ``smearing`` supplies ``Y`` exactly; otherwise it is taken from
    ``log_m_sq`` in floats.
    """
    theory = as_theory(model)
    coeffs = [Fraction(c) for c in theory.potential.coeffs]
    if smearing is None:
        Y = Fraction((math.log(theory.m0_sq) - log_m_sq) / EIGHT_PI)
    else:
        Y = smearing
    x = Fraction(xi)
    m_sq = Fraction(math.exp(log_m_sq))
    v1, v2, v3, v4 = (_exact_smeared_derivative(coeffs, Y, x, k) for k in range(1, 5))
    residual = np.array([float(v1), float(v2 - m_sq)])
    jac = np.array(
        [
            [float(v2), -float(v3) / EIGHT_PI],
            [float(v3), -float(v4) / EIGHT_PI - float(m_sq)],
        ]
    )
    return residual, jac
