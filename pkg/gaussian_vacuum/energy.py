"""
Gaussian vacuum-energy density and its derivatives.

With ``Y = ln(m0^2/m^2) / 8pi`` the energy per unit area of the Gaussian
ansatz with mean ``xi`` and mass ``m`` is::

    eps(xi, m^2) = smear(V, Y)(xi) + (m^2 - m0^2) / 8pi

Its stationary points are exactly the gap solutions.
"""
import dataclasses
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import optimize

from .exceptions import ConvergenceError, DomainError, GridBoundaryError
from .models import (
    Branch,
    EnergyPoint,
    GapSolution,
    Model,
    Stability,
    Theory,
    as_theory,
)
from .util import (
    DIMENSIONLESS,
    MASS_SQ,
    get_logger,
    get_setting,
    integrate_checked,
    richardson_derivative,
)
from .wick import (
    ArrayLike,
    OrderingShift,
    Polynomial,
    smeared_derivative,
    t_coefficient,
)

logger = get_logger(__name__)

EIGHT_PI = 8.0 * math.pi


def _check_masses(m_sq: ArrayLike, m0_sq: float) -> None:
    if np.any(np.asarray(m_sq) <= 0) or m0_sq <= 0:
        raise DomainError("masses squared must be positive", value=(m_sq, m0_sq))


def smearing_parameter(m0_sq: float, m_sq: ArrayLike) -> ArrayLike:
    return np.log(m0_sq / np.asarray(m_sq, dtype=float)) / EIGHT_PI


def mass_from_shift(m0_sq: float, Y: ArrayLike) -> ArrayLike:
    return m0_sq * np.exp(-EIGHT_PI * np.asarray(Y, dtype=float))


def vacuum_energy(model: Model, xi: ArrayLike, m_sq: ArrayLike) -> ArrayLike:
    theory = as_theory(model)
    _check_masses(m_sq, theory.m0_sq)
    Y = smearing_parameter(theory.m0_sq, m_sq)
    value = smeared_derivative(theory.potential, Y, xi, 0) + (
        np.asarray(m_sq) - theory.m0_sq
    ) / EIGHT_PI
    if np.ndim(value) == 0:
        return float(value)
    return value


def energy_in_shift(model: Model, xi: ArrayLike, Y: ArrayLike) -> ArrayLike:
    """``eps`` as a function of ``(xi, Y)`` instead of ``(xi, m^2)``."""
    theory = as_theory(model)
    return vacuum_energy(theory, xi, mass_from_shift(theory.m0_sq, Y))


def trace_term(m_sq: float, m0_sq: float) -> float:
    """
    Per-area trace ``(1/4pi)(m^2 - m0^2 - m^2 ln(m^2/m0^2))``; never positive,
    zero only at ``m^2 = m0^2``.
    """
    _check_masses(m_sq, m0_sq)
    return (m_sq - m0_sq - m_sq * math.log(m_sq / m0_sq)) / (4.0 * math.pi)


def trace_term_oracle(m_sq: float, m0_sq: float) -> Tuple[float, float]:
    """
    The same trace as a radial momentum integral,
    ``(1/2pi) int k dk [log1p(D/(k^2+m0^2)) - D/(k^2+m0^2)]`` with
    ``D = m^2 - m0^2``. Returns ``(value, error estimate)``.
    """
    _check_masses(m_sq, m0_sq)
    delta = m_sq - m0_sq

    def integrand(s: float) -> float:
        x = delta / (s + m0_sq)
        return math.log1p(x) - x

    # k dk = ds / 2 with s = k^2
    value, error = integrate_checked(integrand, 0.0, np.inf, "trace_term_oracle")
    return value / (4.0 * math.pi), error / (4.0 * math.pi)


def subtracted_potential(model: Model, xi: float, m_sq: float) -> Polynomial:
    """``V(x) - (m^2/2)(x - xi)^2``, what the Gaussian ansatz leaves over."""
    theory = as_theory(model)
    quadratic = Polynomial((-0.5 * m_sq * xi * xi, m_sq * xi, -0.5 * m_sq))
    return theory.potential + quadratic


def energy_gradient(model: Model, xi: float, m_sq: float) -> Tuple[float, float]:
    """Analytic ``(d eps/d xi, d eps/d Y)`` = ``(V_Y'(xi), V_Y''(xi) - m^2)``."""
    theory = as_theory(model)
    _check_masses(m_sq, theory.m0_sq)
    Y = smearing_parameter(theory.m0_sq, m_sq)
    p = theory.potential
    return (
        smeared_derivative(p, Y, xi, 1),
        smeared_derivative(p, Y, xi, 2) - m_sq,
    )


def energy_hessian_exact(model: Model, xi: float, m_sq: float) -> np.ndarray:
    theory = as_theory(model)
    Y = smearing_parameter(theory.m0_sq, m_sq)
    p = theory.potential
    v2, v3, v4 = (smeared_derivative(p, Y, xi, k) for k in (2, 3, 4))
    return np.array([[v2, v3], [v3, v4 + EIGHT_PI * m_sq]])


def energy_hessian(model: Model, xi: float, m_sq: float) -> np.ndarray:
    """
    Hessian of ``eps`` over ``(xi, Y)`` by Richardson central differences of
    the analytic gradient, symmetrized.
    """
    theory = as_theory(model)
    Y0 = float(smearing_parameter(theory.m0_sq, m_sq))

    def gradient(x: float, y: float) -> Tuple[float, float]:
        return energy_gradient(theory, x, float(mass_from_shift(theory.m0_sq, y)))

    h = np.empty((2, 2))
    h[0, 0] = richardson_derivative(lambda x: gradient(x, Y0)[0], xi)
    h[1, 0] = richardson_derivative(lambda x: gradient(x, Y0)[1], xi)
    h[0, 1] = richardson_derivative(lambda y: gradient(xi, y)[0], Y0)
    h[1, 1] = richardson_derivative(lambda y: gradient(xi, y)[1], Y0)
    return 0.5 * (h + h.T)


@dataclasses.dataclass(frozen=True)
class GradientReport:
    xi: float
    m_sq: float
    Y: float
    de_dxi: float
    t1: float
    de_dY: float
    t2: float
    decomposition_defect: float
    tolerance: float

    @property
    def defect_xi(self) -> float:
        return abs(self.de_dxi - self.t1)

    @property
    def defect_Y(self) -> float:
        return abs(self.de_dY - 2.0 * self.t2)

    @property
    def ratio(self) -> float:
        """``(d eps/d Y) / T2``; 2 up to rounding away from stationary points."""
        if self.t2 == 0.0:
            return math.nan
        return self.de_dY / self.t2

    @property
    def passed(self) -> bool:
        return (
            self.defect_xi <= self.tolerance * max(1.0, abs(self.t1))
            and self.defect_Y <= self.tolerance * max(1.0, abs(self.t2))
            and self.decomposition_defect <= self.tolerance
        )

    def to_dict(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        data.update(
            defect_xi=self.defect_xi,
            defect_Y=self.defect_Y,
            passed=self.passed,
            units={k: MASS_SQ for k in ("m_sq", "de_dxi", "t1", "de_dY", "t2")},
        )
        data["units"].update(xi=DIMENSIONLESS, Y=DIMENSIONLESS)
        return data


def gradient_equivalence_check(
    model: Model, xi: float, m_sq: float, tolerance: float = 1e-6
) -> GradientReport:
    """
    Compare finite-difference derivatives of ``eps`` with the Wick coefficients
    of the subtracted potential: ``d eps/d xi = T1`` and ``d eps/d Y = 2 T2``.
    Also checks ``eps = T0 + trace_term / 2``.
    """
    theory = as_theory(model)
    _check_masses(m_sq, theory.m0_sq)
    Y = float(smearing_parameter(theory.m0_sq, m_sq))
    shift = OrderingShift(Y=Y, xi=xi)
    v_tilde = subtracted_potential(theory, xi, m_sq)

    de_dxi = richardson_derivative(lambda x: energy_in_shift(theory, x, Y), xi)
    de_dY = richardson_derivative(lambda y: energy_in_shift(theory, xi, y), Y)

    eps = vacuum_energy(theory, xi, m_sq)
    t0 = t_coefficient(v_tilde, shift, 0)
    decomposition = abs(eps - t0 - 0.5 * trace_term(m_sq, theory.m0_sq))

    return GradientReport(
        xi=xi,
        m_sq=m_sq,
        Y=Y,
        de_dxi=de_dxi,
        t1=t_coefficient(v_tilde, shift, 1),
        de_dY=de_dY,
        t2=t_coefficient(v_tilde, shift, 2),
        decomposition_defect=decomposition / max(1.0, abs(eps)),
        tolerance=tolerance,
    )


@dataclasses.dataclass(frozen=True)
class EnergyGrid:
    """
    Rectangle in ``(xi, ln(m^2/m0^2))``. ``xi`` spans ``xi_factor`` times the
    largest classical minimum (at least 1) on either side of zero unless
    ``xi_range`` is given.
    """

    points: int = 201
    xi_factor: float = 5.0
    log_ratio: float = 6.0
    xi_range: Optional[Tuple[float, float]] = None

    @classmethod
    def from_settings(cls, **overrides: Any) -> "EnergyGrid":
        options = dict(get_setting("GAUSSIAN_VACUUM_ENERGY_GRID", {}))
        options.update(overrides)
        return cls(**options)

    def xi_bounds(self, model: Model) -> Tuple[float, float]:
        if self.xi_range is not None:
            return self.xi_range
        p = as_theory(model).potential
        minima = [abs(c) for c in p.real_critical_points() if p.deriv(2)(c) > 0]
        guess = max([1.0] + minima)
        return -self.xi_factor * guess, self.xi_factor * guess

    def axes(self, model: Model) -> Tuple[np.ndarray, np.ndarray]:
        if self.points < 3:
            raise DomainError(
                "an energy grid needs at least 3 points per axis", value=self.points
            )
        lo, hi = self.xi_bounds(model)
        xi = np.linspace(lo, hi, self.points)
        log_ratio = np.linspace(-self.log_ratio, self.log_ratio, self.points)
        return xi, log_ratio


SURFACE_COLUMNS = ("xi", "m_sq", "epsilon")


def energy_surface(
    model: Model, grid: Optional[EnergyGrid] = None
) -> List[EnergyPoint]:
    theory = as_theory(model)
    grid = grid or EnergyGrid.from_settings()
    xi, log_ratio = grid.axes(theory)
    m_sq = theory.m0_sq * np.exp(log_ratio)
    eps = vacuum_energy(theory, xi[None, :], m_sq[:, None])
    return [
        EnergyPoint(xi=float(x), m_sq=float(m), epsilon=float(eps[i, j]))
        for i, m in enumerate(m_sq)
        for j, x in enumerate(xi)
    ]


def surface_table(points: List[EnergyPoint]) -> Dict[str, Any]:
    return {
        "columns": list(SURFACE_COLUMNS),
        "rows": [[p.xi, p.m_sq, p.epsilon] for p in points],
    }


def _newton_polish(
    theory: Theory, xi: float, Y: float, max_iterations: int = 50
) -> Tuple[float, float]:
    for _ in range(max_iterations):
        m_sq = float(mass_from_shift(theory.m0_sq, Y))
        g = np.array(energy_gradient(theory, xi, m_sq))
        step = np.linalg.solve(energy_hessian_exact(theory, xi, m_sq), -g)
        xi, Y = xi + step[0], Y + step[1]
        if abs(step[0]) <= 1e-14 * (1.0 + abs(xi)) and abs(step[1]) <= 1e-14 * (
            1.0 + abs(Y)
        ):
            return xi, Y
    raise ConvergenceError("minimize_energy Newton polish", iterations=max_iterations)


def minimize_energy(
    model: Model, grid: Optional[EnergyGrid] = None, sweeps: int = 3
) -> GapSolution:
    """
    Brute-force minimizer: grid argmin over ``(xi, ln m^2)``, coordinate
    descent in ``(xi, Y)`` then Newton on the gradient.

    Raises ``GridBoundaryError`` when the grid minimum lies on its edge and
    ``ConvergenceError`` when the polished stationary point is not a minimum.
    """
    theory = as_theory(model)
    grid = grid or EnergyGrid.from_settings()
    xi_axis, log_axis = grid.axes(theory)
    m_axis = theory.m0_sq * np.exp(log_axis)
    eps = vacuum_energy(theory, xi_axis[None, :], m_axis[:, None])

    i, j = np.unravel_index(int(np.argmin(eps)), eps.shape)
    if i in (0, grid.points - 1) or j in (0, grid.points - 1):
        raise GridBoundaryError(
            "minimize_energy", location=(float(xi_axis[j]), float(m_axis[i]))
        )

    xi = float(xi_axis[j])
    Y = float(smearing_parameter(theory.m0_sq, m_axis[i]))
    dxi = xi_axis[1] - xi_axis[0]
    dY = (log_axis[1] - log_axis[0]) / EIGHT_PI
    for _ in range(sweeps):
        xi = optimize.minimize_scalar(
            lambda x: energy_in_shift(theory, x, Y),
            bounds=(xi - dxi, xi + dxi),
            method="bounded",
            options={"xatol": 1e-12},
        ).x
        Y = optimize.minimize_scalar(
            lambda y: energy_in_shift(theory, xi, y),
            bounds=(Y - dY, Y + dY),
            method="bounded",
            options={"xatol": 1e-12},
        ).x

    xi, Y = _newton_polish(theory, float(xi), float(Y))
    m_sq = float(mass_from_shift(theory.m0_sq, Y))
    if np.any(np.linalg.eigvalsh(energy_hessian_exact(theory, xi, m_sq)) <= 0):
        logger.warning(
            "minimize_energy: Newton polish left the basin at xi=%r m_sq=%r", xi, m_sq
        )
        raise ConvergenceError("minimize_energy (polished point is not a minimum)")
    r = np.hypot(*energy_gradient(theory, xi, m_sq))
    return GapSolution(
        xi=xi,
        m_sq=m_sq,
        branch=Branch.GENERIC,
        stability=Stability.STABLE,
        energy=vacuum_energy(theory, xi, m_sq),
        residual=float(r),
    )
