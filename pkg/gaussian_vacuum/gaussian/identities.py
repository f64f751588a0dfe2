"""
Wick powers and the integration-by-parts identities of Gaussian measures,
checked on finite-dimensional polynomials.

Every check returns a report; a failed identity never raises.
"""
import dataclasses
import math
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

from ..exceptions import DomainError
from .field import FieldPolynomial, Number
from .measures import GaussianMeasure, Measure, moment

MAX_WICK_ORDER = 10
MAX_ORTHOGONALITY_ORDER = 5


@dataclasses.dataclass
class IdentityReport:
    name: str
    lhs: Any
    rhs: Any
    defect: float
    tolerance: float
    details: Dict[str, Any] = dataclasses.field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.defect <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "lhs": _plain(self.lhs),
            "rhs": _plain(self.rhs),
            "defect": self.defect,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "details": {k: _plain(v) for k, v in self.details.items()},
        }


def _plain(value: Any) -> Any:
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, FieldPolynomial):
        return {
            ",".join(map(str, k)): float(v) for k, v in sorted(value.terms.items())
        }
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _scale(*values: Number) -> float:
    return max([1.0] + [abs(float(v)) for v in values])


def _check_vector(measure: Measure, f: Sequence[Number]) -> None:
    if len(f) != measure.dimension:
        raise DomainError("test function and measure dimensions differ", value=len(f))


def wick_power(mu: GaussianMeasure, f: Sequence[Number], n: int) -> FieldPolynomial:
    """
    ``:phi(f)^n:`` with respect to ``mu``, from its generating function
    ``exp(a (phi(f) - (mean, f)) - a^2 C(f, f) / 2)``::

        sum_k n! / (k! (n-2k)!) (-C(f,f)/2)^k (phi(f) - (mean, f))^(n-2k)
    """
    if not 0 <= n <= MAX_WICK_ORDER:
        raise DomainError(f"Wick order must be in [0, {MAX_WICK_ORDER}]", value=n)
    _check_vector(mu, f)
    centred = FieldPolynomial.linear(f, mu.mean_of(f))
    c = mu.covariance(f, f)
    half = Fraction(1, 2) if isinstance(c, (int, Fraction)) else 0.5
    result = FieldPolynomial.constant(0, mu.dimension)
    for k in range(n // 2 + 1):
        weight = math.factorial(n) // (math.factorial(k) * math.factorial(n - 2 * k))
        result = result + weight * (-c * half) ** k * centred ** (n - 2 * k)
    return result


def appell_power(measure: Measure, f: Sequence[Number], n: int) -> FieldPolynomial:
    """
    ``:phi(f)^n:`` defined by ``exp(a phi(f)) / <exp(a phi(f))>`` for any
    measure with finite moments. Agrees with ``wick_power`` for Gaussians.
    """
    if not 0 <= n <= MAX_WICK_ORDER:
        raise DomainError(f"Wick order must be in [0, {MAX_WICK_ORDER}]", value=n)
    _check_vector(measure, f)
    x = FieldPolynomial.linear(f)
    moments = [moment(measure, x**j) for j in range(n + 1)]
    # series coefficients of 1 / <exp(a X)>, times k!
    inverse: List[Number] = [1]
    for k in range(1, n + 1):
        inverse.append(
            -sum(math.comb(k, j) * inverse[j] * moments[k - j] for j in range(k))
        )
    return sum(
        (math.comb(n, k) * inverse[k] * x ** (n - k) for k in range(n + 1)),
        FieldPolynomial.constant(0, measure.dimension),
    )


@dataclasses.dataclass
class OrthogonalityReport:
    matrix: List[List[float]]
    expected_diagonal: List[float]
    max_off_diagonal: float
    max_diagonal_defect: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return (
            self.max_off_diagonal <= self.tolerance
            and self.max_diagonal_defect <= self.tolerance
        )

    def to_dict(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        data["passed"] = self.passed
        return data


def check_orthogonality(
    measure: Measure,
    nmax: int,
    f: Optional[Sequence[Number]] = None,
    g: Optional[Sequence[Number]] = None,
    tolerance: float = 1e-10,
) -> OrthogonalityReport:
    """
    The matrix ``<:phi(f)^n: :phi(g)^m:>`` for ``n, m <= nmax``; for a
    Gaussian it is diagonal with entries ``n! C(f, g)^n``. ``f`` and ``g``
    default to the first coordinate direction. Non-Gaussian measures use
    ``appell_power`` and, with ``C`` their covariance, generally fail.
    """
    if not 0 <= nmax <= MAX_ORTHOGONALITY_ORDER:
        raise DomainError(f"nmax must be in [0, {MAX_ORTHOGONALITY_ORDER}]", value=nmax)
    n_dim = measure.dimension
    f = list(f) if f is not None else [1.0] + [0.0] * (n_dim - 1)
    g = list(g) if g is not None else list(f)

    if isinstance(measure, GaussianMeasure):
        powers_f = [wick_power(measure, f, n) for n in range(nmax + 1)]
        powers_g = [wick_power(measure, g, n) for n in range(nmax + 1)]
        c_fg = measure.covariance(f, g)
    else:
        powers_f = [appell_power(measure, f, n) for n in range(nmax + 1)]
        powers_g = [appell_power(measure, g, n) for n in range(nmax + 1)]
        c_fg = _mixture_covariance(measure, f, g)

    matrix = [[float(moment(measure, pf * pg)) for pg in powers_g] for pf in powers_f]
    expected = [float(math.factorial(n) * c_fg**n) for n in range(nmax + 1)]
    off = [
        abs(matrix[i][j]) / _scale(expected[i], expected[j])
        for i in range(nmax + 1)
        for j in range(nmax + 1)
        if i != j
    ]
    diag = [
        abs(matrix[i][i] - expected[i]) / _scale(expected[i]) for i in range(nmax + 1)
    ]
    return OrthogonalityReport(
        matrix=matrix,
        expected_diagonal=expected,
        max_off_diagonal=max(off, default=0.0),
        max_diagonal_defect=max(diag, default=0.0),
        tolerance=tolerance,
    )


def _mixture_covariance(
    measure: Measure, f: Sequence[Number], g: Sequence[Number]
) -> Number:
    x = FieldPolynomial.linear(f)
    y = FieldPolynomial.linear(g)
    return moment(measure, x * y) - moment(measure, x) * moment(measure, y)


def _covariance_derivative(
    mu: GaussianMeasure, f: Sequence[Number], r: FieldPolynomial
) -> FieldPolynomial:
    """``sum_ij f_i C_ij dR/dphi_j``."""
    n = mu.dimension
    total = FieldPolynomial.constant(0, n)
    for j in range(n):
        weight = sum(f[i] * mu.cov[i][j] for i in range(n))
        if weight != 0:
            total = total + weight * r.deriv(j)
    return total


def ibp_first(
    mu: GaussianMeasure,
    f: Sequence[Number],
    r: FieldPolynomial,
    tolerance: float = 1e-10,
) -> IdentityReport:
    """``<:phi(f): R> = <f C dR/dphi>``."""
    lhs = moment(mu, wick_power(mu, f, 1) * r)
    rhs = moment(mu, _covariance_derivative(mu, f, r))
    return IdentityReport(
        name="ibp_first",
        lhs=lhs,
        rhs=rhs,
        defect=abs(float(lhs - rhs)),
        tolerance=tolerance * _scale(lhs, rhs, r.max_abs_coeff()),
    )


def wick_recursion_defect(
    mu: GaussianMeasure, f: Sequence[Number], n: int
) -> FieldPolynomial:
    """
    ``:phi^n: - (:phi: :phi^(n-1): - (n-1) C(f,f) :phi^(n-2):)``, the zero
    polynomial for ``n >= 2``.
    """
    c = mu.covariance(f, f)
    return wick_power(mu, f, n) - (
        wick_power(mu, f, 1) * wick_power(mu, f, n - 1)
        - (n - 1) * c * wick_power(mu, f, n - 2)
    )


def ibp_second(
    mu: GaussianMeasure,
    f: Sequence[Number],
    n: int,
    r: FieldPolynomial,
    tolerance: float = 1e-10,
) -> IdentityReport:
    """
    ``<:phi(f)^n: R> = <:phi(f)^(n-1): f C dR/dphi>``, together with the
    recursion ``:phi^n: = :phi: :phi^(n-1): - (n-1) C(f,f) :phi^(n-2):`` as
    polynomials.
    """
    if n < 1:
        raise DomainError("ibp_second needs n >= 1", value=n)
    lhs = moment(mu, wick_power(mu, f, n) * r)
    rhs = moment(mu, wick_power(mu, f, n - 1) * _covariance_derivative(mu, f, r))
    recursion = wick_recursion_defect(mu, f, n).max_abs_coeff() if n >= 2 else 0.0
    scale = _scale(lhs, rhs, r.max_abs_coeff())
    return IdentityReport(
        name="ibp_second",
        lhs=lhs,
        rhs=rhs,
        defect=max(abs(float(lhs - rhs)), recursion),
        tolerance=tolerance * scale,
        details={"n": n, "recursion_defect": recursion},
    )


def wick_derivative_commute(
    mu: GaussianMeasure, f: Sequence[Number], n: int, j: int, tolerance: float = 0.0
) -> IdentityReport:
    """
    ``d/dphi_j :phi(f)^n: = n f_j :phi(f)^(n-1):`` coefficient by coefficient.
    With rational inputs the default zero tolerance demands exact equality.
    """
    lhs = wick_power(mu, f, n).deriv(j)
    if n == 0:
        rhs = FieldPolynomial.constant(0, mu.dimension)
    else:
        rhs = n * f[j] * wick_power(mu, f, n - 1)
    return IdentityReport(
        name="wick_derivative_commute",
        lhs=lhs,
        rhs=rhs,
        defect=(lhs - rhs).max_abs_coeff(),
        tolerance=tolerance,
        details={"n": n, "j": j, "exact": lhs == rhs},
    )


def generating_function_check(
    mu: GaussianMeasure, f: Sequence[Number], order: int = 8, tolerance: float = 1e-10
) -> IdentityReport:
    """
    Series coefficients of ``<exp(a phi(f))>`` against those of
    ``exp(a (mean, f) + a^2 C(f, f) / 2)`` through ``a^order``.
    """
    x = FieldPolynomial.linear(f)
    shift = float(mu.mean_of(f))
    c = float(mu.covariance(f, f))
    lhs, rhs = [], []
    for k in range(order + 1):
        lhs.append(float(moment(mu, x**k)) / math.factorial(k))
        rhs.append(
            sum(
                shift ** (k - 2 * j)
                / math.factorial(k - 2 * j)
                * (c / 2.0) ** j
                / math.factorial(j)
                for j in range(k // 2 + 1)
            )
        )
    defect = max(abs(a - b) / _scale(a, b) for a, b in zip(lhs, rhs))
    return IdentityReport(
        name="generating_function",
        lhs=lhs,
        rhs=rhs,
        defect=defect,
        tolerance=tolerance,
        details={"order": order},
    )
