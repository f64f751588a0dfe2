"""
Polynomial potentials and changes of Wick ordering.

A change of normal-ordering mass from ``m0`` to ``m`` acts on a potential as
the heat operator ``exp(Y d^2/dx^2)`` with ``Y = ln(m0^2/m^2) / 8pi``; moving
the mean to ``xi`` then re-expands the smeared potential around ``xi``.
"""
import json
import math
from dataclasses import dataclass
from typing import List, Union

import numpy as np
from numpy.polynomial import polynomial as P

from .exceptions import DomainError

MAX_DEGREE = 16

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class Polynomial:
    """
    Dense real polynomial, ``coeffs[k]`` multiplies ``x**k``.
    Trailing zeros are trimmed on construction.
    """

    coeffs: tuple

    def __post_init__(self) -> None:
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if coeffs.ndim != 1:
            raise DomainError("polynomial coefficients must be a flat sequence")
        if coeffs.size == 0:
            coeffs = np.zeros(1)
        if not np.all(np.isfinite(coeffs)):
            raise DomainError(
                "polynomial coefficients must be finite", value=self.coeffs
            )
        coeffs = P.polytrim(coeffs)
        if coeffs.size - 1 > MAX_DEGREE:
            raise DomainError(
                f"polynomial degree {coeffs.size - 1} exceeds the cap {MAX_DEGREE}",
                value=coeffs.size - 1,
            )
        object.__setattr__(self, "coeffs", tuple(float(c) for c in coeffs))

    @classmethod
    def phi4(cls, lam: float, sigma: float) -> "Polynomial":
        return cls((0.0, 0.0, sigma, 0.0, lam))

    @classmethod
    def free(cls, m_sq: float) -> "Polynomial":
        return cls((0.0, 0.0, 0.5 * m_sq))

    @classmethod
    def from_json(cls, value: Union[str, bytes]) -> "Polynomial":
        data = json.loads(value)
        if not isinstance(data, list):
            raise DomainError(
                "a polynomial is a JSON array of coefficients", value=data
            )
        return cls(tuple(data))

    def to_json(self) -> str:
        return json.dumps(list(self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_even(self) -> bool:
        return all(c == 0.0 for c in self.coeffs[1::2])

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return P.polyval(x, self.coeffs)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(tuple(P.polyadd(self.coeffs, other.coeffs)))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(tuple(P.polysub(self.coeffs, other.coeffs)))

    def __mul__(self, scalar: float) -> "Polynomial":
        return Polynomial(tuple(np.asarray(self.coeffs) * scalar))

    __rmul__ = __mul__

    def deriv(self, m: int = 1) -> "Polynomial":
        return Polynomial(tuple(P.polyder(self.coeffs, m)))

    def allclose(self, other: "Polynomial", atol: float = 1e-12) -> bool:
        a = np.zeros(max(len(self.coeffs), len(other.coeffs)))
        b = a.copy()
        a[: len(self.coeffs)] = self.coeffs
        b[: len(other.coeffs)] = other.coeffs
        return bool(np.allclose(a, b, rtol=0.0, atol=atol))

    def real_critical_points(self) -> List[float]:
        if self.degree < 2:
            return []
        roots = P.polyroots(P.polyder(self.coeffs))
        return sorted(float(r.real) for r in roots if abs(r.imag) < 1e-9)


@dataclass(frozen=True)
class OrderingShift:
    """
    The pair (Y, xi) defining a change of Wick ordering: Gaussian smearing
    parameter ``Y`` and field mean ``xi``. The variance shift is ``2 Y``.
    """

    Y: float
    xi: float = 0.0

    @classmethod
    def from_masses(cls, m0_sq: float, m_sq: float, xi: float = 0.0) -> "OrderingShift":
        if m0_sq <= 0 or m_sq <= 0:
            raise DomainError("masses squared must be positive", value=(m0_sq, m_sq))
        return cls(Y=math.log(m0_sq / m_sq) / (8.0 * math.pi), xi=xi)

    @property
    def delta(self) -> float:
        return 2.0 * self.Y

    def inverse(self) -> "OrderingShift":
        return OrderingShift(Y=-self.Y, xi=-self.xi)


def smear(p: Polynomial, Y: float) -> Polynomial:
    """
    Apply ``exp(Y d^2/dx^2)`` to ``p``. The series terminates at
    ``j = deg // 2`` so the result is exact.
    """
    out = np.array(p.coeffs)
    for j in range(1, p.degree // 2 + 1):
        d = P.polyder(p.coeffs, 2 * j) * (Y**j / math.factorial(j))
        out[: len(d)] += d
    return Polynomial(tuple(out))


def smeared_derivative(
    p: Polynomial, Y: ArrayLike, xi: ArrayLike, k: int = 0
) -> ArrayLike:
    """
    ``(d/dx)^k smear(p, Y)`` evaluated at ``xi``; broadcasts over arrays
    of ``Y`` and ``xi`` so batched solvers avoid rebuilding polynomials.
    """
    Y = np.asarray(Y, dtype=float)
    xi = np.asarray(xi, dtype=float)
    total = np.zeros(np.broadcast(Y, xi).shape)
    for j in range(0, (p.degree - k) // 2 + 1):
        d = P.polyder(p.coeffs, 2 * j + k)
        total = total + (Y**j / math.factorial(j)) * P.polyval(xi, d)
    if total.ndim == 0:
        return float(total)
    return total


def t_coefficient(p: Polynomial, shift: OrderingShift, k: int) -> float:
    """
    Coefficient of ``:phi^k:`` after re-ordering ``:p(phi):_{m0}`` around
    ``shift``: ``(1/k!) smear(p, Y)^(k)(xi)``. Zero for ``k > deg p``.
    """
    if k < 0:
        raise DomainError("coefficient index must be non-negative", value=k)
    if k > p.degree:
        return 0.0
    return smeared_derivative(p, shift.Y, shift.xi, k) / math.factorial(k)


def reorder(p: Polynomial, shift: OrderingShift) -> Polynomial:
    return Polynomial(tuple(t_coefficient(p, shift, k) for k in range(p.degree + 1)))
