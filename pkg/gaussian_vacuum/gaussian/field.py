import numbers
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import DomainError

MAX_DEGREE = 10

Number = Union[int, float, Fraction]
Exponent = Tuple[int, ...]


def _is_scalar(value: object) -> bool:
    return isinstance(value, numbers.Number)


def as_number(value: Number) -> Number:
    """Keep exact ints and fractions, turn everything else into a float."""
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return value
    return float(value)


class FieldPolynomial:
    """
    Polynomial in the components ``phi_0 .. phi_{n-1}`` of a finite-dimensional
    field, stored as ``{exponent tuple: coefficient}``.

    Coefficients may be ``Fraction`` for exact identities; zero coefficients
    are dropped so that ``==`` compares polynomials, not representations.
    """

    __slots__ = ("nvars", "terms")
    # numpy scalars on the left defer to our reflected operators
    __array_ufunc__ = None

    def __init__(self, terms: Mapping[Exponent, Number], nvars: int):
        cleaned: Dict[Exponent, Number] = {}
        for exponent, coeff in terms.items():
            if len(exponent) != nvars or any(e < 0 for e in exponent):
                raise DomainError(f"bad exponent {exponent!r} for {nvars} variables")
            if coeff != 0:
                cleaned[tuple(exponent)] = coeff
        degree = max((sum(e) for e in cleaned), default=0)
        if degree > MAX_DEGREE:
            raise DomainError(
                f"total degree {degree} exceeds the cap {MAX_DEGREE}", value=degree
            )
        self.nvars = nvars
        self.terms = cleaned

    @classmethod
    def constant(cls, value: Number, nvars: int) -> "FieldPolynomial":
        return cls({(0,) * nvars: value}, nvars)

    @classmethod
    def variable(cls, index: int, nvars: int) -> "FieldPolynomial":
        exponent = [0] * nvars
        exponent[index] = 1
        return cls({tuple(exponent): 1}, nvars)

    @classmethod
    def linear(cls, f: Sequence[Number], shift: Number = 0) -> "FieldPolynomial":
        """``phi(f) - shift`` with ``phi(f) = sum_i f_i phi_i``."""
        nvars = len(f)
        terms: Dict[Exponent, Number] = {(0,) * nvars: -as_number(shift)}
        for i, fi in enumerate(f):
            exponent = [0] * nvars
            exponent[i] = 1
            terms[tuple(exponent)] = as_number(fi)
        return cls(terms, nvars)

    def _promote(self, other: object) -> "FieldPolynomial":
        if isinstance(other, FieldPolynomial):
            if other.nvars != self.nvars:
                raise DomainError("polynomials live in different dimensions")
            return other
        if _is_scalar(other):
            return FieldPolynomial.constant(other, self.nvars)
        return NotImplemented

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        other = self._promote(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: object) -> "FieldPolynomial":
        other = self._promote(other)
        if other is NotImplemented:
            return NotImplemented
        terms = dict(self.terms)
        for exponent, coeff in other.terms.items():
            terms[exponent] = terms.get(exponent, 0) + coeff
        return FieldPolynomial(terms, self.nvars)

    __radd__ = __add__

    def __neg__(self) -> "FieldPolynomial":
        return FieldPolynomial({k: -v for k, v in self.terms.items()}, self.nvars)

    def __sub__(self, other: object) -> "FieldPolynomial":
        other = self._promote(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: object) -> "FieldPolynomial":
        return (-self) + other

    def __mul__(self, other: object) -> "FieldPolynomial":
        if _is_scalar(other):
            scaled = {k: other * v for k, v in self.terms.items()}
            return FieldPolynomial(scaled, self.nvars)
        other = self._promote(other)
        if other is NotImplemented:
            return NotImplemented
        terms: Dict[Exponent, Number] = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                terms[k] = terms.get(k, 0) + v1 * v2
        return FieldPolynomial(terms, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "FieldPolynomial":
        if n < 0:
            raise DomainError("negative powers are not polynomials", value=n)
        result = FieldPolynomial.constant(1, self.nvars)
        for _ in range(n):
            result = result * self
        return result

    def deriv(self, index: int) -> "FieldPolynomial":
        terms: Dict[Exponent, Number] = {}
        for exponent, coeff in self.terms.items():
            power = exponent[index]
            if power:
                lowered = list(exponent)
                lowered[index] -= 1
                terms[tuple(lowered)] = power * coeff
        return FieldPolynomial(terms, self.nvars)

    def max_abs_coeff(self) -> float:
        return max((abs(float(v)) for v in self.terms.values()), default=0.0)

    def allclose(self, other: "FieldPolynomial", atol: float = 1e-12) -> bool:
        return (self - other).max_abs_coeff() <= atol

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values at an ``(N, nvars)`` array of field configurations."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        total = np.zeros(points.shape[0])
        for exponent, coeff in self.terms.items():
            total += float(coeff) * np.prod(points ** np.array(exponent), axis=1)
        return total

    def __repr__(self) -> str:
        if not self.terms:
            return "FieldPolynomial(0)"
        parts = []
        for exponent, coeff in sorted(self.terms.items()):
            names = "".join(
                f"phi{i}" if e == 1 else f"phi{i}^{e}"
                for i, e in enumerate(exponent)
                if e
            )
            parts.append(f"{coeff}*{names}" if names else f"{coeff}")
        return "FieldPolynomial(" + " + ".join(parts) + ")"


def random_field_polynomial(
    rng: np.random.Generator,
    nvars: int,
    degree: int,
    terms: int = 6,
    exponents: Optional[Iterable[Exponent]] = None,
) -> FieldPolynomial:
    """Random monomials of total degree at most ``degree``, N(0,1) coefficients."""
    out: Dict[Exponent, Number] = {}
    chosen: List[Exponent] = list(exponents) if exponents is not None else []
    if exponents is None:
        for _ in range(terms):
            d = int(rng.integers(0, degree + 1))
            picks = rng.integers(0, nvars, size=d)
            counts = (int(np.count_nonzero(picks == i)) for i in range(nvars))
            chosen.append(tuple(counts))
    for exponent in chosen:
        out[exponent] = out.get(exponent, 0.0) + float(rng.standard_normal())
    return FieldPolynomial(out, nvars)
