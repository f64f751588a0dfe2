"""
Finite-dimensional Gaussian measures and their exact polynomial moments.

Moments follow the Isserlis recursion with a mean::

    E[phi_i phi^a] = mean_i E[phi^a] + sum_j C_ij a_j E[phi^(a - e_j)]

memoized per measure on the exponent tuple.
"""
import math
from typing import Dict, List, Sequence, Union

import numpy as np

from ..exceptions import DomainError
from .field import MAX_DEGREE, Exponent, FieldPolynomial, Number, as_number

MAX_DIMENSION = 6


class GaussianMeasure:
    """
    Gaussian measure on ``R^n`` with the given mean and covariance.

    Entries may be ``Fraction`` so that moments of polynomials with rational
    coefficients come out exact.
    """

    def __init__(self, mean: Sequence[Number], cov: Sequence[Sequence[Number]]):
        n = len(mean)
        if not 1 <= n <= MAX_DIMENSION:
            raise DomainError(
                f"dimension must be between 1 and {MAX_DIMENSION}", value=n
            )
        if len(cov) != n or any(len(row) != n for row in cov):
            raise DomainError("covariance must be an n x n matrix", value=cov)
        numeric = np.array([[float(c) for c in row] for row in cov])
        if not np.allclose(numeric, numeric.T, rtol=0.0, atol=1e-14):
            raise DomainError("covariance must be symmetric", value=cov)
        if np.min(np.linalg.eigvalsh(numeric)) <= 0:
            raise DomainError("covariance must be positive definite", value=cov)
        self.mean = tuple(as_number(m) for m in mean)
        self.cov = tuple(tuple(as_number(c) for c in row) for row in cov)
        self._moments: Dict[Exponent, Number] = {(0,) * n: 1}

    @property
    def dimension(self) -> int:
        return len(self.mean)

    def mean_of(self, f: Sequence[Number]) -> Number:
        """``(mean, f)``."""
        return sum(fi * mi for fi, mi in zip(f, self.mean))

    def covariance(self, f: Sequence[Number], g: Sequence[Number]) -> Number:
        """``C(f, g) = f^T C g``."""
        return sum(
            f[i] * self.cov[i][j] * g[j]
            for i in range(self.dimension)
            for j in range(self.dimension)
        )

    def numeric_mean(self) -> np.ndarray:
        return np.array([float(m) for m in self.mean])

    def numeric_cov(self) -> np.ndarray:
        return np.array([[float(c) for c in row] for row in self.cov])

    def monomial_moment(self, exponent: Exponent) -> Number:
        cached = self._moments.get(exponent)
        if cached is not None:
            return cached
        i = next(k for k, e in enumerate(exponent) if e)
        lowered = list(exponent)
        lowered[i] -= 1
        rest = tuple(lowered)
        value = self.mean[i] * self.monomial_moment(rest)
        for j, power in enumerate(rest):
            if power and self.cov[i][j] != 0:
                pair = list(rest)
                pair[j] -= 1
                value += self.cov[i][j] * power * self.monomial_moment(tuple(pair))
        self._moments[exponent] = value
        return value

    def expectation(self, p: FieldPolynomial) -> Number:
        return sum(
            (
                coeff * self.monomial_moment(exponent)
                for exponent, coeff in p.terms.items()
            ),
            0,
        )

    def __repr__(self) -> str:
        return f"GaussianMeasure(mean={self.mean!r}, cov={self.cov!r})"


class MixtureMeasure:
    """
    Finite mixture of Gaussian measures: not Gaussian unless trivial, but
    its polynomial moments are still exact.
    """

    def __init__(
        self, components: Sequence[GaussianMeasure], weights: Sequence[Number]
    ):
        if not components or len(components) != len(weights):
            raise DomainError("need one weight per component")
        if any(w < 0 for w in weights) or not math.isclose(float(sum(weights)), 1.0):
            raise DomainError("mixture weights must be non-negative and sum to one")
        dims = {c.dimension for c in components}
        if len(dims) != 1:
            raise DomainError("mixture components must share a dimension")
        self.components: List[GaussianMeasure] = list(components)
        self.weights = tuple(weights)

    @property
    def dimension(self) -> int:
        return self.components[0].dimension

    def expectation(self, p: FieldPolynomial) -> Number:
        return sum(
            (w * c.expectation(p) for w, c in zip(self.weights, self.components)), 0
        )


Measure = Union[GaussianMeasure, MixtureMeasure]


def moment(measure: Measure, p: FieldPolynomial) -> Number:
    """Exact expectation of ``p``; rejects polynomials above the degree cap."""
    if p.nvars != measure.dimension:
        raise DomainError("polynomial and measure dimensions differ", value=p.nvars)
    if p.degree > MAX_DEGREE:
        raise DomainError(
            f"degree {p.degree} exceeds the cap {MAX_DEGREE}", value=p.degree
        )
    return measure.expectation(p)


def random_measure(
    rng: np.random.Generator, dimension: int, mean_scale: float = 1.0
) -> GaussianMeasure:
    """Random mean and a well-conditioned random covariance."""
    a = rng.standard_normal((dimension, dimension))
    cov = a @ a.T / dimension + 0.5 * np.eye(dimension)
    cov = 0.5 * (cov + cov.T)
    mean = mean_scale * rng.standard_normal(dimension)
    return GaussianMeasure(mean.tolist(), cov.tolist())
