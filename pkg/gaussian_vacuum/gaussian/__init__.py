from .field import FieldPolynomial, random_field_polynomial
from .identities import (
    IdentityReport,
    OrthogonalityReport,
    appell_power,
    check_orthogonality,
    generating_function_check,
    ibp_first,
    ibp_second,
    wick_derivative_commute,
    wick_power,
    wick_recursion_defect,
)
from .measures import GaussianMeasure, MixtureMeasure, moment, random_measure

__all__ = [
    "FieldPolynomial",
    "GaussianMeasure",
    "IdentityReport",
    "MixtureMeasure",
    "OrthogonalityReport",
    "appell_power",
    "check_orthogonality",
    "generating_function_check",
    "ibp_first",
    "ibp_second",
    "moment",
    "random_field_polynomial",
    "random_measure",
    "wick_derivative_commute",
    "wick_power",
    "wick_recursion_defect",
]
