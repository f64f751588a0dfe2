import logging
from typing import Any, Callable, Tuple

from django.conf import settings
from scipy import integrate

from .exceptions import QuadratureError

MASS_SQ = "mass^2"
MASS = "mass"
LENGTH = "length"
DIMENSIONLESS = "dimensionless"


def get_setting(name: str, default: Any) -> Any:
    """
    Read a ``GAUSSIAN_VACUUM_*`` setting, falling back to ``default`` when
    Django settings have not been configured (plain library use).
    """
    if not settings.configured:
        return default
    return getattr(settings, name, default)


def get_logger(name: str = "gaussian_vacuum") -> logging.Logger:
    return logging.getLogger(get_setting("GAUSSIAN_VACUUM_LOGGER", name))


def fd_step(x: float) -> float:
    return 1e-5 * max(1.0, abs(x))


def richardson_derivative(f: Callable[[float], float], x: float) -> float:
    """
    Central difference with one level of Richardson extrapolation,
    step ``1e-5 * max(1, |x|)``.
    """
    h = fd_step(x)

    def central(step: float) -> float:
        return (f(x + step) - f(x - step)) / (2.0 * step)

    return (4.0 * central(h / 2.0) - central(h)) / 3.0


def integrate_checked(
    func: Callable[[float], float],
    a: float,
    b: float,
    routine: str,
    rel: float = 1e-12,
    accept: float = 1e-9,
    **kwargs: Any,
) -> Tuple[float, float]:
    """
    ``scipy.integrate.quad`` that reports through its return value instead of
    warnings, raising ``QuadratureError`` when the error estimate exceeds
    ``accept`` relative to the value.
    """
    out = integrate.quad(
        func,
        a,
        b,
        epsabs=1e-15,
        epsrel=rel,
        limit=kwargs.pop("limit", 400),
        full_output=1,
        **kwargs,
    )
    value, error = out[0], out[1]
    if not (error <= accept * abs(value) or error <= 1e-14):
        raise QuadratureError(routine, achieved=error)
    return value, error
