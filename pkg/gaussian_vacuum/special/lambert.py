import enum
import math

from ..exceptions import ConvergenceError, DomainError

BRANCH_POINT = -math.exp(-1.0)
MAX_ITERATIONS = 50

# below this z the series around the branch point is the better starting guess
_BRANCH_SERIES_LIMIT = -0.25


class BranchId(enum.Enum):
    PRINCIPAL = "principal"
    MINUS_ONE = "minus_one"


def in_domain(z: float, branch: BranchId) -> bool:
    if branch is BranchId.PRINCIPAL:
        return z >= BRANCH_POINT
    return BRANCH_POINT <= z < 0.0


def _initial_guess(z: float, branch: BranchId) -> float:
    if z < _BRANCH_SERIES_LIMIT:
        p = math.sqrt(2.0 * (math.e * z + 1.0))
        if branch is BranchId.MINUS_ONE:
            p = -p
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3

    if branch is BranchId.MINUS_ONE:
        l1 = math.log(-z)
        l2 = math.log(-l1)
        return l1 - l2 + l2 / l1

    if z < 3.0:
        return math.log1p(z)
    l1 = math.log(z)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def lambert_w(z: float, branch: BranchId = BranchId.PRINCIPAL) -> float:
    """
    Real branches of the Lambert W function, the inverse of ``w * exp(w)``.

    The principal branch covers ``z >= -1/e`` and returns ``w >= -1``; the
    ``MINUS_ONE`` branch covers ``-1/e <= z < 0`` and returns ``w <= -1``.
    Starts from a branch-point series or log asymptotics and refines with
    Halley's method.
    """
    z = float(z)
    if math.isnan(z) or not in_domain(z, branch):
        raise DomainError(
            f"lambert_w({z!r}) is outside the domain of the {branch.value} branch",
            value=z,
            branch_point=BRANCH_POINT,
        )
    if z == 0.0:
        return 0.0
    if math.e * z + 1.0 <= 0.0:
        return -1.0
    if math.isinf(z):
        return math.inf

    w = _initial_guess(z, branch)
    for _ in range(MAX_ITERATIONS):
        ew = math.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        if wp1 == 0.0:
            return w
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 1e-15 * (1.0 + abs(w)):
            return w

    raise ConvergenceError(
        f"lambert_w[{branch.value}]({z!r})",
        iterations=MAX_ITERATIONS,
        achieved=abs(w * math.exp(w) - z),
    )


def _newton_log_form(s: float, w: float, sign: float, routine: str) -> float:
    # solves w + log(sign * w) = s
    for _ in range(MAX_ITERATIONS):
        step = (w + math.log(sign * w) - s) / (1.0 + 1.0 / w)
        w -= step
        if abs(step) <= 1e-15 * abs(w):
            return w
    raise ConvergenceError(routine, iterations=MAX_ITERATIONS)


def lambert_w0_exp(s: float) -> float:
    """``W0(exp(s))`` without forming ``exp(s)``, for arguments that overflow."""
    if s < 700.0:
        return lambert_w(math.exp(s))
    return _newton_log_form(s, s - math.log(s), 1.0, f"lambert_w0_exp({s!r})")


def lambert_wm1_negexp(s: float) -> float:
    """``W-1(-exp(s))`` for ``s <= -1`` without forming ``exp(s)``."""
    if s > -1.0:
        raise DomainError(
            f"lambert_wm1_negexp({s!r}) is beyond the branch point",
            value=s,
            branch_point=BRANCH_POINT,
        )
    if s > -700.0:
        return lambert_w(-math.exp(s), BranchId.MINUS_ONE)
    return _newton_log_form(s, s - math.log(-s), -1.0, f"lambert_wm1_negexp({s!r})")
