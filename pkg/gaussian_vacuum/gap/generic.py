"""
Gap solver for arbitrary bounded-below polynomial potentials.

All seeds are iterated together: each sweep evaluates the residual and its
Jacobian in ``(xi, ln m^2)`` for the whole batch and takes a Newton step,
halved until the simplified Newton correction at the trial point (old
Jacobian) is shorter than the full step. Iteration ends on a negligible
step, so ``xi`` keeps being refined after the residual itself is tiny.
Points with a small mass are finally polished in exact arithmetic.
"""
import dataclasses
import math
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..energy import vacuum_energy
from ..exceptions import DomainError
from ..models import Branch, GapSolution, Model, Theory, as_theory
from ..util import get_logger, get_setting
from .residual import (
    EIGHT_PI,
    exact_gap_system,
    gap_residual,
    log_mass_jacobian,
    residual_tolerance,
)

logger = get_logger(__name__)

MAX_ITERATIONS = 60
MAX_HALVINGS = 10
MAX_POLISH_STEPS = 12
# largest allowed Newton step in ln m^2 before damping
_MAX_LOG_STEP = 4.0
_LOG_LIMIT = 700.0
_STEP_TOLERANCE = 1e-13
# exact polishing applies below this fraction of the model scale
_EXACT_BELOW = 1e-4

# curve seeding: xi magnitudes per side and the ln m^2 scan grid
_CURVE_POINTS = 96
_SCAN = np.linspace(-690.0, 690.0, 553)
_BISECTIONS = 60


@dataclasses.dataclass
class GenericSolveResult:
    solutions: List[GapSolution]
    seeds: int
    converged: int
    failures: Dict[str, int]

    def __iter__(self) -> Iterator[GapSolution]:
        return iter(self.solutions)

    def __len__(self) -> int:
        return len(self.solutions)

    def __getitem__(self, index: int) -> GapSolution:
        return self.solutions[index]

    def report(self) -> Dict[str, Any]:
        return {
            "seeds": self.seeds,
            "converged": self.converged,
            "distinct": len(self.solutions),
            "failures": dict(sorted(self.failures.items())),
        }


def _xi_extent(theory: Theory) -> float:
    critical = theory.potential.real_critical_points()
    return max([100.0] + [10.0 * abs(c) for c in critical])


def grid_seeds(model: Model) -> Tuple[np.ndarray, np.ndarray]:
    """
    Seed grid over ``(xi, ln m^2)``: zero and log-spaced magnitudes of both
    signs for ``xi``, ``ln(m^2/m0^2)`` in ``[-30, 30]``, plus each classical
    minimum with its classical mass.
    """
    theory = as_theory(model)
    magnitudes = np.logspace(-3.0, 2.0, 11)
    xi_values = np.concatenate([-magnitudes[::-1], [0.0], magnitudes])
    log_values = math.log(theory.m0_sq) + np.linspace(-30.0, 30.0, 13)
    xi, u = (a.ravel() for a in np.meshgrid(xi_values, log_values))

    p = theory.potential
    second = p.deriv(2)
    extra = [
        (c, math.log(second(c))) for c in p.real_critical_points() if second(c) > 0
    ]
    if extra:
        xi = np.concatenate([xi, [e[0] for e in extra]])
        u = np.concatenate([u, [e[1] for e in extra]])
    return xi, u


def _mass_roots(
    theory: Theory, xi_grid: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    # every bracketed root in ln m^2 of the second gap equation, per xi
    X, U = np.meshgrid(xi_grid, _SCAN, indexing="ij")
    _, r2 = gap_residual(theory, X, np.exp(U))
    sign = np.sign(r2)
    rows, cols = np.nonzero(sign[:, :-1] * sign[:, 1:] < 0)
    x = xi_grid[rows]
    lo, hi = _SCAN[cols], _SCAN[cols + 1]
    lo_sign = sign[rows, cols]
    for _ in range(_BISECTIONS):
        mid = 0.5 * (lo + hi)
        _, r_mid = gap_residual(theory, x, np.exp(mid))
        same = np.sign(r_mid) == lo_sign
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return rows, x, 0.5 * (lo + hi)


def curve_seeds(model: Model) -> Tuple[np.ndarray, np.ndarray]:
    """
    Seeds on the curve where the mass equation ``V_Y''(xi) = m^2`` holds.

    Along a log-spaced ``xi`` grid every root in ``ln m^2`` is bracketed
    over ``[-690, 690]`` and bisected, which puts ``xi = 0`` seeds on the
    symmetric mass wherever it lies. The curve points are seeds, and so is
    the interpolated zero of ``V_Y'(xi)`` between neighbours carrying the
    same number of roots.
    """
    theory = as_theory(model)
    magnitudes = np.logspace(-12.0, math.log10(_xi_extent(theory)), _CURVE_POINTS)
    xi_grid = np.concatenate([-magnitudes[::-1], [0.0], magnitudes])
    with np.errstate(all="ignore"):
        rows, x, u = _mass_roots(theory, xi_grid)
        r1, _ = gap_residual(theory, x, np.exp(u))
    r1 = np.asarray(r1, dtype=float)

    on_row: Dict[int, List[Tuple[float, float, float]]] = {}
    for row, xi, m, r in zip(rows.tolist(), x.tolist(), u.tolist(), r1.tolist()):
        on_row.setdefault(row, []).append((xi, m, r))

    xi_seeds, u_seeds = x.tolist(), u.tolist()
    for row, here in on_row.items():
        after = on_row.get(row + 1)
        if after is None or len(after) != len(here):
            continue
        for (xa, ua, ra), (xb, ub, rb) in zip(here, after):
            if ra * rb < 0:
                w = ra / (ra - rb)
                xi_seeds.append(xa + w * (xb - xa))
                u_seeds.append(ua + w * (ub - ua))
    return np.array(xi_seeds), np.array(u_seeds)


def default_seeds(model: Model) -> Tuple[np.ndarray, np.ndarray]:
    xi_grid, u_grid = grid_seeds(model)
    xi_curve, u_curve = curve_seeds(model)
    return np.concatenate([xi_grid, xi_curve]), np.concatenate([u_grid, u_curve])


def _merit(model: Model, xi: np.ndarray, u: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        r1, r2 = gap_residual(model, xi, np.exp(np.clip(u, -_LOG_LIMIT, _LOG_LIMIT)))
        merit = np.asarray(r1) ** 2 + np.asarray(r2) ** 2
    return np.where(np.isfinite(merit), merit, np.inf)


def _direction(
    jac: np.ndarray, r1: np.ndarray, r2: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    dxi = -(jac[:, 1, 1] * r1 - jac[:, 0, 1] * r2) / det
    du = -(jac[:, 0, 0] * r2 - jac[:, 1, 0] * r1) / det
    return dxi, du


def _newton_batch(
    model: Model, xi: np.ndarray, u: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    xi, u = xi.astype(float).copy(), u.astype(float).copy()
    active = np.isfinite(_merit(model, xi, u))

    with np.errstate(all="ignore"):
        for _ in range(MAX_ITERATIONS):
            if not np.any(active):
                break
            idx = np.flatnonzero(active)
            x, v = xi[idx], u[idx]
            r1, r2 = gap_residual(model, x, np.exp(v))
            jac = log_mass_jacobian(model, x, v)
            dxi, du = _direction(jac, np.asarray(r1), np.asarray(r2))
            singular = ~(np.isfinite(dxi) & np.isfinite(du))
            dxi = np.where(singular, 0.0, dxi)
            du = np.where(singular, 0.0, du)
            negligible = (np.abs(dxi) <= _STEP_TOLERANCE * np.abs(x)) & (
                np.abs(du) <= _STEP_TOLERANCE * np.maximum(1.0, np.abs(v))
            )

            length = np.hypot(dxi, du)
            shrink = np.maximum.reduce(
                [
                    np.ones_like(x),
                    np.abs(du) / _MAX_LOG_STEP,
                    np.abs(dxi) / (1.0 + np.abs(x)),
                ]
            )
            # damping factor of the full Newton step
            alpha = 1.0 / shrink
            accepted = np.zeros(idx.size, dtype=bool)
            for _ in range(MAX_HALVINGS):
                pending = ~accepted & ~singular & ~negligible
                if not np.any(pending):
                    break
                tx = x + alpha * dxi
                tv = np.clip(v + alpha * du, -_LOG_LIMIT, _LOG_LIMIT)
                t1, t2 = gap_residual(model, tx, np.exp(tv))
                sx, su = _direction(jac, np.asarray(t1), np.asarray(t2))
                simplified = np.hypot(sx, su)
                ok = (
                    pending
                    & np.isfinite(simplified)
                    & (simplified <= (1.0 - 0.25 * alpha) * length)
                )
                accepted |= ok
                alpha = np.where(accepted, alpha, 0.5 * alpha)

            step = np.where(negligible, 1.0, np.where(accepted, alpha, 0.0))
            xi[idx] = x + step * dxi
            u[idx] = np.clip(v + step * du, -_LOG_LIMIT, _LOG_LIMIT)
            active[idx] = accepted & ~negligible
        capped = active

    return xi, u, capped


def _polish_exact(theory: Theory, xi: float, u: float) -> Optional[Tuple[float, float]]:
    # the smearing Y carries the ln m^2 coordinate as an exact rational
    log_m0_sq = math.log(theory.m0_sq)
    Y = Fraction((log_m0_sq - u) / EIGHT_PI)
    for _ in range(MAX_POLISH_STEPS):
        u = log_m0_sq - EIGHT_PI * float(Y)
        if not abs(u) < _LOG_LIMIT:
            break
        residual, jac = exact_gap_system(theory, xi, u, smearing=Y)
        try:
            dxi, du = np.linalg.solve(jac, -residual)
        except np.linalg.LinAlgError:
            break
        if not (math.isfinite(dxi) and math.isfinite(du)):
            break
        xi = xi + float(dxi)
        Y = Y - Fraction(float(du) / EIGHT_PI)
        settled = abs(dxi) <= 1e-12 * abs(xi) or abs(xi) < 1e-200
        if settled and abs(du) <= 1e-12 * max(1.0, abs(u)):
            return xi, log_m0_sq - EIGHT_PI * float(Y)
    return None


Point = Tuple[float, float]


def _is_new(point: Point, kept: List[Point], tolerance: float) -> bool:
    xi, u = point
    return all(
        abs(xi - a) > tolerance * max(1.0, abs(xi))
        or abs(u - b) > tolerance * max(1.0, abs(u))
        for a, b in kept
    )


def _deduplicate(
    points: List[Point], residuals: List[float], tolerance: float
) -> List[Point]:
    # best residual first, so a cluster is represented by its most exact point
    ranked = sorted(zip(residuals, points), key=lambda e: (e[0], abs(e[1][0])))
    kept: List[Point] = []
    for _, point in ranked:
        if _is_new(point, kept, tolerance):
            kept.append(point)
    return kept


def _refine(theory: Theory, point: Point, tolerance: float) -> Optional[Point]:
    # below the threshold the float residual no longer tells a root from a
    # point near the mass curve, so only an exactly converged point survives
    xi, u = point
    if math.exp(u) >= _EXACT_BELOW * theory.scale:
        return point
    polished = _polish_exact(theory, xi, u)
    if polished is None or abs(polished[1]) >= _LOG_LIMIT:
        return None
    if _residual_at(theory, *polished) <= tolerance:
        return polished
    return None


def solve_generic(
    model: Model,
    seeds: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> GenericSolveResult:
    """
    Damped Newton from a grid of seeds; returns every distinct converged
    solution sorted by ``xi``. When nothing converges the result is empty and
    its ``report()`` says why.
    """
    theory = as_theory(model)
    if not theory.is_bounded_below():
        raise DomainError(
            "solve_generic needs an even-degree potential "
            "with positive leading coefficient",
            value=theory.potential.coeffs,
        )
    tolerance = residual_tolerance(theory)
    xi0, u0 = seeds if seeds is not None else default_seeds(theory)
    xi, u, capped = _newton_batch(theory, np.asarray(xi0), np.asarray(u0))

    merit = _merit(theory, xi, u)
    converged = merit <= tolerance**2
    failures = {
        "diverged": int(np.count_nonzero(~np.isfinite(merit))),
        "stalled": int(np.count_nonzero(~converged & ~capped & np.isfinite(merit))),
        "iteration_cap": int(np.count_nonzero(capped & ~converged)),
    }

    dedup = get_setting("GAUSSIAN_VACUUM_DEDUP_TOLERANCE", 1e-8)
    points = list(zip(xi[converged].tolist(), u[converged].tolist()))
    points = _deduplicate(points, merit[converged].tolist(), dedup)
    refined = [
        p for p in (_refine(theory, p, tolerance) for p in points) if p is not None
    ]
    distinct = _deduplicate(
        refined, [_residual_at(theory, *p) for p in refined], dedup
    )

    if theory.potential.is_even:
        for x, m in list(distinct):
            mirrored = (-x, m)
            if _residual_at(theory, -x, m) <= tolerance and _is_new(
                mirrored, distinct, dedup
            ):
                distinct.append(mirrored)

    solutions = []
    for x, m in sorted(distinct):
        m_sq = math.exp(m)
        residual = _residual_at(theory, x, m)
        solutions.append(
            GapSolution(
                xi=x,
                m_sq=m_sq,
                branch=Branch.GENERIC,
                energy=vacuum_energy(theory, x, m_sq),
                residual=residual,
            )
        )

    result = GenericSolveResult(
        solutions=solutions,
        seeds=int(np.size(xi0)),
        converged=int(np.count_nonzero(converged)),
        failures=failures,
    )
    if not solutions:
        logger.warning("solve_generic found no solution: %s", result.report())
    else:
        logger.debug("solve_generic: %s", result.report())
    return result


def _residual_at(model: Model, xi: float, u: float) -> float:
    r1, r2 = gap_residual(model, xi, math.exp(u))
    return float(math.hypot(r1, r2))
