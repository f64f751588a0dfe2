"""
Verification suites run by ``gaussian-vacuum verify``.

A suite is a callable ``suite(rng) -> SuiteReport``. Suites are looked up
through the ``GAUSSIAN_VACUUM_VERIFY_SUITES`` setting so projects can add
their own. Every random draw comes from ``rng``, so a seed fixes the report
byte for byte.
"""
import dataclasses
import math
import zlib
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from django.core.exceptions import ImproperlyConfigured
from django.utils.module_loading import import_string
from scipy import special

from . import corrections
from .energy import (
    gradient_equivalence_check,
    minimize_energy,
    trace_term,
    trace_term_oracle,
)
from .exceptions import ConvergenceError
from .gap import solve_all, solve_broken, solve_closed_form, solve_generic
from .gaussian import (
    GaussianMeasure,
    MixtureMeasure,
    check_orthogonality,
    generating_function_check,
    ibp_first,
    ibp_second,
    random_field_polynomial,
    random_measure,
    wick_derivative_commute,
    wick_recursion_defect,
)
from .models import Branch, ModelParams, Stability
from .special import (
    BRANCH_POINT,
    BranchId,
    bessel_k0e,
    bessel_k1e,
    lambert_w,
)
from .special.bessel import (
    ASYMPTOTIC_LIMIT,
    SERIES_LIMIT,
    asymptotic_scaled,
    integral_scaled,
    series_scaled,
)
from .util import get_logger, get_setting

logger = get_logger(__name__)

DEFAULT_SUITES = {
    "special": "gaussian_vacuum.verify.special_suite",
    "gradient": "gaussian_vacuum.verify.gradient_suite",
    "appendix": "gaussian_vacuum.verify.appendix_suite",
    "integrals": "gaussian_vacuum.verify.integrals_suite",
    "gap": "gaussian_vacuum.verify.gap_suite",
}


@dataclasses.dataclass
class SuiteReport:
    name: str
    checks: List[Dict[str, Any]] = dataclasses.field(default_factory=list)
    details: Dict[str, Any] = dataclasses.field(default_factory=dict)

    def add(self, name: str, passed: bool, **values: Any) -> None:
        if not passed:
            logger.warning("check %s/%s failed: %r", self.name, name, values)
        self.checks.append({"name": name, "passed": bool(passed), **values})

    @property
    def passed(self) -> bool:
        return all(check["passed"] for check in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": self.checks,
            "details": self.details,
        }


Suite = Callable[[np.random.Generator], SuiteReport]


@dataclasses.dataclass
class VerificationReport:
    seed: int
    suites: List[SuiteReport]

    @property
    def passed(self) -> bool:
        return all(suite.passed for suite in self.suites)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "passed": self.passed,
            "suites": {suite.name: suite.to_dict() for suite in self.suites},
        }


def get_suites() -> Dict[str, Suite]:
    paths = get_setting("GAUSSIAN_VACUUM_VERIFY_SUITES", DEFAULT_SUITES)
    suites = {}
    for name, path in paths.items():
        try:
            suites[name] = import_string(path)
        except ImportError as e:
            raise ImproperlyConfigured(
                f"could not import verification suite {name!r}: {e}"
            )
    return suites


def suite_rng(seed: int, name: str) -> np.random.Generator:
    """Independent stream per suite, so filtering suites leaves each one unchanged."""
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def run_verification(
    suites: Optional[List[str]] = None, seed: Optional[int] = None
) -> VerificationReport:
    seed = get_setting("GAUSSIAN_VACUUM_DEFAULT_SEED", 42) if seed is None else seed
    available = get_suites()
    names = sorted(available) if not suites else list(suites)
    unknown = [n for n in names if n not in available]
    if unknown:
        raise ImproperlyConfigured(
            f"unknown verification suite(s) {unknown!r}; "
            f"available: {sorted(available)!r}"
        )
    reports = []
    for name in names:
        logger.info("running verification suite %s (seed %d)", name, seed)
        report = available[name](suite_rng(seed, name))
        report.name = name
        reports.append(report)
    return VerificationReport(seed=seed, suites=reports)


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


# special functions


def _lambert_points(branch: BranchId, count: int) -> np.ndarray:
    if branch is BranchId.PRINCIPAL:
        half = count // 2
        negative = -np.geomspace(1e-12, -BRANCH_POINT, count - half)
        return np.concatenate([negative, np.geomspace(1e-12, 1e12, half)])
    return -np.geomspace(1e-300, -BRANCH_POINT, count)


def special_suite(rng: np.random.Generator, points: int = 10_000) -> SuiteReport:
    report = SuiteReport("special")
    for branch in BranchId:
        worst, at = 0.0, 0.0
        for z in _lambert_points(branch, points):
            z = float(z)
            w = lambert_w(z, branch)
            defect = abs(w * math.exp(w) - z) / max(1.0, abs(z))
            if defect > worst:
                worst, at = defect, z
        report.add(
            f"lambert_{branch.value}",
            worst <= 1e-13,
            max_defect=worst,
            at=at,
            points=points,
        )

    for seam, left, right in (
        (SERIES_LIMIT, series_scaled, integral_scaled),
        (ASYMPTOTIC_LIMIT, integral_scaled, asymptotic_scaled),
    ):
        x = seam * (1.0 + np.linspace(-1e-3, 1e-3, 21))
        worst = max(
            float(np.max(np.abs(a - b) / np.abs(b))) for a, b in zip(left(x), right(x))
        )
        report.add(f"bessel_seam_{seam:g}", worst <= 1e-12, max_defect=worst)

    x = np.sort(np.exp(rng.uniform(math.log(1e-6), math.log(500.0), 2000)))
    k0 = float(np.max(np.abs(bessel_k0e(x) / special.k0e(x) - 1.0)))
    k1 = float(np.max(np.abs(bessel_k1e(x) / special.k1e(x) - 1.0)))
    report.add("bessel_k0_reference", k0 <= 1e-11, max_defect=k0)
    report.add("bessel_k1_reference", k1 <= 1e-11, max_defect=k1)
    return report


# energy gradient


def random_model(rng: np.random.Generator) -> ModelParams:
    return ModelParams(
        lam=float(rng.uniform(0.1, 2.0)),
        sigma=float(rng.uniform(-2.0, 2.0)),
        m0_sq=float(rng.uniform(0.5, 4.0)),
    )


def gradient_suite(rng: np.random.Generator, trials: int = 100) -> SuiteReport:
    report = SuiteReport("gradient")
    failures = []
    worst = 0.0
    for _ in range(trials):
        params = random_model(rng)
        xi = float(rng.uniform(-3.0, 3.0))
        m_sq = params.m0_sq * math.exp(float(rng.uniform(-2.0, 2.0)))
        check = gradient_equivalence_check(params, xi, m_sq)
        worst = max(
            worst, check.defect_xi / params.scale, check.defect_Y / params.scale
        )
        if not check.passed:
            failures.append(check.to_dict())
    report.add("equivalence", not failures, trials=trials, max_scaled_defect=worst)
    report.details["failures"] = failures

    pairs = []
    for _ in range(10):
        m0_sq = float(rng.uniform(0.2, 5.0))
        m_sq = m0_sq * math.exp(float(rng.uniform(-3.0, 3.0)))
        closed = trace_term(m_sq, m0_sq)
        oracle, _ = trace_term_oracle(m_sq, m0_sq)
        pairs.append(abs(closed - oracle) / max(1.0, abs(closed)))
    report.add(
        "trace_term", max(pairs) <= 1e-8, pairs=len(pairs), max_defect=max(pairs)
    )
    return report


# Gaussian calculus


def rational_measure(rng: np.random.Generator, dimension: int) -> GaussianMeasure:
    """Integer-entry covariance ``A A^T + I`` and rational non-zero means."""
    a = rng.integers(-2, 3, size=(dimension, dimension))
    cov = a @ a.T + np.eye(dimension, dtype=int)
    mean = [
        Fraction(
            int(rng.integers(1, 4)) * int(rng.choice([-1, 1])),
            int(rng.integers(1, 4)),
        )
        for _ in range(dimension)
    ]
    return GaussianMeasure(mean, [[Fraction(int(c)) for c in row] for row in cov])


def rational_direction(rng: np.random.Generator, dimension: int) -> List[Fraction]:
    """Two non-zero small-integer components at random positions."""
    f = [Fraction(0)] * dimension
    for i in rng.choice(dimension, size=2, replace=False):
        f[int(i)] = Fraction(int(rng.integers(1, 3)) * int(rng.choice([-1, 1])))
    return f


def mixture_counterexample() -> MixtureMeasure:
    """A two-component mixture with unequal weights and different means."""
    one = Fraction(1)
    return MixtureMeasure(
        [
            GaussianMeasure([Fraction(-1)], [[one]]),
            GaussianMeasure([Fraction(2)], [[one]]),
        ],
        [Fraction(3, 10), Fraction(7, 10)],
    )


def appendix_suite(rng: np.random.Generator, trials: int = 200) -> SuiteReport:
    report = SuiteReport("appendix")
    for dimension in range(2, 7):
        mu = rational_measure(rng, dimension)
        f = rational_direction(rng, dimension)
        g = rational_direction(rng, dimension)
        orthogonality = check_orthogonality(mu, 5, f, g)
        report.add(
            f"orthogonality_dim{dimension}",
            orthogonality.passed,
            max_off_diagonal=orthogonality.max_off_diagonal,
            max_diagonal_defect=orthogonality.max_diagonal_defect,
        )
        exact = all(wick_recursion_defect(mu, f, n).is_zero() for n in range(2, 8))
        report.add(f"wick_recursion_dim{dimension}", exact)
        commute = all(
            wick_derivative_commute(mu, f, n, j).details["exact"]
            for n in range(0, 6)
            for j in range(dimension)
        )
        report.add(f"wick_derivative_dim{dimension}", commute)
        generating = generating_function_check(mu, [float(v) for v in f])
        report.add(
            f"generating_function_dim{dimension}",
            generating.passed,
            max_defect=generating.defect,
        )

    first, second = [], []
    for _ in range(trials):
        dimension = int(rng.integers(1, 7))
        mu = random_measure(rng, dimension, mean_scale=0.5)
        f = rng.standard_normal(dimension).tolist()
        r = random_field_polynomial(rng, dimension, degree=3)
        first.append(ibp_first(mu, f, r))
        second.append(ibp_second(mu, f, int(rng.integers(1, 4)), r))
    for name, results in (("ibp_first", first), ("ibp_second", second)):
        report.add(
            name,
            all(r.passed for r in results),
            trials=trials,
            max_defect=max(r.defect for r in results),
        )

    mixture = check_orthogonality(mixture_counterexample(), 3)
    report.add(
        "mixture_breaks_orthogonality",
        not mixture.passed,
        max_off_diagonal=mixture.max_off_diagonal,
    )
    return report


# correction integrals


def integrals_suite(rng: np.random.Generator) -> SuiteReport:
    report = SuiteReport("integrals")
    i3 = corrections.integral_I3()
    iss = corrections.integral_Iss()
    report.add("I3_routes", i3.agreement <= 1e-7 * abs(i3.value), **i3.to_dict())
    report.add("Iss_routes", iss.agreement <= 1e-7 * abs(iss.value), **iss.to_dict())

    m_sq = float(rng.uniform(0.25, 9.0))
    i3_scaled = corrections.integral_I3(m_sq).value * m_sq
    iss_scaled = corrections.integral_Iss(m_sq).value * m_sq**2
    report.add(
        "I3_mass_scaling",
        _relative(i3_scaled, i3.value) <= 1e-8,
        m_sq=m_sq,
        scaled=i3_scaled,
    )
    report.add(
        "Iss_mass_scaling",
        _relative(iss_scaled, iss.value) <= 1e-8,
        m_sq=m_sq,
        scaled=iss_scaled,
    )
    report.add(
        "I3_equals_3Iss",
        _relative(i3.value, 3.0 * iss.value) <= 1e-7,
        ratio=i3.value / iss.value,
    )
    closed = corrections.bessel_moment_closed_form() / (4.0 * math.pi**2)
    report.add(
        "I3_closed_form", _relative(i3.value, closed) <= 1e-7, closed_form=closed
    )

    worst = max(
        _relative(corrections.bubble(k), corrections.bubble_closed_form(k))
        for k in (0.0, 0.01, 0.5, 1.0, 3.0, 10.0, 100.0)
    )
    report.add("bubble_closed_form", worst <= 1e-10, max_defect=worst)

    q0, _ = corrections.twopoint_kernel(0.0)
    report.add("Q0_equals_Iss", _relative(q0, iss.value) <= 1e-7, Q0=q0)

    a1 = corrections.mean_coefficient(i3.value, iss.value)
    report.details["mean_comparison"] = corrections.compare_with_reference(
        a1, corrections.REFERENCE_MEAN_COEFFICIENT
    )
    return report


# gap equations


def cross_check(params: ModelParams, tolerance: float = 1e-8) -> Dict[str, Any]:
    """Every closed-form solution must be found by the generic solver."""
    generic = solve_generic(params)
    missing = []
    for sol in solve_closed_form(params):
        found = any(
            abs(sol.xi - other.xi) <= tolerance * max(1.0, abs(sol.xi))
            and abs(sol.log_m_sq - other.log_m_sq)
            <= tolerance * max(1.0, abs(sol.log_m_sq))
            for other in generic
        )
        if not found:
            missing.append(sol.to_dict())
    return {"model": params.to_dict(), "generic": generic.report(), "missing": missing}


def cross_check_grid(size: int = 20, m0_sq: float = 1.0) -> List[ModelParams]:
    """``lambda`` log-spaced over ``[0.1, 10]`` times ``sigma`` over ``[-2, 2]``."""
    return [
        ModelParams(float(lam), float(sigma), m0_sq)
        for lam in np.geomspace(0.1, 10.0, size)
        for sigma in np.linspace(-2.0, 2.0, size)
    ]


ENERGY_CHECK_MODELS = (
    ModelParams(1.0, 0.3, 1.0),
    ModelParams(10.0, 1.0, 1.0),
    ModelParams(1.0, -1.0, 1.0),
    ModelParams(2.0, -0.5, 1.0),
)


def gap_suite(rng: np.random.Generator, samples: int = 20) -> SuiteReport:
    report = SuiteReport("gap")

    worst = 0.0
    for _ in range(samples):
        lam, sigma = float(rng.uniform(0.05, 5.0)), float(rng.uniform(0.05, 5.0))
        sym = solve_closed_form(ModelParams(lam, sigma, 2.0 * sigma))[0]
        worst = max(worst, abs(sym.xi), _relative(sym.m_sq, 2.0 * sigma), sym.residual)
    report.add("classical_mass_fixed_point", worst <= 1e-10, max_defect=worst)

    worst = 0.0
    for _ in range(samples):
        lam, sigma = float(rng.uniform(0.05, 5.0)), -float(rng.uniform(0.05, 5.0))
        sols = [
            s
            for s in solve_closed_form(ModelParams(lam, sigma, -4.0 * sigma))
            if s.branch is Branch.MEAN_FIELD
        ]
        if len(sols) != 2:
            worst = math.inf
            break
        for s in sols:
            worst = max(
                worst,
                _relative(s.xi**2, -sigma / (2.0 * lam)),
                _relative(s.m_sq, -4.0 * sigma),
                s.residual,
            )
    report.add("mean_field_fixed_point", worst <= 1e-10, max_defect=worst)

    checks = [cross_check(params) for params in cross_check_grid()]
    failed = [c for c in checks if c["missing"]]
    report.add(
        "closed_form_vs_generic",
        not failed,
        checked=len(checks),
        models=failed,
    )

    mismatched = []
    for params in ENERGY_CHECK_MODELS:
        try:
            found = minimize_energy(params)
        except ConvergenceError as e:
            mismatched.append({"model": params.to_dict(), "error": str(e)})
            continue
        stable = [s for s in solve_all(params) if s.stability is Stability.STABLE]
        if not any(
            abs(abs(found.xi) - abs(s.xi)) <= 1e-8 * max(1.0, abs(s.xi))
            and _relative(found.m_sq, s.m_sq) <= 1e-8
            for s in stable
        ):
            mismatched.append({"model": params.to_dict(), "minimum": found.to_dict()})
    report.add("minimize_energy_selects_stable", not mismatched, mismatched=mismatched)

    report.add(**strong_coupling_check())
    return report


def strong_coupling_check(sigma: float = 1.0, m0_sq: float = 1.0) -> Dict[str, Any]:
    """
    Along a geometric lambda grid the rescaled couplings of the large-``xi``
    broken solution shrink while ``m^2/lambda`` grows.
    """
    quartic, cubic, ratio, lams = [], [], [], []
    for lam in np.geomspace(1.0, 1e6, 25):
        params = ModelParams(float(lam), sigma, m0_sq)
        broken = [s for s in solve_broken(params) if s.xi > 0]
        if not broken:
            continue
        sol = max(broken, key=lambda s: s.xi)
        couplings = corrections.rescale_to_unit_mass(sol, params)
        lams.append(float(lam))
        quartic.append(couplings.quartic)
        cubic.append(couplings.cubic)
        ratio.append(sol.m_sq / params.lam)
    monotone = (
        len(lams) >= 2
        and all(b < a for a, b in zip(quartic, quartic[1:]))
        and all(b < a for a, b in zip(cubic, cubic[1:]))
        and all(b > a for a, b in zip(ratio, ratio[1:]))
    )
    return {
        "name": "strong_coupling",
        "passed": monotone,
        "lambda": lams,
        "quartic": quartic,
        "cubic": cubic,
        "m_sq_over_lambda": ratio,
    }
