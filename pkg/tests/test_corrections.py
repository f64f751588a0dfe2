import math
from concurrent.futures import ThreadPoolExecutor

import pytest
try:
    from pytest_django.fixtures import SettingsWrapper
except ImportError:  # pytest-django >= 4.11 renamed the class
    from pytest_django.fixtures import Settings as SettingsWrapper
from scipy import special

from gaussian_vacuum import corrections
from gaussian_vacuum.corrections import (
    CovarianceKernel,
    bessel_moment_closed_form,
    bubble,
    bubble_closed_form,
    compare_with_reference,
    correction_report,
    integral_I3,
    integral_I3_position,
    integral_Iss,
    integral_Iss_sampled,
    mean_coefficient,
    mean_expansion,
    reordered_interaction,
    rescale_to_unit_mass,
    twopoint_expansion,
    twopoint_kernel,
    twopoint_kernel_integral,
)
from gaussian_vacuum.exceptions import DomainError, RejectedSolution
from gaussian_vacuum.models import Branch, GapSolution, ModelParams

I3_UNIT = bessel_moment_closed_form() / (4.0 * math.pi**2)


@pytest.fixture
def mean_field_solution() -> GapSolution:
    return GapSolution(xi=math.sqrt(5.0), m_sq=4.0, branch=Branch.MEAN_FIELD)


class TestCovariance:
    def test_position_space(self):
        kernel = CovarianceKernel(4.0)
        assert kernel.mass == 2.0
        assert kernel.covariance(0.5) == pytest.approx(special.k0(1.0) / (2 * math.pi))

    def test_from_momentum(self):
        kernel = CovarianceKernel(1.0)
        value, _ = kernel.covariance_from_momentum(1.0)
        assert value == pytest.approx(float(kernel.covariance(1.0)), rel=1e-7)

    def test_convolution_at_origin_is_bubble(self):
        assert corrections.convolved_covariance(1e-8) == pytest.approx(
            bubble(0.0), rel=1e-6
        )

    @pytest.mark.parametrize("r", [0.0, -1.0])
    def test_singular_at_origin(self, r: float):
        with pytest.raises(DomainError):
            CovarianceKernel(1.0).covariance(r)

    def test_needs_positive_mass(self):
        with pytest.raises(DomainError):
            CovarianceKernel(0.0)


class TestBubble:
    @pytest.mark.parametrize("k", [0.0, 1e-5, 0.3, 1.0, 4.0, 30.0])
    def test_quadrature_matches_closed_form(self, k: float):
        assert bubble(k) == pytest.approx(bubble_closed_form(k), rel=1e-9)

    def test_zero_momentum(self):
        assert bubble(0.0) == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-12)
        assert twopoint_kernel_integral() == bubble(0.0)

    def test_mass_scaling(self):
        assert bubble(2.0, m_sq=4.0) == pytest.approx(bubble(1.0) / 4.0, rel=1e-12)

    def test_series_is_continuous(self):
        assert bubble_closed_form(0.99e-4) == pytest.approx(
            bubble_closed_form(1.01e-4), rel=1e-8
        )


class TestIntegrals:
    def test_closed_form(self):
        assert bessel_moment_closed_form() == pytest.approx(0.58603, rel=1e-4)
        value, _ = integral_I3_position()
        assert value == pytest.approx(I3_UNIT, rel=1e-8)

    def test_routes_agree(self):
        i3, iss = integral_I3(), integral_Iss()
        assert set(i3.routes) == {"position", "momentum"}
        assert i3.agreement < 1e-10
        assert iss.agreement < 1e-10
        assert i3.error >= i3.agreement
        assert i3.to_dict()["value"] == i3.value

    def test_three_to_one(self):
        iss = integral_Iss().value
        assert integral_I3().value == pytest.approx(3.0 * iss, rel=1e-8)

    def test_mass_scaling(self):
        assert integral_I3(4.0).value == pytest.approx(
            integral_I3().value / 4.0, rel=1e-8
        )
        assert integral_Iss(4.0).value == pytest.approx(
            integral_Iss().value / 16.0, rel=1e-8
        )

    def test_tight_split(self, settings: SettingsWrapper):
        default, _ = integral_I3_position()
        settings.GAUSSIAN_VACUUM_SPLIT_RADIUS = 0.02
        tight, _ = integral_I3_position()
        assert tight == pytest.approx(default, rel=1e-9)

    def test_sampled(self):
        mean, stderr = integral_Iss_sampled(points=2**12, replicates=8, seed=7)
        assert stderr > 0
        assert abs(mean - integral_Iss().value) < 5 * stderr + 1e-3 * mean

    def test_sampled_is_seeded(self):
        assert integral_Iss_sampled(points=2**10, replicates=4, seed=3) == (
            integral_Iss_sampled(points=2**10, replicates=4, seed=3)
        )


class TestTwoPointKernel:
    def test_coincident_points(self):
        q0, error = twopoint_kernel(0.0)
        assert q0 == pytest.approx(integral_Iss().value, rel=1e-8)
        assert error < 1e-10

    def test_decreasing(self):
        values = [twopoint_kernel(r)[0] for r in (0.5, 1.0, 2.0, 4.0)]
        assert all(a > b > 0 for a, b in zip(values, values[1:]))

    def test_negative_separation(self):
        with pytest.raises(DomainError):
            twopoint_kernel(-0.1)

    @pytest.mark.parametrize("r", [0.0, 0.5, 2.0])
    def test_quadrature_bubble_matches_closed_form(self, r: float):
        shipped, _ = twopoint_kernel(r)
        cross_check, _ = twopoint_kernel(r, closed_form=True)
        assert shipped == pytest.approx(cross_check, rel=1e-7)


class TestExpansions:
    def test_mean_coefficient(self):
        a1 = mean_coefficient()
        assert a1 == pytest.approx(-0.75 * I3_UNIT, rel=1e-6)
        assert mean_coefficient(i3=1.0, iss=0.0) == 1.5

    def test_mean_is_odd(self):
        assert mean_expansion(-2.0, a1=0.5) == -mean_expansion(2.0, a1=0.5)
        assert mean_expansion(2.0, a1=0.5) == pytest.approx(2.0 + 0.5 / 8.0)

    def test_twopoint_is_even(self):
        assert twopoint_expansion(1.0, 3.0) == twopoint_expansion(1.0, -3.0)

    def test_twopoint_approaches_free(self):
        q1, _ = twopoint_kernel(1.0)
        free = special.k0(1.0) / (2 * math.pi)
        assert twopoint_expansion(1.0, 10.0) == pytest.approx(free + 0.045 * q1)

    def test_twopoint_in_mass_units(self):
        assert twopoint_expansion(0.5, 3.0, m_sq=4.0) == twopoint_expansion(1.0, 3.0)

    @pytest.mark.parametrize("xi", [0.0, 0.5, -0.99])
    def test_asymptotic_guard(self, xi: float):
        with pytest.raises(DomainError):
            mean_expansion(xi, a1=0.0)
        with pytest.raises(DomainError):
            twopoint_expansion(1.0, xi)

    def test_guard_setting(self, settings: SettingsWrapper):
        settings.GAUSSIAN_VACUUM_ASYMPTOTIC_GUARD = 0.1
        assert mean_expansion(0.5, a1=0.0) == 0.5


class TestRescaling:
    def test_broken_solution(
        self, broken_params: ModelParams, mean_field_solution: GapSolution
    ):
        rescaled = rescale_to_unit_mass(mean_field_solution, broken_params)
        xi = mean_field_solution.xi
        assert rescaled.quartic == pytest.approx(1.0 / (8.0 * xi**2))
        assert rescaled.cubic == pytest.approx(1.0 / (2.0 * xi))
        phi, value = rescaled.classical_minimum
        assert phi == pytest.approx(-3.0 * xi)
        assert value == pytest.approx(-27.0 * xi**2 / 8.0)
        assert rescaled.to_dict()["units"]["cubic"] == "dimensionless"

    def test_symmetric_solution_rejected(self, symmetric_params: ModelParams):
        with pytest.raises(RejectedSolution):
            rescale_to_unit_mass(
                GapSolution(xi=0.0, m_sq=2.0, branch=Branch.SYMMETRIC), symmetric_params
            )

    def test_reordered_interaction(
        self, broken_params: ModelParams, mean_field_solution: GapSolution
    ):
        p = reordered_interaction(mean_field_solution, broken_params)
        xi = mean_field_solution.xi
        assert p.coeffs == pytest.approx((-2.5, 0.0, 0.0, 0.4 * xi, 0.1), abs=1e-12)


class TestReport:
    def test_compare_with_reference(self):
        assert compare_with_reference(0.0105, 0.01)["verdict"] == "confirmed"
        result = compare_with_reference(2.0, 1.0)
        assert result == {
            "value": 2.0,
            "reference": 1.0,
            "ratio": 2.0,
            "verdict": "discrepancy",
        }

    def test_report(self):
        report = correction_report(radii=(1.0, 0.5), m_sq=4.0)
        assert [r for r, _ in report.twopoint_kernel] == [0.0, 0.5, 1.0]
        assert abs(report.checks["I3_minus_3Iss"]) < 1e-9
        assert abs(report.checks["I3_minus_closed_form"]) < 1e-9
        assert abs(report.checks["Q0_minus_Iss"]) < 1e-9
        assert abs(report.checks["bubble0_minus_quarter_over_pi"]) < 1e-12
        assert report.a1 < 0
        assert report.mean_comparison["verdict"] == "discrepancy"
        assert set(report.twopoint_candidates) == {
            "coincident_points",
            "unit_separation",
            "zero_momentum",
        }
        zero = report.twopoint_candidates["zero_momentum"]
        assert zero["value"] == pytest.approx(4.5 / (4.0 * math.pi))

        data = report.to_dict()
        original = data["unit_systems"]["original_scale"]
        assert original == {"m_sq": 4.0, "length_unit": 0.5}
        assert data["units"]["r"] == "length"
        q0 = report.twopoint_kernel[0][1]
        assert data["twopoint_kernel"][0] == {"r": 0.0, "Q": q0}

    def test_concurrent_kernel(self):
        serial = correction_report(radii=(0.5, 2.0))
        with ThreadPoolExecutor(max_workers=2) as executor:
            threaded = correction_report(radii=(0.5, 2.0), executor=executor)
        assert threaded.twopoint_kernel == serial.twopoint_kernel
