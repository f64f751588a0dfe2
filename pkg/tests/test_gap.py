import math
from concurrent.futures import ThreadPoolExecutor
from typing import List

import numpy as np
import pytest
try:
    from pytest_django.fixtures import SettingsWrapper
except ImportError:  # pytest-django >= 4.11 renamed the class
    from pytest_django.fixtures import Settings as SettingsWrapper
from pytest_mock import MockerFixture

from gaussian_vacuum.exceptions import DomainError
from gaussian_vacuum.gap import (
    branch_argument,
    classify_stability,
    critical_couplings,
    exact_gap_system,
    gap_residual,
    has_broken_solutions,
    log_mass_jacobian,
    mean_field,
    phase_scan,
    residual_norm,
    residual_tolerance,
    selected_phase,
    solve_all,
    solve_broken,
    solve_closed_form,
    solve_generic,
    solve_symmetric,
)
from gaussian_vacuum.gap.scan import CSV_COLUMNS, stationary_values
from gaussian_vacuum.models import Branch, GapSolution, ModelParams, Stability, Theory
from gaussian_vacuum.special import BRANCH_POINT
from gaussian_vacuum.wick import Polynomial

GRID_LAMBDAS = np.geomspace(0.1, 10.0, 20)
GRID_SIGMAS = np.linspace(-2.0, 2.0, 20)


def missing_closed_forms(params: ModelParams) -> List[GapSolution]:
    generic = solve_generic(params)
    return [
        sol
        for sol in solve_closed_form(params)
        if not any(
            abs(sol.xi - g.xi) <= 1e-8 * max(1.0, abs(sol.xi))
            and abs(sol.log_m_sq - g.log_m_sq) <= 1e-8 * max(1.0, abs(sol.log_m_sq))
            for g in generic
        )
    ]


class TestModelParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(lam=0.0, sigma=1.0, m0_sq=1.0),
            dict(lam=1.0, sigma=1.0, m0_sq=-1.0),
            dict(lam=1.0, sigma=math.inf, m0_sq=1.0),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            ModelParams(**kwargs)

    def test_solution_needs_positive_mass(self):
        with pytest.raises(DomainError):
            GapSolution(xi=0.0, m_sq=0.0, branch=Branch.SYMMETRIC)


class TestResidual:
    def test_vanishes_at_mean_field(self, broken_params: ModelParams):
        r1, r2 = gap_residual(broken_params, math.sqrt(5.0), 4.0)
        assert abs(r1) < 1e-12
        assert abs(r2) < 1e-12

    def test_broadcasts(self, broken_params: ModelParams):
        xi = np.array([0.0, 1.0, 2.0])
        m_sq = np.array([1.0, 2.0, 4.0])
        norms = residual_norm(broken_params, xi, m_sq)
        assert norms.shape == (3,)

    def test_tolerance_follows_settings(
        self, settings: SettingsWrapper, broken_params: ModelParams
    ):
        settings.GAUSSIAN_VACUUM_RESIDUAL_TOLERANCE = 1e-6
        expected = 1e-6 * broken_params.scale
        assert residual_tolerance(broken_params) == pytest.approx(expected)

    @pytest.mark.parametrize("xi, log_m_sq", [(0.4, 0.2), (-1.1, -0.5), (0.0, 1.0)])
    def test_exact_system_matches_float(self, xi: float, log_m_sq: float):
        params = ModelParams(1.3, -0.7, 1.0)
        residual, jac = exact_gap_system(params, xi, log_m_sq)
        np.testing.assert_allclose(
            residual,
            gap_residual(params, xi, math.exp(log_m_sq)),
            rtol=1e-9,
            atol=1e-12,
        )
        np.testing.assert_allclose(
            jac, log_mass_jacobian(params, xi, log_m_sq), rtol=1e-9, atol=1e-12
        )

    def test_exact_system_vanishes_at_mean_field(self, broken_params: ModelParams):
        residual, _ = exact_gap_system(broken_params, math.sqrt(5.0), math.log(4.0))
        assert np.abs(residual).max() < 1e-12


class TestClosedForm:
    def test_classical_mass_fixed_point(self, symmetric_params: ModelParams):
        sol = solve_symmetric(symmetric_params)
        assert sol.xi == 0.0
        assert sol.m_sq == pytest.approx(2.0, rel=1e-12)
        assert sol.residual <= 1e-10

    def test_mean_field_fixed_point(self, broken_params: ModelParams):
        mean_field_solutions = [
            s for s in solve_broken(broken_params) if s.branch is Branch.MEAN_FIELD
        ]
        assert sorted(s.xi for s in mean_field_solutions) == pytest.approx(
            [-math.sqrt(5.0), math.sqrt(5.0)], rel=1e-12
        )
        for s in mean_field_solutions:
            assert s.m_sq == pytest.approx(4.0, rel=1e-12)
            assert s.energy == pytest.approx(-2.5, rel=1e-12)
            assert s.residual <= 1e-10

    def test_principal_branch_solution_is_tiny(self, broken_params: ModelParams):
        w0 = [s for s in solve_broken(broken_params) if s.branch is Branch.BROKEN_W0]
        assert len(w0) == 2
        assert w0[0].xi == -w0[1].xi
        assert w0[0].xi**2 == pytest.approx(4e-9, rel=0.1)
        expected = 8.0 * broken_params.lam * w0[0].xi**2
        assert w0[0].m_sq == pytest.approx(expected, rel=1e-9)

    def test_no_broken_solutions_beyond_branch_point(
        self, symmetric_params: ModelParams
    ):
        assert branch_argument(symmetric_params) < BRANCH_POINT
        assert not has_broken_solutions(symmetric_params)
        assert solve_broken(symmetric_params) == []
        assert len(solve_closed_form(symmetric_params)) == 1

    def test_branch_labels_follow_the_field_families(self):
        params = ModelParams(lam=0.01, sigma=-1.0, m0_sq=1.0)
        by_branch = {s.branch: s for s in solve_broken(params) if s.xi > 0}
        large = by_branch[Branch.BROKEN_WM1]
        small = by_branch[Branch.BROKEN_W0]
        classical = -params.sigma / (2.0 * params.lam)
        assert large.xi**2 == pytest.approx(classical, rel=0.05)
        assert small.xi**2 < 3.0 / (4.0 * math.pi)
        assert small.xi < 1e-30

    def test_minus_one_branch_carries_the_strong_coupling_mass(self):
        params = ModelParams(lam=1e4, sigma=-1.0, m0_sq=1.0)
        by_branch = {s.branch: s for s in solve_broken(params) if s.xi > 0}
        assert by_branch[Branch.BROKEN_WM1].xi ** 2 > 1.0
        assert by_branch[Branch.BROKEN_WM1].m_sq > 1e4
        assert by_branch[Branch.BROKEN_W0].xi ** 2 < 1e-4

    def test_mean_field(self, broken_params: ModelParams):
        assert mean_field(broken_params) == pytest.approx(
            [(math.sqrt(5.0), 4.0), (-math.sqrt(5.0), 4.0)]
        )
        assert mean_field(ModelParams(1.0, 2.0, 1.0)) == [(0.0, 4.0)]
        with pytest.raises(DomainError, match="massless"):
            mean_field(ModelParams(1.0, 0.0, 1.0))

    def test_huge_arguments_do_not_overflow(self):
        sol = solve_symmetric(ModelParams(1e-3, 10.0, 1.0))
        assert math.isfinite(sol.m_sq)
        assert sol.residual <= residual_tolerance(ModelParams(1e-3, 10.0, 1.0))

    @pytest.mark.parametrize("sigma", GRID_SIGMAS.tolist())
    def test_generic_solver_finds_closed_forms(self, sigma: float):
        for lam in GRID_LAMBDAS.tolist():
            params = ModelParams(lam, sigma, 1.0)
            assert missing_closed_forms(params) == [], params


class TestGenericSolver:
    def test_small_symmetric_mass(self):
        params = ModelParams(float(GRID_LAMBDAS[0]), float(GRID_SIGMAS[6]), 1.0)
        sym = solve_symmetric(params)
        assert sym.m_sq == pytest.approx(1.985e-7, rel=1e-3)
        near_origin = [s for s in solve_generic(params) if abs(s.xi) <= 1e-12]
        assert len(near_origin) == 1
        assert near_origin[0].log_m_sq == pytest.approx(sym.log_m_sq, rel=1e-10)

    @pytest.mark.parametrize(
        "lam_index, sigma_index, xi", [(1, 2, 2.29e-6), (0, 2, 7.37e-8)]
    )
    def test_tiny_broken_solutions(self, lam_index: int, sigma_index: int, xi: float):
        params = ModelParams(
            float(GRID_LAMBDAS[lam_index]), float(GRID_SIGMAS[sigma_index]), 1.0
        )
        principal = [s for s in solve_broken(params) if s.branch is Branch.BROKEN_W0]
        assert principal[0].xi == pytest.approx(xi, rel=1e-2)
        generic = solve_generic(params)
        for sol in principal:
            assert any(g.xi == pytest.approx(sol.xi, rel=1e-6) for g in generic)
            assert any(g.m_sq == pytest.approx(sol.m_sq, rel=1e-9) for g in generic)

    def test_rejects_unbounded_potential(self):
        with pytest.raises(DomainError, match="even-degree"):
            solve_generic(Theory(Polynomial((0.0, 0.0, 1.0, 1.0)), 1.0))

    def test_phi4_theory_matches_params(self):
        params = ModelParams(1.0, -1.0, 1.0)
        by_theory = solve_generic(params.theory)
        by_params = solve_generic(params)
        assert [s.xi for s in by_theory] == pytest.approx([s.xi for s in by_params])

    def test_sextic_solutions_solve_the_gap_equations(self):
        theory = Theory(Polynomial((0.0, 0.0, -1.0, 0.0, 0.2, 0.0, 0.05)), 1.0)
        result = solve_generic(theory)
        assert len(result) >= 1
        assert result.report()["distinct"] == len(result)
        for sol in result:
            assert sol.residual <= residual_tolerance(theory)
            assert sol.branch is Branch.GENERIC

    @pytest.mark.parametrize("coefficient", [1e-5, 1e-4, 1e-3])
    def test_small_sextic_term_moves_solutions_continuously(self, coefficient: float):
        params = ModelParams(1.0, -1.0, 1.0)
        coeffs = (0.0, 0.0, params.sigma, 0.0, params.lam, 0.0, coefficient)
        generic = solve_generic(Theory(Polynomial(coeffs), params.m0_sq))
        for sol in solve_closed_form(params):
            shift = min(
                abs(g.xi - sol.xi) + abs(g.log_m_sq - sol.log_m_sq) for g in generic
            )
            assert shift <= 100.0 * coefficient, sol

    def test_odd_potential_terms_break_the_mirror(self):
        theory = Theory(Polynomial((0.0, 0.3, -1.0, 0.0, 0.5)), 1.0)
        for sol in solve_generic(theory):
            assert residual_norm(theory, sol.xi, sol.m_sq) <= residual_tolerance(theory)


class TestStability:
    def test_broken_phase_labels(self, broken_params: ModelParams):
        solutions = solve_all(broken_params)
        labels = {s.branch: s.stability for s in solutions}
        assert labels[Branch.MEAN_FIELD] is Stability.STABLE
        assert labels[Branch.BROKEN_W0] is Stability.SADDLE
        assert labels[Branch.SYMMETRIC] is Stability.UNSTABLE
        assert [s.energy for s in solutions] == sorted(s.energy for s in solutions)

    def test_selected_phase(
        self, broken_params: ModelParams, symmetric_params: ModelParams
    ):
        selected = selected_phase(solve_all(broken_params))
        assert selected.branch is Branch.MEAN_FIELD
        assert selected.energy == pytest.approx(-2.5)

        selected = selected_phase(solve_all(symmetric_params))
        assert selected.branch is Branch.SYMMETRIC
        assert selected.stability is Stability.STABLE
        assert selected.m_sq == pytest.approx(2.0)

    def test_no_stable_solution(self):
        assert selected_phase([]) is None

    def test_degenerate_hessian_is_marginal(
        self, mocker: MockerFixture, symmetric_params: ModelParams
    ):
        mocker.patch(
            "gaussian_vacuum.gap.stability.energy_hessian",
            return_value=np.zeros((2, 2)),
        )
        sol = solve_symmetric(symmetric_params)
        assert classify_stability(symmetric_params, sol, [sol]) is Stability.MARGINAL


class TestScan:
    def test_critical_coupling(self):
        base = ModelParams(1.0, 1.0, 1.0)
        (point,) = critical_couplings(base, "lam", 1.0, 10.0)
        assert point.direction == "appear"
        assert branch_argument(base.replace(lam=point.value)) == pytest.approx(
            BRANCH_POINT, rel=1e-10
        )

    def test_negative_sigma_never_crosses(self):
        scan = phase_scan(ModelParams(1.0, -1.0, 1.0), "lam", 0.1, 10.0, 12)
        assert scan.critical == []
        assert all(row.branch_argument >= BRANCH_POINT for row in scan.rows)

    def test_crossings_inside_one_cell(self):
        base = ModelParams(1.0, -1.0, 8.0)
        scan = phase_scan(base, "lam", 0.5, 20.0, 2)
        assert [c.direction for c in scan.critical] == ["disappear", "appear"]
        values = [c.value for c in scan.critical]
        assert values == pytest.approx([0.78197, 9.02908], rel=1e-4)
        dense = critical_couplings(base, "lam", 0.5, 20.0)
        assert values == pytest.approx([c.value for c in dense], rel=1e-10)

    def test_stationary_values(self):
        base = ModelParams(1.0, -1.0, 8.0)
        assert stationary_values(base, "lam") == pytest.approx([2.0 * math.pi / 3.0])
        assert stationary_values(base, "sigma") == []
        assert stationary_values(base.replace(sigma=1.0), "lam") == []

    def test_single_point(self):
        scan = phase_scan(ModelParams(1.0, 1.0, 1.0), "lam", 2.0, 2.0, 1)
        assert len(scan.rows) == 1
        assert scan.rows[0].value == 2.0
        assert scan.critical == []

    def test_scan_locates_appearance(self):
        scan = phase_scan(ModelParams(1.0, 1.0, 1.0), "lam", 1.0, 10.0, 10)
        (point,) = scan.critical
        assert 1.0 < point.value < 10.0
        counts = [len(row.solutions) for row in scan.rows]
        assert counts[0] == 1
        assert counts[-1] == 5

    def test_table(self):
        scan = phase_scan(ModelParams(1.0, -1.0, 1.0), "sigma", -1.0, -0.5, 3)
        table = scan.table()
        assert table["columns"] == list(CSV_COLUMNS)
        assert len(table["rows"]) == sum(len(row.solutions) for row in scan.rows)
        data = scan.to_dict()
        assert data["units"]["value"] == "mass^2"

    def test_executor_keeps_grid_order(self):
        base = ModelParams(1.0, 1.0, 1.0)
        serial = phase_scan(base, "lam", 1.0, 10.0, 6, spacing="geometric")
        with ThreadPoolExecutor(max_workers=3) as executor:
            parallel = phase_scan(
                base, "lam", 1.0, 10.0, 6, spacing="geometric", executor=executor
            )
        expected = [row.value for row in serial.rows]
        assert [row.value for row in parallel.rows] == expected
        assert parallel.table() == serial.table()

    @pytest.mark.parametrize(
        "parameter,lo,hi,steps",
        [("mass", 0.0, 1.0, 3), ("lam", 1.0, 2.0, 0), ("lam", 2.0, 1.0, 3)],
    )
    def test_invalid_scan(self, parameter, lo, hi, steps):
        with pytest.raises(DomainError):
            phase_scan(ModelParams(1.0, 1.0, 1.0), parameter, lo, hi, steps)
