import numpy as np
import pytest
from django.core.exceptions import ImproperlyConfigured
try:
    from pytest_django.fixtures import SettingsWrapper
except ImportError:  # pytest-django >= 4.11 renamed the class
    from pytest_django.fixtures import Settings as SettingsWrapper
from pytest_mock import MockerFixture

from gaussian_vacuum.models import ModelParams
from gaussian_vacuum.verify import (
    DEFAULT_SUITES,
    SuiteReport,
    appendix_suite,
    cross_check,
    cross_check_grid,
    get_suites,
    mixture_counterexample,
    run_verification,
    strong_coupling_check,
    suite_rng,
)

DRAWING_SUITES = {
    "first": "tests.test_verify.first_suite",
    "second": "tests.test_verify.second_suite",
}


def first_suite(rng: np.random.Generator) -> SuiteReport:
    report = SuiteReport("first")
    report.add("draw", True, value=float(rng.random()))
    return report


def second_suite(rng: np.random.Generator) -> SuiteReport:
    report = SuiteReport("second")
    report.add("draw", True, value=float(rng.random()))
    return report


class TestSuiteReport:
    def test_failure_is_logged(self, mocker: MockerFixture):
        warning = mocker.patch("gaussian_vacuum.verify.logger.warning")
        report = SuiteReport("example")
        report.add("good", True)
        assert report.passed
        report.add("bad", False, defect=1.0)
        assert not report.passed
        warning.assert_called_once()
        assert report.to_dict()["checks"][1] == {
            "name": "bad",
            "passed": False,
            "defect": 1.0,
        }


class TestRegistry:
    def test_defaults(self):
        assert sorted(get_suites()) == sorted(DEFAULT_SUITES)

    def test_bad_path(self, settings: SettingsWrapper):
        settings.GAUSSIAN_VACUUM_VERIFY_SUITES = {"bad": "tests.test_verify.missing"}
        with pytest.raises(ImproperlyConfigured, match="could not import"):
            get_suites()

    def test_unknown_suite(self):
        with pytest.raises(ImproperlyConfigured, match="unknown verification suite"):
            run_verification(["nope"])


class TestRunVerification:
    def test_default_seed(self, settings: SettingsWrapper):
        settings.GAUSSIAN_VACUUM_VERIFY_SUITES = DRAWING_SUITES
        report = run_verification()
        assert report.seed == settings.GAUSSIAN_VACUUM_DEFAULT_SEED
        assert [s.name for s in report.suites] == ["first", "second"]
        assert report.passed

    def test_filtering_keeps_streams(self, settings: SettingsWrapper):
        settings.GAUSSIAN_VACUUM_VERIFY_SUITES = DRAWING_SUITES
        both = run_verification(seed=5).to_dict()
        alone = run_verification(["second"], seed=5).to_dict()
        assert alone["suites"]["second"] == both["suites"]["second"]

    def test_seeds_differ(self, settings: SettingsWrapper):
        settings.GAUSSIAN_VACUUM_VERIFY_SUITES = DRAWING_SUITES
        one = run_verification(["first"], seed=1).to_dict()
        two = run_verification(["first"], seed=2).to_dict()
        assert one["suites"] != two["suites"]

    def test_suite_rng(self):
        assert suite_rng(1, "a").random() == suite_rng(1, "a").random()
        assert suite_rng(1, "a").random() != suite_rng(1, "b").random()


class TestSuites:
    def test_appendix(self):
        report = appendix_suite(np.random.default_rng(0), trials=20)
        assert report.passed
        names = {check["name"] for check in report.checks}
        assert "mixture_breaks_orthogonality" in names
        assert "orthogonality_dim6" in names

    def test_mixture_is_not_gaussian(self):
        mixture = mixture_counterexample()
        assert mixture.dimension == 1
        assert sum(mixture.weights) == 1

    @pytest.mark.parametrize(
        "params", [ModelParams(1.0, 0.3, 1.0), ModelParams(1.0, -1.0, 1.0)]
    )
    def test_cross_check(self, params: ModelParams):
        result = cross_check(params)
        assert result["missing"] == []
        assert result["model"] == params.to_dict()

    def test_cross_check_grid(self):
        grid = cross_check_grid()
        assert len(grid) == 400
        assert {p.m0_sq for p in grid} == {1.0}
        assert min(p.lam for p in grid) == pytest.approx(0.1)
        assert max(p.lam for p in grid) == pytest.approx(10.0)
        assert sorted({p.sigma for p in grid})[0] == pytest.approx(-2.0)
        assert sorted({p.sigma for p in grid})[-1] == pytest.approx(2.0)

    def test_strong_coupling(self):
        result = strong_coupling_check()
        assert result["name"] == "strong_coupling"
        assert result["passed"] is True
        assert len(result["lambda"]) >= 2
