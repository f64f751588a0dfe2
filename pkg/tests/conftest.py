from typing import Iterable

import numpy as np
import pytest

try:
    from pytest_django.fixtures import SettingsWrapper
except ImportError:  # pytest-django >= 4.11 renamed the class
    from pytest_django.fixtures import Settings as SettingsWrapper

from gaussian_vacuum.models import ModelParams


@pytest.fixture
def rng(settings: SettingsWrapper) -> Iterable[np.random.Generator]:
    yield np.random.default_rng(settings.GAUSSIAN_VACUUM_DEFAULT_SEED)


@pytest.fixture
def broken_params() -> ModelParams:
    """sigma < 0 with m0^2 = -4 sigma: the mean-field point is a solution."""
    return ModelParams(lam=0.1, sigma=-1.0, m0_sq=4.0)


@pytest.fixture
def symmetric_params() -> ModelParams:
    """sigma > 0 with m0^2 = 2 sigma: the classical mass is a solution."""
    return ModelParams(lam=0.1, sigma=1.0, m0_sq=2.0)
