SECRET_KEY = "gaussian_vacuum_tests_secret_key"

# Include `django.contrib.auth` and `django.contrib.contenttypes` for mypy /
# django-stubs.
INSTALLED_APPS = [
    "django.contrib.auth",
    "django.contrib.contenttypes",
]

USE_TZ = False

GAUSSIAN_VACUUM_LOGGER = "gaussian_vacuum"
GAUSSIAN_VACUUM_DEFAULT_SEED = 42
GAUSSIAN_VACUUM_SPLIT_RADIUS = 0.1
GAUSSIAN_VACUUM_ASYMPTOTIC_GUARD = 1.0
