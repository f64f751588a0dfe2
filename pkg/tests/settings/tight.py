from .base import *  # noqa: F401, F403

# Same suite with a different short-distance split and finer deduplication;
# every result must be independent of both.
GAUSSIAN_VACUUM_SPLIT_RADIUS = 0.02
GAUSSIAN_VACUUM_DEDUP_TOLERANCE = 1e-9
GAUSSIAN_VACUUM_JSON_INDENT = 0
