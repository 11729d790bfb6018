"""
Runtime settings, read once from the environment.

Modules read these attributes at call time (``config.CMP_EPS``), so tests and
the CLI can override them by plain assignment.
"""

import logging
import os

# Float comparison tolerance (relative to max(1, |x|, |y|))
CMP_EPS = float(os.getenv("MAXLAB_CMP_EPS", "1e-12"))

# Cap on worker threads for profile/fuzz batches
THREADS = max(1, int(os.getenv("MAXLAB_THREADS", str(os.cpu_count() or 1))))

# Largest common exponent denominator compared exactly; above it ScaledPowers
# compare as float64 logarithms within CMP_EPS
EXACT_POWER_DENOMINATOR_CAP = int(os.getenv("MAXLAB_EXACT_POWER_CAP", "64"))

DATABASE_URL = os.getenv("MAXLAB_DATABASE_URL", "sqlite:///./maxlab.db")

OUTPUT_DIR = os.getenv("MAXLAB_OUTPUT_DIR", ".")

LOG_LEVEL = os.getenv("MAXLAB_LOG_LEVEL", "WARNING")

LOG_FORMAT = "[%(name)s] %(levelname)s: %(message)s"


def configure_logging(level: str = None) -> None:
    """Install the bracket-tagged log format on the root logger."""
    logging.basicConfig(
        level=(level or LOG_LEVEL).upper(),
        format=LOG_FORMAT,
        force=True,
    )
