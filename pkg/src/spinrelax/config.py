"""
Runtime configuration

Environment overrides (optionally from a .env file at the project root),
path setup and the numerical tolerances shared by every module.
"""

import os

from dotenv import load_dotenv

load_dotenv()

# ============================================================================
# Path setup
# ============================================================================

current_dir = os.path.dirname(os.path.abspath(__file__))
project_root = current_dir
while os.path.basename(project_root) in ['src', 'spinrelax', 'tests']:
    project_root = os.path.dirname(project_root)

DATA_DIR = os.getenv("SPINRELAX_DATA_DIR", os.path.join(project_root, "data"))
LOG_FILE = os.path.join(DATA_DIR, "spinrelax.log")

# ============================================================================
# Workers and populations
# ============================================================================


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw.strip())
    except ValueError:
        return default
    return value if value > 0 else default


def thread_count() -> int:
    """Worker cap, read on every call so tests can patch the environment."""
    return _int_env("SPINRELAX_THREADS", os.cpu_count() or 1)


PRESCAN_POINTS = _int_env("SPINRELAX_PRESCAN_POINTS", 2000)
PRESCAN_MAX_POINTS = 2 ** 16
BISECTION_TOL = float(os.getenv("SPINRELAX_BISECTION_TOL", "1e-10"))
DYNAMICS_CASES = _int_env("SPINRELAX_DYNAMICS_CASES", 100)
SHARD_SIZE = _int_env("SPINRELAX_SHARD_SIZE", 10_000)

# ============================================================================
# Tolerances
# ============================================================================

MEMBERSHIP_TOL = 1e-10        # M_{3,R} acceptance, relative to matrix scale
SIGN_TOL = 1e-12              # criterion and inequality slack at unit scale
DEGENERACY_TOL = 1e-12        # |disc| < tol * max(1, |c2|^6)
RESIDUAL_TOL = 1e-9           # |f(lambda)| at unit scale
BOUNDARY_BAND = 1e-9          # excluded band around zero in equivalence suites
CONTINUITY_THRESHOLD = 0.5    # |dot| below this between neighbours is a discontinuity
ORACLE_TOL = 1e-8
POSITIVITY_TOL = 1e-10        # |r| <= 1 + tol during integration

SIGNIFICANT_DIGITS = 12
