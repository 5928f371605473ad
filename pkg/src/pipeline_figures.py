"""
Figure Pipeline – reference sweeps, plots and verification

Regenerates the standard data set under data/figures: temperature sweeps
and bifurcation reports for a few biases, the critical bias, direction
traces in both directions, characteristic curves across the three regions,
the weak-coupling comparison and the full verification run.

Each step is one `python -m spinrelax ...` invocation.
"""

import logging
import os
import subprocess
import sys
import time

# ============================================================================
# Logging setup
# ============================================================================

current_dir = os.path.dirname(os.path.abspath(__file__))
project_root = current_dir
while os.path.basename(project_root) in ['src', 'tests']:
    project_root = os.path.dirname(project_root)
data_dir = os.path.join(project_root, "data")
figures_dir = os.path.join(data_dir, "figures")

logger = logging.getLogger("pipeline_figures")


def setup_logging() -> None:
    os.makedirs(data_dir, exist_ok=True)
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s [%(levelname)s] %(message)s",
        handlers=[
            logging.FileHandler(os.path.join(data_dir, "pipeline.log")),
            logging.StreamHandler(sys.stdout),
        ],
    )


# ============================================================================
# Pipeline steps
# ============================================================================

PYTHON = sys.executable
STEP_TIMEOUT = 1800  # seconds; the verification step dominates


def _out(name: str) -> str:
    return os.path.join(figures_dir, name)


def _tag(eps: float) -> str:
    return f"e{eps:.1f}".replace(".", "")


def _sweep_step(eps: float) -> tuple[str, list[str]]:
    tag = _tag(eps)
    return (f"Sweep e~={eps}", ["sweep", "--eps-tilde", str(eps), "--eta", "1", "--theta-max", "3",
                                "--points", "600", "--out", _out(f"sweep_{tag}.csv"),
                                "--svg", _out(tag)])


def _bifurcation_step(eps: float) -> tuple[str, list[str]]:
    return (f"Bifurcations e~={eps}", ["bifurcations", "--eps-tilde", str(eps), "--eta", "1",
                                       "--theta-max", "3", "--out", _out(f"bifurcations_{_tag(eps)}.json")])


STEPS = [
    *(_sweep_step(eps) for eps in (0.0, 0.2, 0.4, 0.6)),
    *(_bifurcation_step(eps) for eps in (0.0, 0.2, 0.4, 0.6)),
    ("Critical bias",       ["critical-epsilon", "--eta", "1", "--out", _out("critical_epsilon.json")]),
    ("Direction traces",    ["direction", "--eps-tilde", "0.2", "--eta", "1", "--theta-min", "0.001",
                             "--theta-max", "3", "--points", "1200", "--out", _out("direction_e02.json"),
                             "--svg", _out("direction_e02")]),
    ("Mechanism curves",    ["mechanism", "--eps-tilde", "0.2", "--eta", "1", "--theta", "0.5,1.1,2.0",
                             "--out", _out("mechanism_e02.csv"), "--svg", _out("e02")]),
    ("Expectation trajectory", ["simulate", "--eps-tilde", "0.2", "--eta", "1", "--theta", "1.1",
                                "--rho0", "0,0,1", "--out", _out("trajectory_e02.csv"),
                                "--svg", _out("e02")]),
    ("Weak-coupling check", ["weak-compare", "--eps-tilde", "0.2", "--eta", "1", "--theta", "0.5",
                             "--out", _out("weak_compare_e02.json")]),
    ("Verification",        ["verify", "--samples", "100000", "--seed", "7", "--suite", "all",
                             "--out", _out("verify.txt")]),
]


def run_step(name: str, args: list[str]) -> bool:
    """Run a single pipeline step. Returns True on success."""
    logger.info(f"▶ Starting: {name} ({args[0]})")
    start = time.time()
    try:
        result = subprocess.run(
            [PYTHON, "-m", "spinrelax", "-q", *args],
            cwd=current_dir,
            capture_output=True,
            text=True,
            timeout=STEP_TIMEOUT,
        )
        elapsed = time.time() - start

        if result.returncode == 0:
            logger.info(f"✓ Completed: {name} in {elapsed:.1f}s")
        else:
            logger.warning(
                f"✗ Failed: {name} (exit code {result.returncode}) after {elapsed:.1f}s\n"
                f"  stderr: {result.stderr[:500]}"
            )
            return False

    except subprocess.TimeoutExpired:
        logger.warning(f"✗ Timeout: {name} exceeded {STEP_TIMEOUT}s limit")
        return False
    except Exception as e:
        logger.warning(f"✗ Error running {name}: {e}")
        return False

    return True


# ============================================================================
# Entry point
# ============================================================================

def main() -> int:
    setup_logging()
    os.makedirs(figures_dir, exist_ok=True)
    logger.info("=" * 60)
    logger.info("  FIGURE PIPELINE")
    logger.info("=" * 60)

    total = len(STEPS)
    passed = sum(run_step(name, args) for name, args in STEPS)
    failed = total - passed

    logger.info("=" * 60)
    logger.info(f"  FIGURE PIPELINE COMPLETE: {passed}/{total} succeeded, {failed} failed.")
    logger.info("=" * 60)

    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
