"""
Verification Suites

Seeded, sharded checks behind the `verify` command:

  prop1         sign conditions on tr, det, tr adj, f(tr) vs Re(lambda) >= 0
  prop2         f(tr/2) >= 0 vs the triangle inequalities among Re(lambda)
  inequalities  relaxation-constant inequalities and the trace sum rule on
                a fixed (e~, eta, theta) grid
  dynamics      RK4 master equation vs the exp(-A tau) propagator

Every shard draws from its own counter-based stream, so results do not
depend on the number of worker threads.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict
from tqdm import tqdm

from spinrelax import config
from spinrelax.core_model import SystemParams, build_bloch_matrix, gamma_theta
from spinrelax.cubic_spectrum import analyze_spectrum
from spinrelax.lindblad_dynamics import DensityState, compare_with_propagator
from spinrelax.stability_criteria import (
    MatrixStyle,
    check_relaxation_inequalities,
    functionals_batch,
    prop1_mask,
    prop2_mask,
    sample_m3r_batch,
    shard_generator,
)

logger = logging.getLogger(__name__)

GRID_EPS = [round(0.05 * i, 2) for i in range(21)]
GRID_ETA = [0.1, 1.0, 10.0]
GRID_THETA_POINTS = 400
GRID_THETA_RANGE = (1e-3, 50.0)
DYNAMICS_WINDOW = 10.0            # tau in [0, DYNAMICS_WINDOW / gamma]
DYNAMICS_GAMMA_RANGE = (0.5, 5.0)


class Suite(str, Enum):
    PROP1 = "prop1"
    PROP2 = "prop2"
    INEQUALITIES = "inequalities"
    DYNAMICS = "dynamics"
    ALL = "all"


class SuiteResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    suite: Suite
    checked: int
    excluded: int
    failures: int
    worst_residual: float
    counterexample: Optional[dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        return self.failures == 0


# ============================================================================
# Sharding
# ============================================================================

def _shard_sizes(samples: int) -> list[int]:
    full, rest = divmod(samples, config.SHARD_SIZE)
    return [config.SHARD_SIZE] * full + ([rest] if rest else [])


def _shard_matrices(seed: int, shard: int, size: int) -> tuple[np.ndarray, list[str]]:
    """One shard split across the three matrix styles."""
    gen = shard_generator(seed, shard)
    styles = list(MatrixStyle)
    parts, tags = [], []
    for i, style in enumerate(styles):
        n = size // len(styles) + (1 if i < size % len(styles) else 0)
        if n:
            parts.append(sample_m3r_batch(gen, n, style))
            tags.extend([style.value] * n)
    return np.concatenate(parts), tags


def _matrix_payload(matrix: np.ndarray) -> list[list[list[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


# ============================================================================
# Criterion suites
# ============================================================================

def _prop_shard(suite: Suite, seed: int, shard: int, size: int) -> SuiteResult:
    mats, tags = _shard_matrices(seed, shard, size)
    fn = functionals_batch(mats)
    re = np.sort(np.linalg.eigvals(mats).real, axis=-1)
    s = fn.scale
    band = config.BOUNDARY_BAND

    if suite == Suite.PROP1:
        predicted = prop1_mask(fn)
        actual = re[:, 0] >= 0.0
        near = ((np.abs(fn.trace) < band * s) | (np.abs(fn.det) < band * s ** 3)
                | (np.abs(fn.tr_adj) < band * s ** 2) | (np.abs(fn.f_at_trace) < band * s ** 3)
                | (np.abs(re[:, 0]) < band * s))
        population = np.ones(len(mats), dtype=bool)
        residual = re[:, 0]
    else:
        margin = re[:, 0] + re[:, 1] - re[:, 2]
        predicted = prop2_mask(fn)
        actual = margin >= 0.0
        near = (np.abs(fn.f_at_half_trace) < band * s ** 3) | (np.abs(margin) < band * s)
        # only matrices satisfying the first proposition, on both sides
        population = prop1_mask(fn) & (re[:, 0] >= band * s)
        residual = margin

    checked = population & ~near
    wrong = checked & (predicted != actual)
    idx = np.nonzero(wrong)[0]

    counterexample = None
    if idx.size:
        i = int(idx[0])
        counterexample = {
            "seed": seed, "shard": shard, "index": i, "style": tags[i],
            "matrix": _matrix_payload(mats[i]), "real_parts": re[i].tolist(),
            "predicted": bool(predicted[i]), "actual": bool(actual[i]),
        }
    worst = float(np.min(np.abs(residual[checked]))) if checked.any() else math.inf
    return SuiteResult(
        suite=suite,
        checked=int(checked.sum()),
        excluded=int((population & near).sum()),
        failures=int(idx.size),
        worst_residual=worst,
        counterexample=counterexample,
    )


def _merge(suite: Suite, parts: list[SuiteResult]) -> SuiteResult:
    first_bad = next((p.counterexample for p in parts if p.counterexample), None)
    return SuiteResult(
        suite=suite,
        checked=sum(p.checked for p in parts),
        excluded=sum(p.excluded for p in parts),
        failures=sum(p.failures for p in parts),
        worst_residual=min((p.worst_residual for p in parts), default=math.inf),
        counterexample=first_bad,
    )


def run_proposition_suite(suite: Suite, samples: int, seed: int,
                          threads: Optional[int] = None, progress: bool = False) -> SuiteResult:
    suite = Suite(suite)
    sizes = _shard_sizes(samples)
    workers = threads or config.thread_count()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(_prop_shard, suite, seed, k, n) for k, n in enumerate(sizes)]
        parts = [f.result() for f in tqdm(futures, desc=suite.value, disable=not progress)]
    return _merge(suite, parts)


# ============================================================================
# Inequality grid
# ============================================================================

def _grid_point(params: SystemParams) -> tuple[float, float, Optional[dict[str, Any]]]:
    """Worst inequality margin, trace-sum deviation and a failure payload, if any."""
    bloch = build_bloch_matrix(params)
    report = analyze_spectrum(bloch)
    check = check_relaxation_inequalities(report)
    trace_sum = sum(e.re for e in report.eigenvalues)
    deviation = abs(trace_sum - 2.0 * gamma_theta(params))

    failure = None
    if not check.all_hold or deviation > 1e-10 * bloch.scale:
        failure = {
            "eps_tilde": params.eps_tilde, "eta": params.eta, "theta": params.theta,
            "regime": report.regime.value, "margins": check.margins, "trace_deviation": deviation,
        }
    return min(check.margins), deviation, failure


def run_inequality_suite(threads: Optional[int] = None, progress: bool = False) -> SuiteResult:
    thetas = np.geomspace(*GRID_THETA_RANGE, GRID_THETA_POINTS)
    grid = [SystemParams(eps_tilde=e, eta=h, theta=float(t))
            for e in GRID_EPS for h in GRID_ETA for t in thetas]

    workers = threads or config.thread_count()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(tqdm(executor.map(_grid_point, grid), total=len(grid),
                         desc="inequalities", disable=not progress))

    failures = [f for _, _, f in rows if f is not None]
    logger.info(f"inequality grid: {len(grid)} points, worst trace deviation "
                f"{max(d for _, d, _ in rows):.3e}")
    return SuiteResult(
        suite=Suite.INEQUALITIES,
        checked=len(grid),
        excluded=0,
        failures=len(failures),
        worst_residual=min(m for m, _, _ in rows),
        counterexample=failures[0] if failures else None,
    )


# ============================================================================
# Dynamics oracle
# ============================================================================

def dynamics_cases(samples: int, seed: int) -> list[tuple[SystemParams, DensityState]]:
    """Random (params, rho0) pairs with gamma in [0.5, 5] and rho0 anywhere in the Bloch ball."""
    gen = shard_generator(seed)
    n = min(samples, config.DYNAMICS_CASES)
    eps = gen.uniform(0.0, 1.0, n)
    gamma = gen.uniform(*DYNAMICS_GAMMA_RANGE, n)
    axis = gen.standard_normal((n, 3))
    axis /= np.linalg.norm(axis, axis=1, keepdims=True)
    radius = gen.uniform(0.0, 1.0, n) ** (1.0 / 3.0)

    return [(SystemParams(eps_tilde=float(eps[i]), eta=1.0, theta=float(gamma[i]) / 2.0),
             DensityState.of(radius[i] * axis[i])) for i in range(n)]


def run_dynamics_suite(samples: int, seed: int, threads: Optional[int] = None,
                       progress: bool = False) -> SuiteResult:
    cases = dynamics_cases(samples, seed)

    def run(case):
        params, rho0 = case
        # stride 1: the norm is checked after every RK4 step
        return compare_with_propagator(params, rho0, DYNAMICS_WINDOW / gamma_theta(params), stride=1)

    workers = threads or config.thread_count()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(tqdm(executor.map(run, cases), total=len(cases),
                            desc="dynamics", disable=not progress))

    bad = [r for r in results
           if r.max_deviation > config.ORACLE_TOL or r.max_norm_increase > config.POSITIVITY_TOL]
    counterexample = None
    if bad:
        counterexample = bad[0].model_dump(mode="json")
    return SuiteResult(
        suite=Suite.DYNAMICS,
        checked=len(results),
        excluded=0,
        failures=len(bad),
        worst_residual=max((r.max_deviation for r in results), default=0.0),
        counterexample=counterexample,
    )


# ============================================================================
# Entry
# ============================================================================

def run_suites(suite: Suite, samples: int, seed: int, threads: Optional[int] = None,
               progress: bool = False) -> list[SuiteResult]:
    suite = Suite(suite)
    selected = [s for s in Suite if s != Suite.ALL] if suite == Suite.ALL else [suite]

    results = []
    for s in selected:
        if s in (Suite.PROP1, Suite.PROP2):
            result = run_proposition_suite(s, samples, seed, threads, progress)
        elif s == Suite.INEQUALITIES:
            result = run_inequality_suite(threads, progress)
        else:
            result = run_dynamics_suite(samples, seed, threads, progress)
        logger.info(f"suite {s.value}: {result.checked} checked, {result.excluded} excluded, "
                    f"{result.failures} failures")
        results.append(result)
    return results
