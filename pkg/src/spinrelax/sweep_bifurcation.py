"""
Sweep & Bifurcation – Temperature Scans of the Relaxation Spectrum

Analyzes the Bloch matrix on a uniform theta grid, locates the
temperatures where the cubic discriminant changes sign (a complex pair
splitting into / merging from two real eigenvalues), and follows one
longitudinal branch through those points to find the direction jumps
seen when the temperature is raised or lowered.

A depends on theta only through gamma = 2 eta theta, so every critical
gamma is a function of eps_tilde alone.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict
from tqdm import tqdm

from spinrelax import config
from spinrelax.core_model import SystemParams, build_bloch_matrix, closed_form_coeffs, gamma_theta
from spinrelax.cubic_spectrum import Eigenvalue, Regime, analyze_spectrum, cubic_discriminant, degeneracy_band
from spinrelax.eigenbasis import E_Z, hamiltonian_direction
from spinrelax.errors import RangeError

logger = logging.getLogger(__name__)

REGION_NAMES = ["I", "II", "III", "IV", "V", "VI"]


class Trace(str, Enum):
    UPWARD = "upward"
    DOWNWARD = "downward"


# ============================================================================
# Result types
# ============================================================================

class SweepRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    eps_tilde: float
    eta: float
    theta: float
    gamma: float
    regime: Regime
    discriminant: float
    eigenvalues: list[Eigenvalue]
    gamma_L: list[float]
    gamma_T: Optional[float] = None
    ratio: Optional[float] = None
    directions: list[Optional[list[float]]]
    branch_labels: list[int]


class CriticalPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    theta: float
    gamma: float
    bracket: tuple[float, float]
    residual: float


class Region(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    regime: Regime
    theta_lo: float
    theta_hi: float


class DirectionJump(BaseModel):
    model_config = ConfigDict(frozen=True)

    theta: float             # first grid point past the jump, in trace order
    theta_before: float
    from_direction: list[float]
    to_direction: list[float]
    from_rate: float
    to_rate: float
    trace: Trace


class BifurcationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    eps_tilde: float
    eta: float
    theta_range: tuple[float, float]
    critical_points: list[CriticalPoint]
    regions: list[Region]
    jumps: list[DirectionJump] = []

    @property
    def critical_thetas(self) -> list[float]:
        return [c.theta for c in self.critical_points]

    @property
    def critical_gammas(self) -> list[float]:
        return [c.gamma for c in self.critical_points]


class CriticalEpsilonReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    eps_star: float
    gamma_pinch: float
    theta_pinch: float
    eta: float


# ============================================================================
# Discriminant in gamma
# ============================================================================

def _delta_sq(eps_tilde: float) -> float:
    return (1.0 - eps_tilde) * (1.0 + eps_tilde)


def discriminant_curve(eps_tilde: float, gammas) -> np.ndarray:
    """Cubic discriminant of f at each gamma, from the closed-form coefficients."""
    gammas = np.asarray(gammas, dtype=float)
    c2, c1, c0 = closed_form_coeffs(gammas, _delta_sq(eps_tilde))
    return cubic_discriminant(c2, c1, c0)


def _window_coefficient(eps_tilde: float) -> float:
    """K in disc = -4 e~^2 x^2 + K x - 4, x = gamma^2."""
    d2 = _delta_sq(eps_tilde)
    return 36.0 * d2 - 27.0 * d2 * d2 - 8.0


def analytic_critical_gammas(eps_tilde: float) -> list[float]:
    """Positive gammas where the discriminant changes sign; [] when no window exists."""
    k = _window_coefficient(eps_tilde)
    e2 = eps_tilde * eps_tilde
    if k <= 0.0:
        return []
    if e2 == 0.0:
        return [math.sqrt(4.0 / k)]

    q = k * k - 64.0 * e2
    if q <= 0.0:
        # tangent or no real root: the sign never changes
        return []
    x_hi = (k + math.sqrt(q)) / (8.0 * e2)
    x_lo = 1.0 / (e2 * x_hi)     # product of the roots is 1 / e~^2
    return [math.sqrt(x_lo), math.sqrt(x_hi)]


def _peak_discriminant(eps_tilde: float) -> float:
    """max over gamma > 0 of the discriminant; positive iff a ThreeReal window exists."""
    k = _window_coefficient(eps_tilde)
    if k <= 0.0:
        return -4.0
    return k * k / (16.0 * eps_tilde * eps_tilde) - 4.0


# ============================================================================
# Temperature sweep
# ============================================================================

def _check_range(theta_range: Sequence[float]) -> tuple[float, float]:
    lo, hi = (float(t) for t in theta_range)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo < 0.0 or not lo < hi:
        raise RangeError(f"invalid theta range [{lo}, {hi}]")
    return lo, hi


def _analyze_point(params: SystemParams) -> SweepRecord:
    report = analyze_spectrum(build_bloch_matrix(params))
    return SweepRecord(
        eps_tilde=params.eps_tilde,
        eta=params.eta,
        theta=params.theta,
        gamma=gamma_theta(params),
        regime=report.regime,
        discriminant=report.discriminant,
        eigenvalues=report.eigenvalues,
        gamma_L=report.gamma_L,
        gamma_T=report.gamma_T,
        ratio=report.ratio,
        directions=report.directions,
        branch_labels=list(range(len(report.gamma_L))),
    )


def _overlap(a: Optional[list[float]], b: Optional[list[float]]) -> float:
    if a is None or b is None:
        return 0.0
    return abs(float(np.asarray(a) @ np.asarray(b)))


def _closest_branch(target_dir: Optional[list[float]], target_rate: float,
                    dirs: Sequence[Optional[list[float]]], rates: Sequence[float]) -> int:
    """Index of the branch most parallel to the target; ties go to the nearest rate."""
    return max(range(len(rates)),
               key=lambda i: (round(_overlap(target_dir, dirs[i]), 9), -abs(rates[i] - target_rate)))


def _label_branches(records: Sequence[SweepRecord]) -> list[list[int]]:
    """
    Labels for the longitudinal branches of consecutive records, by continuity
    of the direction l.

    Between points with the same number of real roots the labels follow rank
    (distinct real roots do not cross). When two real roots appear (1 -> 3)
    the old label moves to the new root whose direction is most parallel to
    the old one and the other two get fresh labels. When two roots merge
    (3 -> 1) the survivor inherits the label of the previous branch most
    parallel to it.
    """
    labels: list[list[int]] = []
    next_label = 0
    for idx, rec in enumerate(records):
        count = len(rec.gamma_L)
        if idx == 0:
            labels.append(list(range(count)))
            next_label = count
            continue

        prev_rec, prev = records[idx - 1], labels[-1]
        if count == len(prev):
            labels.append(list(prev))
        elif len(prev) == 1 and count == 3:
            kept = _closest_branch(prev_rec.directions[0], prev_rec.gamma_L[0],
                                   rec.directions, rec.gamma_L)
            row = []
            for i in range(3):
                if i == kept:
                    row.append(prev[0])
                else:
                    row.append(next_label)
                    next_label += 1
            labels.append(row)
        elif len(prev) == 3 and count == 1:
            survivor = _closest_branch(rec.directions[0], rec.gamma_L[0],
                                       prev_rec.directions, prev_rec.gamma_L)
            labels.append([prev[survivor]])
        else:
            labels.append(list(range(next_label, next_label + count)))
            next_label += count
    return labels


def _gauge_continuously(records: list[SweepRecord], labels: list[list[int]]) -> list[SweepRecord]:
    """Flip l -> -l to keep each labeled branch continuous; warn on large-angle breaks."""
    last: dict[int, np.ndarray] = {}
    out = []
    for rec, row in zip(records, labels):
        directions = []
        for label, l in zip(row, rec.directions):
            if l is None:
                directions.append(None)
                continue
            vec = np.asarray(l)
            if label in last:
                dot = float(vec @ last[label])
                if dot < 0.0:
                    vec = -vec
                if abs(dot) < config.CONTINUITY_THRESHOLD:
                    logger.warning(
                        f"direction of branch {label} turns by more than "
                        f"acos({config.CONTINUITY_THRESHOLD}) at theta={rec.theta:.6g}"
                    )
            last[label] = vec
            directions.append(vec.tolist())
        out.append(rec.model_copy(update={"directions": directions, "branch_labels": row}))
    return out


def sweep_temperature(eps_tilde: float, eta: float, theta_range: Sequence[float],
                      n_points: int, threads: Optional[int] = None,
                      progress: bool = False) -> list[SweepRecord]:
    """
    One SweepRecord per point of a uniform theta grid. Points are analyzed
    in parallel; labeling and sign continuity are a sequential post-pass.
    """
    if n_points < 2:
        raise RangeError("a sweep needs at least 2 points")
    lo, hi = _check_range(theta_range)
    base = SystemParams(eps_tilde=eps_tilde, eta=eta, theta=lo)
    grid = [base.with_theta(t) for t in np.linspace(lo, hi, n_points)]

    workers = threads or config.thread_count()
    logger.info(f"Sweep e~={eps_tilde} eta={eta} theta=[{lo:.6g}, {hi:.6g}] n={n_points} ({workers} threads)")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        records = list(tqdm(executor.map(_analyze_point, grid), total=n_points,
                            desc="Sweep", disable=not progress))

    records = _gauge_continuously(records, _label_branches(records))
    counts = {r: sum(1 for rec in records if rec.regime == r) for r in Regime}
    logger.info(f"Sweep finished: " + ", ".join(f"{r.value}={n}" for r, n in counts.items()))
    return records


# ============================================================================
# Bifurcation location
# ============================================================================

def _scan_signs(eps_tilde: float, eta: float, thetas: np.ndarray) -> np.ndarray:
    disc = discriminant_curve(eps_tilde, 2.0 * eta * thetas)
    band = np.array([degeneracy_band(-4.0 * eta * t) for t in thetas])
    return np.where(disc > band, 1, np.where(disc < -band, -1, 0))


def _brackets(thetas: np.ndarray, signs: np.ndarray) -> list[tuple[float, float]]:
    keep = signs != 0
    t, s = thetas[keep], signs[keep]
    flips = np.nonzero(s[:-1] != s[1:])[0]
    return [(float(t[i]), float(t[i + 1])) for i in flips]


def _prescan(eps_tilde: float, eta: float, lo: float, hi: float) -> list[tuple[float, float]]:
    """Sign-change brackets; the grid doubles until the count stops changing."""
    n = max(2, config.PRESCAN_POINTS)
    thetas = np.linspace(lo, hi, n)
    brackets = _brackets(thetas, _scan_signs(eps_tilde, eta, thetas))
    while n < config.PRESCAN_MAX_POINTS:
        n = min(2 * n, config.PRESCAN_MAX_POINTS)
        thetas = np.linspace(lo, hi, n)
        refined = _brackets(thetas, _scan_signs(eps_tilde, eta, thetas))
        if len(refined) == len(brackets):
            return refined
        logger.debug(f"pre-scan at {n} points found {len(refined)} brackets (was {len(brackets)})")
        brackets = refined
    return brackets


def _bisect(eps_tilde: float, eta: float, lo: float, hi: float, tol: float) -> float:
    def disc(theta: float) -> float:
        return float(discriminant_curve(eps_tilde, 2.0 * eta * theta))

    f_lo = disc(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = disc(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _regime_of(sign: int) -> Regime:
    return Regime.THREE_REAL if sign > 0 else Regime.COMPLEX_PAIR


def find_bifurcations(eps_tilde: float, eta: float, theta_range: Sequence[float],
                      tol: Optional[float] = None) -> BifurcationReport:
    """Critical temperatures by dense pre-scan of the discriminant plus bisection."""
    tol = config.BISECTION_TOL if tol is None else tol
    if not tol > 0.0:
        raise RangeError("bisection tolerance must be > 0")
    lo, hi = _check_range(theta_range)
    SystemParams(eps_tilde=eps_tilde, eta=eta, theta=lo)

    end_signs = _scan_signs(eps_tilde, eta, np.array([lo, hi]))
    if np.any(end_signs == 0):
        raise RangeError(f"theta range endpoint inside the Degenerate band; widen range [{lo}, {hi}]")

    critical = []
    for a, b in _prescan(eps_tilde, eta, lo, hi):
        theta = _bisect(eps_tilde, eta, a, b, tol)
        critical.append(CriticalPoint(
            theta=theta,
            gamma=2.0 * eta * theta,
            bracket=(a, b),
            residual=float(discriminant_curve(eps_tilde, 2.0 * eta * theta)),
        ))

    edges = [lo] + [c.theta for c in critical] + [hi]
    sign = int(end_signs[0])
    regions = []
    for i in range(len(edges) - 1):
        name = REGION_NAMES[i] if i < len(REGION_NAMES) else str(i + 1)
        regions.append(Region(name=name, regime=_regime_of(sign), theta_lo=edges[i], theta_hi=edges[i + 1]))
        sign = -sign

    logger.info(f"Bifurcations for e~={eps_tilde} eta={eta}: "
                f"{[round(c.theta, 10) for c in critical]} ({len(regions)} regions)")
    return BifurcationReport(
        eps_tilde=eps_tilde,
        eta=eta,
        theta_range=(lo, hi),
        critical_points=critical,
        regions=regions,
    )


def critical_epsilon(eta: float = 1.0, search_range: Sequence[float] = (0.05, 0.95),
                     tol: float = 1e-12) -> CriticalEpsilonReport:
    """
    eps_tilde above which no ThreeReal window exists for any gamma > 0,
    by bisection on the sign of the peak discriminant.
    """
    lo, hi = (float(e) for e in search_range)
    if not 0.0 < lo < hi < 1.0:
        raise RangeError(f"search range must lie inside (0, 1), got [{lo}, {hi}]")
    SystemParams(eps_tilde=lo, eta=eta, theta=0.0)

    g_lo, g_hi = _peak_discriminant(lo), _peak_discriminant(hi)
    if (g_lo > 0.0) == (g_hi > 0.0):
        raise RangeError(f"no sign change of the window discriminant in [{lo}, {hi}]")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (_peak_discriminant(mid) > 0.0) == (g_lo > 0.0):
            lo = mid
        else:
            hi = mid
    eps_star = 0.5 * (lo + hi)

    # vertex of the quadratic in gamma^2
    gamma_pinch = math.sqrt(_window_coefficient(eps_star) / (8.0 * eps_star * eps_star))
    logger.info(f"Critical e~* = {eps_star:.10f} (window pinches at gamma={gamma_pinch:.10f})")
    return CriticalEpsilonReport(
        eps_star=eps_star,
        gamma_pinch=gamma_pinch,
        theta_pinch=gamma_pinch / (2.0 * eta),
        eta=eta,
    )


# ============================================================================
# Direction tracking
# ============================================================================

def _start_index(record: SweepRecord, anchor: np.ndarray) -> int:
    best, best_dot = None, -1.0
    for i, l in enumerate(record.directions):
        if l is None:
            continue
        dot = abs(float(np.asarray(l) @ anchor))
        if dot > best_dot:
            best, best_dot = i, dot
    if best is None:
        raise RangeError(f"no longitudinal direction at theta={record.theta}")
    return best


def track_direction_jumps(sweep: Sequence[SweepRecord], trace: Trace) -> list[DirectionJump]:
    """
    Follow one longitudinal branch through the sweep in trace order and record
    a jump whenever its real eigenvalue merges into the complex pair.

    Upward traces start on the low-temperature branch (anchor (D~, 0, e~));
    downward traces on the high-temperature branch (anchor (0, 0, 1)).
    """
    trace = Trace(trace)
    records = sorted(sweep, key=lambda r: r.theta, reverse=trace == Trace.DOWNWARD)
    if not records or not any(rec.gamma_L for rec in records):
        raise RangeError("sweep has no real eigenvalue to follow")

    first = records[0]
    if trace == Trace.UPWARD:
        params = SystemParams(eps_tilde=first.eps_tilde, eta=first.eta, theta=first.theta)
        anchor = hamiltonian_direction(params.eps_tilde, params.delta_tilde)
    else:
        anchor = E_Z

    labels = _label_branches(records)
    followed = labels[0][_start_index(first, anchor)]
    current = np.asarray(first.directions[labels[0].index(followed)])
    current_rate = first.gamma_L[labels[0].index(followed)]

    jumps = []
    for prev, rec, row in zip(records, records[1:], labels[1:]):
        if followed not in row:
            to_idx = 0
            followed = row[to_idx]
            target = rec.directions[to_idx]
            to_dir = current if target is None else _align(np.asarray(target), current)
            jumps.append(DirectionJump(
                theta=rec.theta,
                theta_before=prev.theta,
                from_direction=current.tolist(),
                to_direction=to_dir.tolist(),
                from_rate=current_rate,
                to_rate=rec.gamma_L[to_idx],
                trace=trace,
            ))
            logger.info(f"{trace.value} trace jumps at theta={rec.theta:.6g} "
                        f"(Gamma_L {current_rate:.6g} -> {rec.gamma_L[to_idx]:.6g})")
            current, current_rate = to_dir, rec.gamma_L[to_idx]
            continue

        idx = row.index(followed)
        current_rate = rec.gamma_L[idx]
        if rec.directions[idx] is not None:
            current = _align(np.asarray(rec.directions[idx]), current)
    return jumps


def _align(vec: np.ndarray, reference: np.ndarray) -> np.ndarray:
    return -vec if float(vec @ reference) < 0.0 else vec
