"""
Report output: CSV tables, JSON documents and SVG line plots.

Numbers are written with 12 significant digits; absent quantities are
empty CSV fields / JSON nulls. SVG output is deterministic (fixed ids,
no date stamp) so reruns produce byte-identical files.
"""

import csv
import json
import logging
from typing import Any, Iterable, Optional, Sequence, TextIO

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from pydantic import BaseModel  # noqa: E402

from spinrelax import config  # noqa: E402
from spinrelax.lindblad_dynamics import Trajectory  # noqa: E402
from spinrelax.sweep_bifurcation import BifurcationReport, SweepRecord  # noqa: E402

logger = logging.getLogger(__name__)

SWEEP_HEADER = [
    "theta", "gamma", "regime",
    "re1", "im1", "re2", "im2", "re3", "im3",
    "gammaL1", "gammaL2", "gammaL3", "gammaT", "ratio",
    "lx1", "ly1", "lz1", "lx2", "ly2", "lz2", "lx3", "ly3", "lz3",
]
TRAJECTORY_HEADER = ["tau", "rx", "ry", "rz"]

FIGURE_SIZE = (800 / 72.0, 600 / 72.0)   # inches at the SVG 72 pt/in -> 800 x 600 units

plt.rcParams["svg.hashsalt"] = "spinrelax"
plt.rcParams["svg.fonttype"] = "path"


# ============================================================================
# Number formatting
# ============================================================================

def fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    return f"{float(value):.{config.SIGNIFICANT_DIGITS}g}"


def round_sig(value: Any) -> Any:
    """Round every float in a JSON-like structure to the output precision."""
    if isinstance(value, float):
        return float(fmt(value))
    if isinstance(value, dict):
        return {k: round_sig(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_sig(v) for v in value]
    return value


def _padded(values: Sequence[Optional[float]], width: int) -> list[str]:
    cells = [fmt(v) for v in values]
    return cells + [""] * (width - len(cells))


# ============================================================================
# CSV
# ============================================================================

def sweep_row(rec: SweepRecord) -> list[str]:
    eig = []
    for e in rec.eigenvalues:
        eig.extend([e.re, e.im])
    directions: list[Optional[float]] = []
    for l in rec.directions:
        directions.extend(l if l is not None else [None, None, None])
    return ([fmt(rec.theta), fmt(rec.gamma), rec.regime.value]
            + _padded(eig, 6)
            + _padded(rec.gamma_L, 3)
            + [fmt(rec.gamma_T), fmt(rec.ratio)]
            + _padded(directions, 9))


def write_csv(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def write_sweep_csv(stream: TextIO, records: Sequence[SweepRecord]) -> None:
    write_csv(stream, SWEEP_HEADER, (sweep_row(r) for r in records))


def write_trajectory_csv(stream: TextIO, trajectory: Trajectory) -> None:
    rows = ([fmt(t)] + [fmt(x) for x in r] for t, r in zip(trajectory.tau, trajectory.r))
    write_csv(stream, TRAJECTORY_HEADER, rows)


def write_curves_csv(stream: TextIO, lam: np.ndarray, curves: Sequence[np.ndarray]) -> None:
    header = ["lambda"] + [f"f_{i + 1}" for i in range(len(curves))]
    rows = ([fmt(x)] + [fmt(c[i]) for c in curves] for i, x in enumerate(lam))
    write_csv(stream, header, rows)


# ============================================================================
# JSON
# ============================================================================

def model_json(model: BaseModel) -> dict[str, Any]:
    return round_sig(model.model_dump(mode="json"))


def bifurcation_json(report: BifurcationReport) -> dict[str, Any]:
    doc = model_json(report)
    doc["critical_thetas"] = round_sig(report.critical_thetas)
    doc["critical_gammas"] = round_sig(report.critical_gammas)
    return doc


def dump_json(stream: TextIO, doc: Any) -> None:
    json.dump(doc, stream, indent=2, ensure_ascii=False, sort_keys=True)
    stream.write("\n")


# ============================================================================
# SVG plots
# ============================================================================

def _save_svg(fig, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    logger.info(f"Wrote plot {path}")


def _branch_series(records: Sequence[SweepRecord], values) -> dict[int, tuple[list[float], list[float]]]:
    series: dict[int, tuple[list[float], list[float]]] = {}
    for rec in records:
        for label, v in zip(rec.branch_labels, values(rec)):
            if v is None:
                continue
            xs, ys = series.setdefault(label, ([], []))
            xs.append(rec.theta)
            ys.append(v)
    return series


def plot_rates(records: Sequence[SweepRecord], path: str, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    for label, (xs, ys) in sorted(_branch_series(records, lambda r: r.gamma_L).items()):
        ax.plot(xs, ys, ".", markersize=2, label=f"Gamma_L branch {label}")
    pts = [(r.theta, r.gamma_T) for r in records if r.gamma_T is not None]
    if pts:
        ax.plot(*zip(*pts), ".", markersize=2, color="black", label="Gamma_T")
    ax.set_xlabel("theta")
    ax.set_ylabel("rate / Omega0")
    ax.set_title(title)
    ax.legend(loc="upper left")
    _save_svg(fig, path)


def plot_ratio(records: Sequence[SweepRecord], path: str, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    pts = [(r.theta, r.ratio) for r in records if r.ratio is not None]
    if pts:
        ax.plot(*zip(*pts), "-")
    ax.set_xlabel("theta")
    ax.set_ylabel("Gamma_L / Gamma_T")
    ax.set_title(title)
    _save_svg(fig, path)


def direction_series(records: Sequence[SweepRecord]) -> dict[str, dict[int, tuple[list[float], list[float]]]]:
    """Per-branch theta series of each lab component of l, keyed "lx", "ly", "lz"."""
    return {
        name: _branch_series(records, lambda r, k=axis: [None if l is None else l[k] for l in r.directions])
        for axis, name in enumerate(("lx", "ly", "lz"))
    }


def plot_directions(records: Sequence[SweepRecord], path: str, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    for name, series in direction_series(records).items():
        for label, (xs, ys) in sorted(series.items()):
            ax.plot(xs, ys, ".", markersize=2, label=f"{name} branch {label}")
    ax.set_xlabel("theta")
    ax.set_ylabel("component of l")
    ax.set_title(title)
    ax.legend(loc="best")
    _save_svg(fig, path)


def plot_trajectory(trajectory: Trajectory, path: str, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    for i, name in enumerate(("rx", "ry", "rz")):
        ax.plot(trajectory.tau, trajectory.r[:, i], "-", label=name)
    ax.set_xlabel("tau")
    ax.set_ylabel("Bloch vector")
    ax.set_title(title)
    ax.legend(loc="best")
    _save_svg(fig, path)


def plot_curves(lam: np.ndarray, curves: Sequence[np.ndarray], labels: Sequence[str],
                path: str, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    for curve, label in zip(curves, labels):
        ax.plot(lam, curve, "-", label=label)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("lambda")
    ax.set_ylabel("f(lambda)")
    ax.set_title(title)
    ax.legend(loc="best")
    _save_svg(fig, path)
