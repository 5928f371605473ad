"""
Stability Criteria – spectral criteria for M_{3,R}

For 3x3 matrices whose trace, determinant and adjugate trace are real:

  * all Re(lambda_i) >= 0  <=>  tr A, det A, tr adj A, f(tr A) >= 0
  * given the above, the triangle inequalities among Re(lambda_i)
    hold  <=>  f(tr A / 2) >= 0

with f(lambda) = det(lambda - A). Also checks the relaxation-constant
inequalities on a SpectrumReport and generates seeded M_{3,R} test
populations for the randomized equivalence suites.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from spinrelax import config
from spinrelax.core_model import bloch_entries
from spinrelax.cubic_spectrum import Regime, SpectrumReport
from spinrelax.errors import HypothesisNotMetError, NotM3RError

logger = logging.getLogger(__name__)


# ============================================================================
# Functionals
# ============================================================================

@dataclass(frozen=True)
class M3RFunctionals:
    """Real functionals of one matrix, or arrays of them for a stacked batch."""

    trace: np.ndarray
    det: np.ndarray
    tr_adj: np.ndarray
    f_at_trace: np.ndarray
    f_at_half_trace: np.ndarray
    membership_defect: np.ndarray
    scale: np.ndarray


def _char_poly(lam, trace, tr_adj, det):
    return ((lam - trace) * lam + tr_adj) * lam - det


def principal_minor_sum(m: np.ndarray) -> np.ndarray:
    """tr adj M as the sum of the principal 2x2 minors; m has shape (..., 3, 3)."""
    return (m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
            + m[..., 0, 0] * m[..., 2, 2] - m[..., 0, 2] * m[..., 2, 0]
            + m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])


def functionals_batch(matrices: np.ndarray) -> M3RFunctionals:
    """Functionals of a (..., 3, 3) stack; no membership check is applied."""
    m = np.asarray(matrices, dtype=complex)
    tr = np.trace(m, axis1=-2, axis2=-1)
    tr_adj = principal_minor_sum(m)
    det = np.linalg.det(m)

    scale = np.maximum(1.0, np.linalg.norm(m, axis=(-2, -1)))
    defect = np.maximum.reduce([
        np.abs(tr.imag) / scale,
        np.abs(tr_adj.imag) / scale ** 2,
        np.abs(det.imag) / scale ** 3,
    ])

    tr, tr_adj, det = tr.real, tr_adj.real, det.real
    return M3RFunctionals(
        trace=tr,
        det=det,
        tr_adj=tr_adj,
        f_at_trace=_char_poly(tr, tr, tr_adj, det),
        f_at_half_trace=_char_poly(tr / 2.0, tr, tr_adj, det),
        membership_defect=defect,
        scale=scale,
    )


def m3r_functionals(matrix: np.ndarray) -> M3RFunctionals:
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        raise ValueError("expected a finite 3x3 matrix")
    fn = functionals_batch(m)
    if fn.membership_defect > config.MEMBERSHIP_TOL:
        raise NotM3RError(float(fn.membership_defect))
    return M3RFunctionals(*(float(getattr(fn, f)) for f in (
        "trace", "det", "tr_adj", "f_at_trace", "f_at_half_trace", "membership_defect", "scale")))


# ============================================================================
# Criteria
# ============================================================================

def prop1_mask(fn: M3RFunctionals) -> np.ndarray:
    s = fn.scale
    tol = config.SIGN_TOL
    return ((fn.trace >= -tol * s) & (fn.det >= -tol * s ** 3)
            & (fn.tr_adj >= -tol * s ** 2) & (fn.f_at_trace >= -tol * s ** 3))


def prop2_mask(fn: M3RFunctionals) -> np.ndarray:
    return fn.f_at_half_trace >= -config.SIGN_TOL * fn.scale ** 3


def prop1_positive_real_parts(fn: M3RFunctionals) -> bool:
    """All eigenvalue real parts are nonnegative."""
    return bool(prop1_mask(fn))


def prop2_triangle(fn: M3RFunctionals) -> bool:
    """Triangle inequalities among the eigenvalue real parts; requires positive real parts."""
    if not prop1_positive_real_parts(fn):
        raise HypothesisNotMetError()
    return bool(prop2_mask(fn))


# ============================================================================
# Relaxation-constant inequalities
# ============================================================================

class InequalityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    regime: Regime
    margins: list[float]
    holds: list[bool]
    all_hold: bool
    equality: bool
    boundary: bool


def check_relaxation_inequalities(report: SpectrumReport) -> InequalityReport:
    """
    ComplexPair: 2 Gamma_T >= Gamma_L.
    ThreeReal / Degenerate: Gamma_L^(i) + Gamma_L^(j) >= Gamma_L^(k) for all three splits.
    """
    scale = max(1.0, sum(abs(e.re) for e in report.eigenvalues))
    tol = config.SIGN_TOL * scale

    if report.regime == Regime.COMPLEX_PAIR:
        margins = [2.0 * report.gamma_T - report.gamma_L[0]]
    else:
        g1, g2, g3 = report.gamma_L
        margins = [g1 + g2 - g3, g2 + g3 - g1, g3 + g1 - g2]

    holds = [m >= -tol for m in margins]
    return InequalityReport(
        regime=report.regime,
        margins=margins,
        holds=holds,
        all_hold=all(holds),
        equality=any(abs(m) <= tol for m in margins),
        boundary=report.regime == Regime.DEGENERATE,
    )


# ============================================================================
# Seeded M_{3,R} populations
# ============================================================================

class MatrixStyle(str, Enum):
    REAL_COMPANION = "real-companion"
    UNITARY_CONJUGATED = "unitary-conjugated"
    BLOCH = "bloch"


def shard_generator(seed: int, shard: int = 0) -> np.random.Generator:
    """Counter-based stream; shard k is the seed's stream jumped k times."""
    bit_gen = np.random.Philox(key=seed)
    if shard:
        bit_gen = bit_gen.jumped(shard)
    return np.random.Generator(bit_gen)


def companion(coeffs: np.ndarray) -> np.ndarray:
    """Companion matrices of lambda^3 + c2 lambda^2 + c1 lambda + c0; coeffs shape (..., 3)."""
    coeffs = np.asarray(coeffs, dtype=float)
    out = np.zeros(coeffs.shape[:-1] + (3, 3), dtype=complex)
    out[..., 1, 0] = 1.0
    out[..., 2, 1] = 1.0
    out[..., 0, 2] = -coeffs[..., 2]
    out[..., 1, 2] = -coeffs[..., 1]
    out[..., 2, 2] = -coeffs[..., 0]
    return out


def random_real_cubics(gen: np.random.Generator, n: int) -> np.ndarray:
    """
    Coefficients (c2, c1, c0) of real cubics, half with three real roots and
    half with a conjugate pair, roots straddling Re = 0 so both verdicts occur.
    """
    three_real = gen.random(n) < 0.5
    r1 = gen.uniform(-1.0, 3.0, n)
    a = gen.uniform(-1.0, 3.0, n)
    b = gen.uniform(-1.0, 3.0, n)
    w = gen.uniform(0.0, 3.0, n)

    z2 = np.where(three_real, a + 0j, a + 1j * w)
    z3 = np.where(three_real, b + 0j, a - 1j * w)
    c2 = -(r1 + z2 + z3)
    c1 = r1 * z2 + z2 * z3 + z3 * r1
    c0 = -(r1 * z2 * z3)
    return np.stack([c2.real, c1.real, c0.real], axis=-1)


def haar_unitaries(gen: np.random.Generator, n: int) -> np.ndarray:
    z = (gen.standard_normal((n, 3, 3)) + 1j * gen.standard_normal((n, 3, 3))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r, axis1=-2, axis2=-1)
    phases = phases / np.abs(phases)
    return q * phases[..., None, :]


def random_bloch_params(gen: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    eps = gen.uniform(0.0, 1.0, n)
    eta = 10.0 ** gen.uniform(-1.0, 1.0, n)
    theta = 10.0 ** gen.uniform(-3.0, np.log10(50.0), n)
    return eps, eta, theta


def sample_m3r_batch(gen: np.random.Generator, n: int, style: MatrixStyle,
                     coeffs: Optional[np.ndarray] = None) -> np.ndarray:
    style = MatrixStyle(style)
    if style == MatrixStyle.BLOCH:
        eps, eta, theta = random_bloch_params(gen, n)
        return bloch_entries(eps, 2.0 * eta * theta)

    if coeffs is None:
        coeffs = random_real_cubics(gen, n)
    else:
        coeffs = np.broadcast_to(np.asarray(coeffs, dtype=float), (n, 3))
    mats = companion(coeffs)
    if style == MatrixStyle.UNITARY_CONJUGATED:
        u = haar_unitaries(gen, n)
        mats = u @ mats @ np.conj(np.swapaxes(u, -1, -2))
    return mats


def sample_m3r_matrix(rng_seed: int, style: MatrixStyle,
                      coeffs: Optional[tuple[float, float, float]] = None) -> np.ndarray:
    """One matrix provably in M_{3,R}."""
    return sample_m3r_batch(shard_generator(rng_seed), 1, style, coeffs)[0]
