"""
Cubic Spectrum – Closed-Form Roots and Relaxation Constants

Solves the real characteristic cubic of the Bloch matrix with Cardano's
formula (trigonometric form when all three roots are real), classifies
the spectrum, and extracts Gamma_L, Gamma_T and the longitudinal
directions l with sigma_L = l.sigma decaying as exp(-Gamma_L tau).
"""

import logging
import math
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from spinrelax import config
from spinrelax.core_model import BlochMatrix, SystemParams, closed_form_coeffs, gamma_theta
from spinrelax.eigenbasis import direction_from_coefficients, hamiltonian_direction, hermitian_part
from spinrelax.errors import DegenerateBranchPointError, NonFiniteInputError, NotAnEigenvalueError

logger = logging.getLogger(__name__)


class Regime(str, Enum):
    COMPLEX_PAIR = "ComplexPair"
    THREE_REAL = "ThreeReal"
    DEGENERATE = "Degenerate"


class Eigenvalue(BaseModel):
    model_config = ConfigDict(frozen=True)

    re: float
    im: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def of(cls, z: complex) -> "Eigenvalue":
        return cls(re=float(z.real), im=float(z.imag))


class SpectrumReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    eigenvalues: list[Eigenvalue]
    regime: Regime
    discriminant: float
    gamma_L: list[float]
    gamma_T: Optional[float] = None
    oscillation_freq: Optional[float] = None
    # one entry per gamma_L; None marks the double root of a Degenerate spectrum
    directions: list[Optional[list[float]]]

    @property
    def ratio(self) -> Optional[float]:
        if self.regime != Regime.COMPLEX_PAIR or not self.gamma_T:
            return None
        return self.gamma_L[0] / self.gamma_T


# ============================================================================
# Cubic solver
# ============================================================================

def cubic_discriminant(c2, c1, c0):
    """Discriminant of lambda^3 + c2 lambda^2 + c1 lambda + c0; works on arrays."""
    return (18.0 * c2 * c1 * c0 - 4.0 * c2 ** 3 * c0 + c2 ** 2 * c1 ** 2
            - 4.0 * c1 ** 3 - 27.0 * c0 ** 2)


def discriminant(params: SystemParams) -> float:
    return float(cubic_discriminant(*closed_form_coeffs(gamma_theta(params), params.delta_sq)))


def degeneracy_band(c2: float, tol: Optional[float] = None) -> float:
    tol = config.DEGENERACY_TOL if tol is None else tol
    return tol * max(1.0, abs(c2) ** 6)


def _polish(z: complex, c2: float, c1: float, c0: float) -> complex:
    """One Newton step; skipped where f' vanishes (multiple roots)."""
    f = ((z + c2) * z + c1) * z + c0
    df = (3.0 * z + 2.0 * c2) * z + c1
    if abs(df) <= 1e-8 * max(1.0, abs(z) ** 2):
        return z
    return z - f / df


def _snap(x: float, scale: float) -> float:
    """Real parts within rounding of zero are zero."""
    return 0.0 if abs(x) <= 8.0 * np.finfo(float).eps * scale else x


def solve_cubic(coeffs: tuple[float, float, float],
                degeneracy_tol: Optional[float] = None) -> tuple[list[complex], float]:
    """
    Roots of lambda^3 + c2 lambda^2 + c1 lambda + c0 and the discriminant.

    disc > band: three distinct real roots (trigonometric form);
    disc < -band: one real root and a conjugate pair (Cardano);
    otherwise a multiple root.
    """
    c2, c1, c0 = (float(c) for c in coeffs)
    if not all(math.isfinite(c) for c in (c2, c1, c0)):
        raise NonFiniteInputError(f"non-finite cubic coefficients {coeffs!r}")

    disc = cubic_discriminant(c2, c1, c0)
    shift = -c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2 ** 3 / 27.0 - c2 * c1 / 3.0 + c0
    band = degeneracy_band(c2, degeneracy_tol)
    scale = max(1.0, abs(c2), math.sqrt(abs(c1)), abs(c0) ** (1.0 / 3.0))

    if disc > band and p < 0.0:
        rho = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * rho)
        phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = [complex(rho * math.cos(phi - 2.0 * math.pi * k / 3.0) + shift)
                 for k in range(3)]
        roots = [complex(_polish(r.real, c2, c1, c0)) for r in roots]
    elif disc < -band:
        half_q = q / 2.0
        root_d = math.sqrt(half_q * half_q + (p / 3.0) ** 3)
        # pick the larger-magnitude radicand to avoid cancellation
        u = np.cbrt(-half_q - math.copysign(root_d, half_q))
        v = -p / (3.0 * u) if u != 0.0 else 0.0
        real_root = _snap(_polish(u + v + shift, c2, c1, c0).real, scale)
        pair = complex(-(u + v) / 2.0 + shift, math.sqrt(3.0) / 2.0 * abs(u - v))
        pair = _polish(pair, c2, c1, c0)
        # the pair shares tr A with the real root
        pair = complex(_snap((-c2 - real_root) / 2.0, scale), abs(pair.imag))
        roots = [complex(real_root), pair, pair.conjugate()]
    else:
        if abs(p) <= (degeneracy_tol or config.DEGENERACY_TOL) * max(1.0, c2 * c2):
            roots = [complex(shift)] * 3
        else:
            single = _snap(_polish(3.0 * q / p + shift, c2, c1, c0).real, scale)
            double = (-c2 - single) / 2.0
            roots = [complex(single), complex(double), complex(double)]

    return sorted(roots, key=lambda z: (z.real, z.imag)), disc


# ============================================================================
# Spectrum analysis
# ============================================================================

def _gauge(l: np.ndarray, anchor: np.ndarray) -> np.ndarray:
    """Fix the l <-> -l sign: nonnegative overlap with the anchor, else largest component positive."""
    dot = float(l @ anchor)
    if abs(dot) > 1e-12:
        return l if dot > 0 else -l
    k = int(np.argmax(np.abs(l)))
    return l if l[k] >= 0 else -l


def _left_null_row(m: np.ndarray) -> Optional[np.ndarray]:
    """Largest row of adj(m); every row is a left null vector when det m = 0."""
    cof = np.empty((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            rows = [r for r in range(3) if r != i]
            cols = [c for c in range(3) if c != j]
            minor = m[np.ix_(rows, cols)]
            cof[i, j] = (-1) ** (i + j) * (minor[0, 0] * minor[1, 1] - minor[0, 1] * minor[1, 0])
    adj = cof.T
    norms = np.linalg.norm(adj, axis=1)
    k = int(np.argmax(norms))
    if norms[k] <= 1e-13 * max(1.0, np.linalg.norm(m)) ** 2:
        return None
    return adj[k]


def _reduced_solve(m: np.ndarray) -> Optional[np.ndarray]:
    """Fix c0 = 1 and solve the 2x2 system from the first two columns of c m = 0."""
    sub = m[:2, :2].T
    rhs = -m[2, :2]
    try:
        head = np.linalg.solve(sub, rhs)
    except np.linalg.LinAlgError:
        return None
    return np.array([head[0], head[1], 1.0], dtype=complex)


def longitudinal_direction(bloch: BlochMatrix, lam: float) -> np.ndarray:
    """
    Unit lab vector l whose spin component l.sigma decays as exp(-lam tau).
    """
    lam = float(lam)
    scale = bloch.scale
    residual = abs(bloch.char_poly(lam))
    if residual > config.RESIDUAL_TOL * scale ** 3:
        raise NotAnEigenvalueError(lam, residual)
    slope = abs(bloch.char_poly_derivative(lam))
    if slope <= config.RESIDUAL_TOL * scale ** 2:
        raise DegenerateBranchPointError(lam)

    shifted = lam * np.eye(3) - bloch.entries
    row = _left_null_row(shifted)
    if row is None:
        row = _reduced_solve(shifted)
    if row is None:
        raise DegenerateBranchPointError(lam)

    coeffs = hermitian_part(row)
    eps, delta = bloch.params.eps_tilde, bloch.params.delta_tilde
    l = direction_from_coefficients(coeffs, eps, delta)
    norm = np.linalg.norm(l)
    if norm == 0.0:
        raise DegenerateBranchPointError(lam)
    return _gauge(l / norm, hamiltonian_direction(eps, delta))


def analyze_spectrum(bloch: BlochMatrix, degeneracy_tol: Optional[float] = None) -> SpectrumReport:
    roots, disc = solve_cubic(bloch.char_coeffs, degeneracy_tol)
    band = degeneracy_band(bloch.char_coeffs[0], degeneracy_tol)

    if disc < -band:
        regime = Regime.COMPLEX_PAIR
        real_root = next(z for z in roots if z.imag == 0.0)
        pair = next(z for z in roots if z.imag > 0.0)
        gamma_L = [real_root.real]
        gamma_T = pair.real
        freq = abs(pair.imag)
    else:
        regime = Regime.THREE_REAL if disc > band else Regime.DEGENERATE
        gamma_L = sorted(z.real for z in roots)
        gamma_T = None
        freq = None
        if regime == Regime.DEGENERATE:
            gamma_T = gamma_L[1]
            freq = 0.0
            logger.debug(f"Degenerate spectrum at gamma={bloch.gamma_theta:.12g}")

    directions = []
    for lam in gamma_L:
        try:
            directions.append(longitudinal_direction(bloch, lam).tolist())
        except DegenerateBranchPointError:
            logger.debug(f"no direction at branch point lambda={lam:.12g}")
            directions.append(None)

    return SpectrumReport(
        eigenvalues=[Eigenvalue.of(z) for z in roots],
        regime=regime,
        discriminant=float(disc),
        gamma_L=[float(g) for g in gamma_L],
        gamma_T=None if gamma_T is None else float(gamma_T),
        oscillation_freq=None if freq is None else float(freq),
        directions=directions,
    )
