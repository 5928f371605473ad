"""
Core Model – Spin-Boson Parameters and the Bloch Matrix

Owns the dimensionless parameterization (hbar = k_B = Omega0 = 1), the
dissipation strength gamma^theta, construction of the 3x3 Bloch matrix A
for the operator triple (D+, D-, D0), and the weak-coupling baseline used
for comparison.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

logger = logging.getLogger(__name__)

OMEGA0 = 1.0
OMEGA_R_NOTE = "not modeled"


# ============================================================================
# Parameters
# ============================================================================

class SystemParams(BaseModel):
    """Dimensionless model inputs; delta_tilde is always derived from eps_tilde."""

    model_config = ConfigDict(frozen=True)

    eps_tilde: float
    eta: float
    theta: float
    omega0: float = OMEGA0

    @field_validator("eps_tilde")
    @classmethod
    def _eps_in_unit_interval(cls, v: float) -> float:
        if not math.isfinite(v) or not 0.0 <= v <= 1.0:
            raise ValueError("eps-tilde out of [0,1]")
        return v

    @field_validator("eta")
    @classmethod
    def _eta_positive(cls, v: float) -> float:
        if not math.isfinite(v) or v <= 0.0:
            raise ValueError("eta must be > 0")
        return v

    @field_validator("theta")
    @classmethod
    def _theta_nonnegative(cls, v: float) -> float:
        if not math.isfinite(v) or v < 0.0:
            raise ValueError("theta must be >= 0")
        return v

    @field_validator("omega0")
    @classmethod
    def _omega0_is_unit(cls, v: float) -> float:
        if v != OMEGA0:
            raise ValueError("omega0 is fixed to 1 in internal units")
        return v

    @property
    def delta_sq(self) -> float:
        # (1 - e)(1 + e) keeps Delta~^2 exact at both ends of [0, 1]
        return (1.0 - self.eps_tilde) * (1.0 + self.eps_tilde)

    @property
    def delta_tilde(self) -> float:
        return math.sqrt(self.delta_sq)

    def with_theta(self, theta: float) -> "SystemParams":
        return self.model_copy(update={"theta": float(theta)})


def gamma_theta(params: SystemParams) -> float:
    """gamma^theta / Omega0 = 2 eta theta."""
    return 2.0 * params.eta * params.theta


# ============================================================================
# Bloch matrix
# ============================================================================

@dataclass(frozen=True)
class BlochMatrix:
    entries: np.ndarray                     # 3x3 complex, units of Omega0
    char_coeffs: tuple[float, float, float]  # (c2, c1, c0) of f(lambda) = det(lambda - A)
    gamma_theta: float
    params: SystemParams

    @property
    def trace(self) -> float:
        return -self.char_coeffs[0]

    def char_poly(self, lam):
        c2, c1, c0 = self.char_coeffs
        return ((lam + c2) * lam + c1) * lam + c0

    def char_poly_derivative(self, lam):
        c2, c1, _ = self.char_coeffs
        return (3.0 * lam + 2.0 * c2) * lam + c1

    @property
    def scale(self) -> float:
        return max(1.0, abs(self.trace))


def swap_conjugate(matrix: np.ndarray) -> np.ndarray:
    """Swap rows/columns 1<->2 and conjugate; A is invariant under this map."""
    perm = [1, 0, 2]
    return np.conj(matrix[np.ix_(perm, perm)])


def closed_form_coeffs(gamma: float, delta_sq: float) -> tuple[float, float, float]:
    """f(lambda) = lambda^3 - 2 gamma lambda^2 + (1 + gamma^2) lambda - Delta~^2 gamma."""
    return (-2.0 * gamma, 1.0 + gamma * gamma, -delta_sq * gamma)


def bloch_entries(eps, gamma) -> np.ndarray:
    """Entries of A for scalar or array eps_tilde / gamma; shape (..., 3, 3)."""
    eps = np.asarray(eps, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    eps, gamma = np.broadcast_arrays(eps, gamma)
    d2 = (1.0 - eps) * (1.0 + eps)
    ed = eps * np.sqrt(d2)

    entries = np.empty(eps.shape + (3, 3), dtype=complex)
    diag = (d2 + 2.0 * eps * eps) * gamma / 2.0
    entries[..., 0, 0] = diag - 1j * OMEGA0
    entries[..., 1, 1] = diag + 1j * OMEGA0
    entries[..., 0, 1] = entries[..., 1, 0] = -d2 * gamma / 2.0
    entries[..., 0, 2] = entries[..., 1, 2] = -ed * gamma / 2.0
    entries[..., 2, 0] = entries[..., 2, 1] = -ed * gamma
    entries[..., 2, 2] = d2 * gamma
    return entries


def build_bloch_matrix(params: SystemParams) -> BlochMatrix:
    gamma = gamma_theta(params)
    return BlochMatrix(
        entries=bloch_entries(params.eps_tilde, gamma),
        char_coeffs=closed_form_coeffs(gamma, params.delta_sq),
        gamma_theta=gamma,
        params=params,
    )


def characteristic_curve(params: SystemParams, lam_min: float, lam_max: float,
                         n: int = 400) -> tuple[np.ndarray, np.ndarray]:
    """Sample f(lambda) = det(lambda - A) on a real grid."""
    if n < 2 or not lam_min < lam_max:
        raise ValueError("characteristic curve needs n >= 2 and lam_min < lam_max")
    bloch = build_bloch_matrix(params)
    lam = np.linspace(lam_min, lam_max, n)
    return lam, bloch.char_poly(lam)


# ============================================================================
# Weak-coupling (van Hove) baseline
# ============================================================================

class WeakCouplingConstants(BaseModel):
    model_config = ConfigDict(frozen=True)

    gamma_L_weak: float
    gamma_T_weak: float
    gamma_weak: float
    ratio: Optional[float]
    omega_R: str = OMEGA_R_NOTE
    zero_temperature_limit: bool = False


def weak_coupling_constants(params: SystemParams) -> WeakCouplingConstants:
    """
    Diagonal weak-coupling Bloch matrix with the Ohmic form factor at Omega0,
    2 pi |g(Omega0)|^2 = eta Omega0, so gamma_weak = eta coth(1 / 2 theta).
    """
    at_zero = params.theta == 0.0
    if at_zero:
        logger.warning(
            "weak-coupling coth divergent form at θ=0 handled as limit coth→1"
        )
        gamma_weak = params.eta * OMEGA0
    else:
        gamma_weak = params.eta * OMEGA0 / math.tanh(OMEGA0 / (2.0 * params.theta))

    gamma_L = params.delta_sq * gamma_weak
    gamma_T = gamma_L / 2.0
    return WeakCouplingConstants(
        gamma_L_weak=gamma_L,
        gamma_T_weak=gamma_T,
        gamma_weak=gamma_weak,
        ratio=gamma_L / gamma_T if gamma_T != 0.0 else None,
        zero_temperature_limit=at_zero,
    )
