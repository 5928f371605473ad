"""
Lindblad Dynamics – Independent Dynamical Oracle

Integrates the master equation

    d rho/d tau = -i [H_S, rho] - (gamma/4) [sigma_z, [sigma_z, rho]]

in Bloch-vector form with fixed-step RK4, propagates the expectation
triple (<D+>, <D->, <D0>) with exp(-A tau), and measures how far the
Hamiltonian and dissipative superoperators are from commuting.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, field_validator

from spinrelax import config
from spinrelax.core_model import OMEGA0, BlochMatrix, SystemParams, build_bloch_matrix, gamma_theta
from spinrelax.cubic_spectrum import Regime, analyze_spectrum
from spinrelax.eigenbasis import expectations_from_state
from spinrelax.errors import InvariantBreachError

logger = logging.getLogger(__name__)

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_BASIS = [b / math.sqrt(2.0) for b in (SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z)]


# ============================================================================
# States
# ============================================================================

class DensityState(BaseModel):
    """rho = (I + r.sigma) / 2; trace is 1 by construction."""

    model_config = ConfigDict(frozen=True)

    bloch_vector: tuple[float, float, float]

    @field_validator("bloch_vector")
    @classmethod
    def _inside_ball(cls, v: tuple[float, float, float]) -> tuple[float, float, float]:
        if not all(math.isfinite(x) for x in v):
            raise ValueError("bloch vector must be finite")
        if math.sqrt(sum(x * x for x in v)) > 1.0 + config.POSITIVITY_TOL:
            raise ValueError("bloch vector outside the unit ball (rho not positive)")
        return v

    @property
    def r(self) -> np.ndarray:
        return np.array(self.bloch_vector, dtype=float)

    @property
    def purity(self) -> float:
        return float(np.linalg.norm(self.r))

    def matrix(self) -> np.ndarray:
        rx, ry, rz = self.bloch_vector
        return (SIGMA_I + rx * SIGMA_X + ry * SIGMA_Y + rz * SIGMA_Z) / 2.0

    @classmethod
    def of(cls, r) -> "DensityState":
        return cls(bloch_vector=tuple(float(x) for x in r))


@dataclass(frozen=True)
class ExpectationVector:
    v: np.ndarray   # (<D+>, <D->, <D0>), v[1] = conj(v[0]), v[2] real

    @property
    def conjugate_defect(self) -> float:
        return float(max(abs(self.v[1] - np.conj(self.v[0])), abs(self.v[2].imag)))

    @classmethod
    def from_state(cls, state: DensityState, params: SystemParams) -> "ExpectationVector":
        return cls(expectations_from_state(state.r, params.eps_tilde, params.delta_tilde))


@dataclass(frozen=True)
class Trajectory:
    tau: np.ndarray       # (k,)
    r: np.ndarray         # (k, 3)

    def states(self) -> list[DensityState]:
        return [DensityState.of(row) for row in self.r]


# ============================================================================
# Master equation
# ============================================================================

def bloch_generator(params: SystemParams) -> np.ndarray:
    """G with dr/dtau = G r: precession about (D~, 0, e~) and dephasing of r_x, r_y."""
    bx, bz = params.delta_tilde * OMEGA0, params.eps_tilde * OMEGA0
    gamma = gamma_theta(params)
    return np.array([
        [-gamma, -bz, 0.0],
        [bz, -gamma, -bx],
        [0.0, bx, 0.0],
    ])


def master_rhs(rho: DensityState, params: SystemParams) -> np.ndarray:
    return bloch_generator(params) @ rho.r


def rk4_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def default_dt(params: SystemParams) -> float:
    return 1e-3 / max(1.0, gamma_theta(params), OMEGA0)


def default_tau_max(params: SystemParams) -> float:
    """20 / (smallest positive decay rate); falls back to 100 without dissipation."""
    report = analyze_spectrum(build_bloch_matrix(params))
    rates = [e.re for e in report.eigenvalues if e.re > 1e-12]
    return 20.0 / min(rates) if rates else 100.0


def integrate_master(rho0: DensityState, params: SystemParams, tau_max: float,
                     dt: Optional[float] = None, stride: int = 1) -> Trajectory:
    """
    Classic fixed-step RK4 on the Bloch vector. Every step checks |r| <= 1 + tol;
    a breach raises InvariantBreachError carrying the step index.
    """
    dt = default_dt(params) if dt is None else dt
    if dt <= 0.0 or tau_max < 0.0:
        raise ValueError("integrate_master needs dt > 0 and tau_max >= 0")

    gen = bloch_generator(params)
    rhs = lambda y: gen @ y  # noqa: E731
    n_steps = int(math.ceil(tau_max / dt - 1e-9)) if tau_max > 0 else 0
    h = tau_max / n_steps if n_steps else 0.0
    limit = 1.0 + config.POSITIVITY_TOL

    taus = [0.0]
    rs = [rho0.r]
    y = rho0.r
    for step in range(1, n_steps + 1):
        y = rk4_step(rhs, y, h)
        norm = math.sqrt(y @ y)
        if norm > limit:
            raise InvariantBreachError(step, norm)
        if step % stride == 0 or step == n_steps:
            taus.append(step * h)
            rs.append(y)

    logger.debug(f"RK4: {n_steps} steps of {h:.3e} up to tau={tau_max:.6g}")
    return Trajectory(tau=np.array(taus), r=np.array(rs))


# ============================================================================
# Bloch-equation propagator
# ============================================================================

def propagator(bloch: BlochMatrix, tau) -> np.ndarray:
    """exp(-A tau) for scalar or 1-D tau; shape (..., 3, 3)."""
    tau = np.asarray(tau, dtype=float)
    a = bloch.entries
    report = analyze_spectrum(bloch)

    if report.regime != Regime.DEGENERATE:
        lam, vecs = np.linalg.eig(a)
        if np.linalg.cond(vecs) < 1e8:
            inv = np.linalg.inv(vecs)
            phases = np.exp(-np.multiply.outer(tau, lam))
            return np.einsum("ij,...j,jk->...ik", vecs, phases, inv)

    logger.warning(f"near-defective A at gamma={bloch.gamma_theta:.6g}; using expm")
    if tau.ndim == 0:
        return scipy.linalg.expm(-a * float(tau))
    return np.stack([scipy.linalg.expm(-a * t) for t in tau])


def propagate_expectations(v0: ExpectationVector, bloch: BlochMatrix, tau) -> ExpectationVector:
    """v(tau) = exp(-A tau) v0; tau may be a 1-D array, giving v of shape (k, 3)."""
    return ExpectationVector(propagator(bloch, tau) @ v0.v)


# ============================================================================
# Superoperators
# ============================================================================

def _superoperator(action: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """4x4 matrix of a linear map on 2x2 operators in the orthonormal Pauli basis."""
    return np.array([[np.trace(bi.conj().T @ action(bj)) for bj in PAULI_BASIS]
                     for bi in PAULI_BASIS])


def superoperator_commutator_norm(params: SystemParams) -> float:
    """Frobenius norm of [H^, V^] with H^ rho = -i[H_S, rho], V^ rho = -(gamma/4)[sz,[sz,rho]]."""
    h_s = (params.eps_tilde * SIGMA_Z + params.delta_tilde * SIGMA_X) * OMEGA0 / 2.0
    gamma = gamma_theta(params)

    h_hat = _superoperator(lambda rho: -1j * (h_s @ rho - rho @ h_s))

    def dephase(rho: np.ndarray) -> np.ndarray:
        inner = SIGMA_Z @ rho - rho @ SIGMA_Z
        return -(gamma / 4.0) * (SIGMA_Z @ inner - inner @ SIGMA_Z)

    v_hat = _superoperator(dephase)
    return float(np.linalg.norm(h_hat @ v_hat - v_hat @ h_hat))


def commutator_closed_form(params: SystemParams) -> float:
    return math.sqrt(2.0) * gamma_theta(params) * params.delta_tilde * OMEGA0


# ============================================================================
# Decay-rate recovery
# ============================================================================

def fit_decay_rate(trajectory: Trajectory, direction: np.ndarray) -> float:
    """Least-squares slope of -log|l . r(tau)|."""
    signal = np.abs(trajectory.r @ np.asarray(direction, dtype=float))
    keep = signal > 1e-300
    slope, _ = np.polyfit(trajectory.tau[keep], np.log(signal[keep]), 1)
    return float(-slope)


class OracleComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: SystemParams
    rho0: DensityState
    max_deviation: float
    max_norm_increase: float


def compare_with_propagator(params: SystemParams, rho0: DensityState,
                            tau_max: float, dt: Optional[float] = None,
                            stride: int = 100) -> OracleComparison:
    """RK4 expectations vs exp(-A tau) on the recorded grid; also the worst |r| increase per sample."""
    trajectory = integrate_master(rho0, params, tau_max, dt=dt, stride=stride)
    rk4 = expectations_from_state(trajectory.r, params.eps_tilde, params.delta_tilde)
    bloch = build_bloch_matrix(params)
    exact = propagate_expectations(ExpectationVector.from_state(rho0, params), bloch, trajectory.tau).v

    norms = np.linalg.norm(trajectory.r, axis=1)
    return OracleComparison(
        params=params,
        rho0=rho0,
        max_deviation=float(np.max(np.abs(rk4 - exact))),
        max_norm_increase=float(np.max(np.diff(norms), initial=0.0)),
    )
