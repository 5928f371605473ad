"""
Energy eigenbasis <-> lab Pauli basis

Single phase convention shared by the direction mapping and the dynamics
oracle. With n = (D~, 0, e~), m = (-e~, 0, D~) and y' = (0, -1, 0) the
frame (m, y', n) is right-handed, and

    D0 -> n.sigma,   D+ -> (m.sigma + i y'.sigma) / 2,   D- = D+^dagger,

which reproduces the signs of the e~D~ entries of the Bloch matrix.
"""

import numpy as np

E_Y = np.array([0.0, 1.0, 0.0])
E_Z = np.array([0.0, 0.0, 1.0])


def frame(eps_tilde: float, delta_tilde: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (m, y', n)."""
    n = np.array([delta_tilde, 0.0, eps_tilde])
    m = np.array([-eps_tilde, 0.0, delta_tilde])
    return m, -E_Y, n


def hamiltonian_direction(eps_tilde: float, delta_tilde: float) -> np.ndarray:
    return np.array([delta_tilde, 0.0, eps_tilde])


def expectations_from_state(r: np.ndarray, eps_tilde: float, delta_tilde: float) -> np.ndarray:
    """(<D+>, <D->, <D0>) for rho = (I + r.sigma)/2; r may carry leading axes."""
    m, yp, n = frame(eps_tilde, delta_tilde)
    r = np.asarray(r, dtype=float)
    plus = (r @ m + 1j * (r @ yp)) / 2.0
    return np.stack([plus, np.conj(plus), (r @ n).astype(complex)], axis=-1)


def state_from_expectations(v: np.ndarray, eps_tilde: float, delta_tilde: float) -> np.ndarray:
    m, yp, n = frame(eps_tilde, delta_tilde)
    v = np.asarray(v, dtype=complex)
    along_m = 2.0 * v[..., 0].real
    along_yp = 2.0 * v[..., 0].imag
    along_n = v[..., 2].real
    return (along_m[..., None] * m + along_yp[..., None] * yp + along_n[..., None] * n)


def hermitian_part(c: np.ndarray) -> np.ndarray:
    """
    Project a coefficient row onto the Hermitian form (c+, c+*, real c0).
    Falls back to the i-rotated row when the plain projection vanishes.
    """
    c = np.asarray(c, dtype=complex)
    swapped = np.conj(c[[1, 0, 2]])
    sym = (c + swapped) / 2.0
    anti = 1j * (c - swapped) / 2.0
    return sym if np.linalg.norm(sym) >= np.linalg.norm(anti) else anti


def direction_from_coefficients(c: np.ndarray, eps_tilde: float, delta_tilde: float) -> np.ndarray:
    """
    Lab-frame vector l of X = c+ D+ + c+* D- + c0 D0 = l.sigma (unnormalized).
    """
    m, yp, n = frame(eps_tilde, delta_tilde)
    c_plus = complex(c[0])
    c_zero = complex(c[2])
    return c_plus.real * m - c_plus.imag * yp + c_zero.real * n
