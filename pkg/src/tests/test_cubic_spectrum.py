import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from spinrelax.core_model import SystemParams, build_bloch_matrix
from spinrelax.cubic_spectrum import (
    Regime,
    analyze_spectrum,
    discriminant,
    longitudinal_direction,
    solve_cubic,
)
from spinrelax.errors import DegenerateBranchPointError, NonFiniteInputError, NotAnEigenvalueError
from spinrelax.lindblad_dynamics import bloch_generator


def spectrum(eps, theta, eta=1.0):
    return analyze_spectrum(build_bloch_matrix(SystemParams(eps_tilde=eps, eta=eta, theta=theta)))


# ============================================================================
# Cubic solver
# ============================================================================

@pytest.mark.parametrize("coeffs, roots", [
    ((-6.0, 11.0, -6.0), [1, 2, 3]),
    ((-1.0, 1.0, -1.0), [1, -1j, 1j]),
    ((-4.0, 5.0, -2.0), [1, 1, 2]),
    ((-3.0, 3.0, -1.0), [1, 1, 1]),
    ((0.0, 1.0, 0.0), [-1j, 0, 1j]),
])
def test_solve_cubic_known_roots(coeffs, roots):
    found, _ = solve_cubic(coeffs)
    expected = sorted((complex(r) for r in roots), key=lambda z: (z.real, z.imag))
    assert_allclose(found, expected, atol=1e-9)


def test_discriminant_sign():
    assert solve_cubic((-6.0, 11.0, -6.0))[1] > 0
    assert solve_cubic((-1.0, 1.0, -1.0))[1] < 0
    assert solve_cubic((-4.0, 5.0, -2.0))[1] == 0.0


def test_non_finite_coefficients():
    with pytest.raises(NonFiniteInputError):
        solve_cubic((math.nan, 1.0, 0.0))
    with pytest.raises(NonFiniteInputError):
        solve_cubic((0.0, math.inf, 0.0))


@given(roots=st.lists(st.floats(min_value=-3, max_value=3), min_size=3, max_size=3))
def test_solver_recovers_real_roots(roots):
    r = sorted(roots)
    assume(min(r[1] - r[0], r[2] - r[1]) > 0.1)
    coeffs = (-(r[0] + r[1] + r[2]), r[0] * r[1] + r[1] * r[2] + r[2] * r[0], -r[0] * r[1] * r[2])
    found, _ = solve_cubic(coeffs)
    assert_allclose([z.real for z in found], r, atol=1e-7)


# ============================================================================
# Spectrum reports
# ============================================================================

def test_unbiased_low_temperature():
    report = spectrum(0.0, 0.25)
    assert report.regime == Regime.COMPLEX_PAIR
    assert report.gamma_L == pytest.approx([0.5], abs=1e-12)
    assert report.gamma_T == pytest.approx(0.25, abs=1e-12)
    assert report.oscillation_freq == pytest.approx(math.sqrt(1.0 - 0.0625))
    assert report.ratio == pytest.approx(2.0)
    assert_allclose(report.directions[0], [1.0, 0.0, 0.0], atol=1e-9)


def test_fully_biased_has_no_longitudinal_decay():
    report = spectrum(1.0, 0.4)
    assert report.regime == Regime.COMPLEX_PAIR
    assert report.gamma_L[0] == pytest.approx(0.0, abs=1e-12)
    assert report.gamma_T == pytest.approx(0.8)
    assert report.ratio == pytest.approx(0.0, abs=1e-12)


def test_zero_temperature_rates_vanish():
    report = spectrum(0.2, 0.0)
    assert report.regime == Regime.COMPLEX_PAIR
    assert report.gamma_L == pytest.approx([0.0], abs=1e-12)
    assert report.gamma_T == pytest.approx(0.0, abs=1e-12)
    assert report.ratio is None


def test_three_real_window():
    report = spectrum(0.2, 1.1)
    assert report.regime == Regime.THREE_REAL
    assert len(report.gamma_L) == 3
    assert report.gamma_T is None and report.oscillation_freq is None
    assert sum(report.gamma_L) == pytest.approx(4.4)
    for l in report.directions:
        assert np.linalg.norm(l) == pytest.approx(1.0)


def test_degenerate_point():
    # e~ = 0, gamma = 2: f = (lambda - 1)^2 (lambda - 2)
    report = spectrum(0.0, 1.0)
    assert report.regime == Regime.DEGENERATE
    assert report.gamma_L == pytest.approx([1.0, 1.0, 2.0], abs=1e-9)
    assert report.gamma_T == pytest.approx(1.0, abs=1e-9)
    assert report.oscillation_freq == 0.0
    assert report.directions[0] is None and report.directions[1] is None
    assert_allclose(report.directions[2], [1.0, 0.0, 0.0], atol=1e-9)


def test_direction_errors():
    bloch = build_bloch_matrix(SystemParams(eps_tilde=0.3, eta=1.0, theta=0.5))
    with pytest.raises(NotAnEigenvalueError):
        longitudinal_direction(bloch, 0.123)
    degenerate = build_bloch_matrix(SystemParams(eps_tilde=0.0, eta=1.0, theta=1.0))
    with pytest.raises(DegenerateBranchPointError):
        longitudinal_direction(degenerate, 1.0)


@given(eps=st.floats(min_value=0.0, max_value=1.0), theta=st.floats(min_value=0.0, max_value=5.0))
def test_directions_decay_at_their_rate(eps, theta):
    params = SystemParams(eps_tilde=eps, eta=1.0, theta=theta)
    report = spectrum(eps, theta)
    assume(abs(report.discriminant) > 1e-6)
    g = bloch_generator(params)
    for rate, l in zip(report.gamma_L, report.directions):
        l = np.asarray(l)
        # d(l.r)/dtau = l.G r = -rate (l.r)
        assert_allclose(l @ g, -rate * l, atol=1e-7)


@given(eps=st.floats(min_value=0.0, max_value=1.0), theta=st.floats(min_value=0.0, max_value=50.0))
def test_eigenvalue_residuals(eps, theta):
    bloch = build_bloch_matrix(SystemParams(eps_tilde=eps, eta=1.0, theta=theta))
    report = analyze_spectrum(bloch)
    for e in report.eigenvalues:
        assert abs(bloch.char_poly(e.value)) <= 1e-9 * bloch.scale ** 3
    assert sum(e.re for e in report.eigenvalues) == pytest.approx(2.0 * bloch.gamma_theta, abs=1e-10 * bloch.scale)


def test_direction_endpoints():
    eps = 0.2
    delta = math.sqrt(1.0 - eps * eps)
    cold = spectrum(eps, 1e-3)
    assert np.linalg.norm(np.asarray(cold.directions[0]) - [delta, 0.0, eps]) < 1e-3
    hot = spectrum(eps, 1000.0)
    assert np.linalg.norm(np.asarray(hot.directions[0]) - [0.0, 0.0, 1.0]) < 1e-3


@pytest.mark.parametrize("theta, expected", [(0.5, -3.0), (1.0, 0.0), (1.5, 5.0)])
def test_unbiased_discriminant_is_gamma_squared_minus_four(theta, expected):
    params = SystemParams(eps_tilde=0.0, eta=1.0, theta=theta)
    assert discriminant(params) == pytest.approx(expected, abs=1e-12)
    assert spectrum(0.0, theta).discriminant == pytest.approx(expected, abs=1e-12)


# ============================================================================
# Large gamma
# ============================================================================

def test_solver_separates_nearly_double_root():
    # e~ = 0, gamma = 360: roots 360, 360 - 1/360 and about 1/360
    coeffs = (-720.0, 129601.0, -360.0)
    found, _ = solve_cubic(coeffs)
    assert sum(found).real == pytest.approx(720.0, abs=1e-9)
    for z in found:
        assert abs(z.imag) == 0.0
        assert abs(((z - 720.0) * z + 129601.0) * z - 360.0) <= 1e-9 * 720.0 ** 3
    assert found[0].real == pytest.approx(1.0 / 360.0, rel=1e-4)
    assert found[2].real == pytest.approx(360.0, rel=1e-5)


@pytest.mark.parametrize("theta", [18.0, 50.0])
def test_large_gamma_spectrum(theta):
    bloch = build_bloch_matrix(SystemParams(eps_tilde=0.0, eta=10.0, theta=theta))
    report = analyze_spectrum(bloch)
    assert report.regime in (Regime.THREE_REAL, Regime.DEGENERATE)
    assert sum(report.gamma_L) == pytest.approx(2.0 * bloch.gamma_theta, rel=1e-12)
    for e in report.eigenvalues:
        assert abs(bloch.char_poly(e.value)) <= 1e-9 * bloch.scale ** 3
    # the slow longitudinal rate is Delta~^2 / gamma to leading order
    assert report.gamma_L[0] == pytest.approx(1.0 / bloch.gamma_theta, rel=1e-2)
