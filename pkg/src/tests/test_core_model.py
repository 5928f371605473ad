import logging
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from pydantic import ValidationError

from spinrelax.core_model import (
    SystemParams,
    bloch_entries,
    build_bloch_matrix,
    characteristic_curve,
    closed_form_coeffs,
    gamma_theta,
    swap_conjugate,
    weak_coupling_constants,
)

eps_values = st.floats(min_value=0.0, max_value=1.0)
gamma_values = st.floats(min_value=0.0, max_value=50.0)


@pytest.mark.parametrize("field, value, message", [
    ("eps_tilde", 2.0, "eps-tilde out of [0,1]"),
    ("eps_tilde", -0.1, "eps-tilde out of [0,1]"),
    ("eta", 0.0, "eta must be > 0"),
    ("theta", -1.0, "theta must be >= 0"),
    ("theta", float("nan"), "theta must be >= 0"),
])
def test_params_reject_invalid_input(field, value, message):
    fields = {"eps_tilde": 0.2, "eta": 1.0, "theta": 1.0, field: value}
    with pytest.raises(ValidationError, match=message.replace("[", r"\[").replace("]", r"\]")):
        SystemParams(**fields)


def test_delta_exact_at_interval_ends():
    assert SystemParams(eps_tilde=1.0, eta=1.0, theta=0.0).delta_tilde == 0.0
    assert SystemParams(eps_tilde=0.0, eta=1.0, theta=0.0).delta_tilde == 1.0


def test_gamma_is_two_eta_theta():
    assert gamma_theta(SystemParams(eps_tilde=0.3, eta=2.5, theta=0.4)) == pytest.approx(2.0)


def test_unbiased_entries():
    a = bloch_entries(0.0, 0.5)
    assert a[0, 0] == pytest.approx(0.25 - 1j)
    assert a[1, 1] == pytest.approx(0.25 + 1j)
    assert a[0, 1] == a[1, 0] == pytest.approx(-0.25)
    assert a[2, 2] == pytest.approx(0.5)
    assert a[0, 2] == a[2, 0] == 0.0


@given(eps=eps_values, gamma=gamma_values)
def test_closed_form_coefficients_match_determinant(eps, gamma):
    a = bloch_entries(eps, gamma)
    poly = np.poly(a)
    scale = max(1.0, gamma)
    expected = closed_form_coeffs(gamma, (1.0 - eps) * (1.0 + eps))
    assert_allclose(poly[1:].real, expected, rtol=1e-9, atol=1e-9 * scale ** 3)
    assert np.all(np.abs(poly.imag) <= 1e-9 * scale ** 3)


@given(eps=eps_values, gamma=gamma_values)
def test_trace_is_twice_gamma(eps, gamma):
    a = bloch_entries(eps, gamma)
    assert np.trace(a).real == pytest.approx(2.0 * gamma, abs=1e-12 * max(1.0, gamma))
    assert np.trace(a).imag == 0.0


@given(eps=eps_values, gamma=gamma_values)
def test_swap_conjugate_invariance(eps, gamma):
    a = bloch_entries(eps, gamma)
    assert_allclose(swap_conjugate(a), a)


def test_vectorized_entries_shape():
    a = bloch_entries(np.array([0.0, 0.5, 1.0]), 2.0)
    assert a.shape == (3, 3, 3)
    assert_allclose(a[1], bloch_entries(0.5, 2.0))


def test_characteristic_curve():
    params = SystemParams(eps_tilde=0.2, eta=1.0, theta=1.0)
    lam, f = characteristic_curve(params, -1.0, 4.0, n=51)
    assert lam.shape == f.shape == (51,)
    bloch = build_bloch_matrix(params)
    assert_allclose(f, bloch.char_poly(lam))
    # f(0) = -det A
    assert characteristic_curve(params, 0.0, 1.0, n=2)[1][0] == pytest.approx(-0.96 * 2.0)


def test_characteristic_curve_rejects_bad_grid():
    params = SystemParams(eps_tilde=0.2, eta=1.0, theta=1.0)
    with pytest.raises(ValueError):
        characteristic_curve(params, 1.0, 0.0)
    with pytest.raises(ValueError):
        characteristic_curve(params, 0.0, 1.0, n=1)


def test_weak_coupling_ratio_is_two():
    weak = weak_coupling_constants(SystemParams(eps_tilde=0.2, eta=1.0, theta=1.0))
    assert weak.ratio == 2.0
    assert weak.gamma_weak == pytest.approx(1.0 / math.tanh(0.5))
    assert weak.gamma_L_weak == pytest.approx(0.96 * weak.gamma_weak)
    assert weak.omega_R == "not modeled"
    assert not weak.zero_temperature_limit


def test_weak_coupling_zero_temperature_limit(caplog):
    with caplog.at_level(logging.WARNING):
        weak = weak_coupling_constants(SystemParams(eps_tilde=0.0, eta=0.7, theta=0.0))
    assert weak.zero_temperature_limit
    assert weak.gamma_weak == pytest.approx(0.7)
    assert "weak-coupling coth divergent form at θ=0 handled as limit coth→1" in caplog.text
