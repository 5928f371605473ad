import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from spinrelax.core_model import SystemParams, bloch_entries, build_bloch_matrix
from spinrelax.cubic_spectrum import Regime, analyze_spectrum
from spinrelax.errors import HypothesisNotMetError, NotM3RError
from spinrelax.stability_criteria import (
    MatrixStyle,
    check_relaxation_inequalities,
    companion,
    functionals_batch,
    m3r_functionals,
    prop1_positive_real_parts,
    prop2_triangle,
    sample_m3r_batch,
    sample_m3r_matrix,
    shard_generator,
)
from spinrelax.verification import Suite, run_proposition_suite


@given(eps=st.floats(min_value=0.0, max_value=1.0), gamma=st.floats(min_value=0.0, max_value=20.0))
def test_bloch_functionals_closed_form(eps, gamma):
    d2 = (1.0 - eps) * (1.0 + eps)
    fn = m3r_functionals(bloch_entries(eps, gamma))
    s = max(1.0, 2.0 * gamma)
    assert fn.trace == pytest.approx(2.0 * gamma, abs=1e-12 * s)
    assert fn.det == pytest.approx(d2 * gamma, abs=1e-9 * s ** 3)
    assert fn.tr_adj == pytest.approx(1.0 + gamma * gamma, abs=1e-9 * s ** 2)
    assert fn.f_at_trace == pytest.approx(gamma * (2.0 + 2.0 * gamma * gamma - d2), abs=1e-9 * s ** 3)
    assert fn.f_at_half_trace == pytest.approx(eps * eps * gamma, abs=1e-9 * s ** 3)


def test_complex_trace_is_rejected():
    with pytest.raises(NotM3RError):
        m3r_functionals(np.diag([1j, 0.0, 0.0]))
    with pytest.raises(ValueError):
        m3r_functionals(np.eye(2))


@pytest.mark.parametrize("diag, expected", [
    ([1.0, 2.0, 3.0], True),
    ([0.0, 2.0, 3.0], True),
    ([-1.0, 2.0, 3.0], False),
    ([1.0, -0.5, 0.2], False),
])
def test_prop1_on_diagonal_matrices(diag, expected):
    assert prop1_positive_real_parts(m3r_functionals(np.diag(diag))) is expected


@pytest.mark.parametrize("diag, expected", [
    ([1.0, 2.0, 3.0], True),     # equality 1 + 2 = 3
    ([2.0, 2.0, 3.0], True),
    ([1.0, 1.0, 5.0], False),
])
def test_prop2_on_diagonal_matrices(diag, expected):
    assert prop2_triangle(m3r_functionals(np.diag(diag))) is expected


def test_prop2_requires_prop1():
    with pytest.raises(HypothesisNotMetError, match="Prop 2 hypothesis not met"):
        prop2_triangle(m3r_functionals(np.diag([-1.0, 1.0, 1.0])))


def test_companion_has_requested_polynomial():
    coeffs = np.array([-6.0, 11.0, -6.0])
    assert_allclose(np.poly(companion(coeffs)).real, [1.0, -6.0, 11.0, -6.0], atol=1e-12)


@pytest.mark.parametrize("style", list(MatrixStyle))
def test_sampled_matrices_are_members(style):
    mats = sample_m3r_batch(shard_generator(3), 500, style)
    assert mats.shape == (500, 3, 3)
    assert np.all(functionals_batch(mats).membership_defect <= 1e-10)


def test_sampling_is_deterministic():
    a = sample_m3r_matrix(11, MatrixStyle.UNITARY_CONJUGATED)
    b = sample_m3r_matrix(11, MatrixStyle.UNITARY_CONJUGATED)
    assert np.array_equal(a, b)
    c = sample_m3r_matrix(12, MatrixStyle.UNITARY_CONJUGATED)
    assert not np.array_equal(a, c)


def test_fixed_coefficients_are_respected():
    m = sample_m3r_matrix(5, MatrixStyle.UNITARY_CONJUGATED, coeffs=(-6.0, 11.0, -6.0))
    assert_allclose(np.sort(np.linalg.eigvals(m).real), [1.0, 2.0, 3.0], atol=1e-9)


def test_unbiased_pair_saturates_inequality():
    report = analyze_spectrum(build_bloch_matrix(SystemParams(eps_tilde=0.0, eta=1.0, theta=0.3)))
    check = check_relaxation_inequalities(report)
    assert check.regime == Regime.COMPLEX_PAIR
    assert check.all_hold
    assert check.equality
    assert check.margins == pytest.approx([0.0], abs=1e-12)


def test_three_real_triangle():
    report = analyze_spectrum(build_bloch_matrix(SystemParams(eps_tilde=0.2, eta=1.0, theta=1.1)))
    check = check_relaxation_inequalities(report)
    assert check.regime == Regime.THREE_REAL
    assert len(check.margins) == 3
    assert check.all_hold
    assert not check.boundary


def test_degenerate_point_is_boundary():
    report = analyze_spectrum(build_bloch_matrix(SystemParams(eps_tilde=0.0, eta=1.0, theta=1.0)))
    check = check_relaxation_inequalities(report)
    assert check.boundary
    assert check.all_hold


@given(eps=st.floats(min_value=0.0, max_value=1.0), theta=st.floats(min_value=0.0, max_value=50.0),
       eta=st.sampled_from([0.1, 1.0, 10.0]))
def test_inequalities_hold_everywhere(eps, theta, eta):
    report = analyze_spectrum(build_bloch_matrix(SystemParams(eps_tilde=eps, eta=eta, theta=theta)))
    assert check_relaxation_inequalities(report).all_hold


@pytest.mark.parametrize("eps, theta", [(0.0, 18.0), (0.0, 50.0), (0.05, 50.0)])
def test_inequalities_hold_at_large_gamma(eps, theta):
    report = analyze_spectrum(build_bloch_matrix(SystemParams(eps_tilde=eps, eta=10.0, theta=theta)))
    assert check_relaxation_inequalities(report).all_hold


@pytest.mark.parametrize("suite", [Suite.PROP1, Suite.PROP2])
def test_small_equivalence_population(suite):
    result = run_proposition_suite(suite, samples=3000, seed=2, threads=2)
    assert result.failures == 0, result.counterexample
    assert result.checked > 500


@pytest.mark.slow
@pytest.mark.parametrize("suite", [Suite.PROP1, Suite.PROP2])
def test_acceptance_equivalence_population(suite):
    result = run_proposition_suite(suite, samples=100_000, seed=7)
    assert result.failures == 0, result.counterexample
