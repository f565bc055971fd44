import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from casimir_kit import analytic as an
from casimir_kit.core import MirrorCollisionError

# reference values from 40-digit mpmath evaluations of the closed forms
N_UNIFORM_2_05 = 0.00553514580182120560
TAU_2_05 = (-0.288175509109957974, -0.297594241928736399, 2.93713743987870811, -0.436972630074326174)


def test_eigenfrequency_values():
    assert an.eigenfrequency(1, 0.0) == pytest.approx(np.pi)
    assert an.eigenfrequency(1, 1.0) / np.pi == pytest.approx(np.sqrt(1 - 1 / (4 * np.pi ** 2)), rel=1e-15)
    assert an.eigenfrequency(2, 1.0) / (2 * np.pi) == pytest.approx(0.996828684389827282, rel=1e-14)
    assert an.eigenfrequency(2, 1.0) / (2 * np.pi) == pytest.approx(0.99683, abs=1e-5)
    with pytest.raises(ValueError):
        an.eigenfrequency(1, 2 * np.pi)
    with pytest.raises(ValueError):
        an.eigenfrequency(0, 0.1)


def test_superluminal_velocity_warns():
    with pytest.warns(RuntimeWarning):
        an.eigenfrequency(1, 2.0)


def test_log_time():
    assert an.log_time_f(7.0, 0.0) == 7.0
    assert an.log_time_f(2.0, 0.5) == pytest.approx(2 * np.log(2), rel=1e-15)
    assert an.log_time_f(0.0, 0.3) == 0.0
    with pytest.raises(MirrorCollisionError):
        an.log_time_f(3.0, -0.5)


def test_tau_examples():
    tau = an.tau_coeffs(0.0, 0.7)
    assert np.allclose(tau.as_array(), np.eye(2), atol=0)
    t = 0.37
    tau = an.tau_coeffs(t, 0.0)
    expected = [[np.cos(np.pi * t), np.sin(np.pi * t) / np.pi], [-np.pi * np.sin(np.pi * t), np.cos(np.pi * t)]]
    assert np.allclose(tau.as_array(), expected, atol=1e-15)
    tau = an.tau_coeffs(2.0, 0.5)
    assert np.allclose((tau.t11, tau.t12, tau.t21, tau.t22), TAU_2_05, rtol=1e-13)
    assert tau.det == pytest.approx(1.0, abs=1e-12)


def test_photons_examples():
    assert an.photons_uniform(3.3, 0.0) == 0.0
    assert an.photons_uniform(0.0, 0.9) == 0.0
    assert an.photons_uniform(2.0, 0.5) == pytest.approx(N_UNIFORM_2_05, rel=1e-13)
    assert an.photons_uniform(2.0, 0.5) == pytest.approx(5.54e-3, abs=1e-5)
    assert an.photons_from_tau(an.tau_coeffs(0.0, 0.4)) == pytest.approx(0.0, abs=1e-16)
    assert an.photons_from_tau(an.tau_coeffs(1.3, 0.0)) == pytest.approx(0.0, abs=1e-15)
    assert an.photons_from_tau(an.tau_coeffs(2.0, 0.5)) == pytest.approx(an.photons_uniform(2.0, 0.5), abs=1e-12)


def test_planck_form_examples():
    assert an.photons_planck_form(2.0, 0.5) == pytest.approx(an.photons_uniform(2.0, 0.5), abs=1e-12)
    assert an.photons_planck_form(5.0, 0.9) == pytest.approx(an.photons_uniform(5.0, 0.9), abs=1e-12)
    assert an.photons_planck_form(0.0, 1.0) == 0.0


def test_thermal_descriptor():
    d = an.thermal_descriptor(1.0)
    assert d.planck == pytest.approx(0.0259885947047561644, rel=1e-14)
    assert d.temperature == pytest.approx(0.854679758240716477, rel=1e-14)
    # Bose-Einstein form with hbar = k_B = 1
    assert d.planck == pytest.approx(1 / np.expm1(np.pi / d.temperature), abs=1e-12)
    small = an.thermal_descriptor(1e-6)
    assert small.temperature < 0.15 and small.planck < 1e-13
    with pytest.raises(ValueError):
        an.effective_temperature(0.0)


@given(st.floats(1e-3, 0.99))
def test_planck_factor_forms_agree(beta):
    T = an.effective_temperature(beta)
    assert an.planck_factor(beta) == pytest.approx(1 / np.expm1(np.pi / T), rel=1e-10, abs=1e-300)


def test_resonance_law():
    assert an.photons_resonance(0.0, 0.15) == 0.0
    assert an.photons_resonance(4.0, 0.15) == pytest.approx(1.18447444116884332, rel=1e-14)
    t = np.linspace(0, 10, 101)
    assert np.all(np.diff(an.photons_resonance(t, 0.15)) > 0)
    with pytest.raises(ValueError):
        an.photons_resonance(1.0, 1.2)


def test_unruh():
    assert an.unruh_temperature(0.0) == 0.0
    assert an.unruh_temperature(2 * np.pi) == pytest.approx(1.0)
    assert an.unruh_temperature(1.0) == pytest.approx(0.15915, abs=1e-5)


BETAS = (0.1, 0.3, 0.5, 0.7, 0.9, 0.99)


def test_grid_identities():
    t = np.linspace(0, 20, 401)
    for beta in BETAS:
        n = an.photons_uniform(t, beta)
        assert np.max(np.abs(n - an.photons_planck_form(t, beta))) < 1e-12
        tau = an.tau_coeffs(t, beta)
        assert np.max(np.abs(an.photons_from_tau(tau) - n)) < 1e-10
        assert np.max(np.abs(tau.det - 1.0)) < 1e-12
        assert np.all(n <= an.planck_factor(beta) * (1 + 1e-12))


def test_small_velocity_limit():
    t = np.linspace(0, 20, 201)
    assert np.max(an.photons_uniform(t, 1e-6)) < 1e-10


@settings(max_examples=50)
@given(st.floats(0, 30), st.floats(0.01, 1.0))
def test_bounded_by_planck_factor(t, beta):
    assert an.photons_uniform(t, beta) <= an.planck_factor(beta) * (1 + 1e-12)


def test_superluminal_domain():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        assert an.photons_uniform(1.0, 3.0) >= 0
    with pytest.raises(ValueError):
        an.photons_uniform(1.0, 7.0)
