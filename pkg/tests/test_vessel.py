import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sawb.vessel import (DOFS, OMEGA_E_FLOOR, RHO, EomCoefficients, VesselParams, encounter_frequency,
                         frf, frf_table, hull_coefficients)

V = VesselParams()


def test_encounter_frequency_cases():
    assert encounter_frequency(1.0, 0.0, 30.0) == pytest.approx(1.0)
    assert encounter_frequency(1.0, 2.0, 90.0) == pytest.approx(1.0)
    assert encounter_frequency(1.0, 2.0, 180.0) == pytest.approx(1.203874, abs=1e-6)


@pytest.mark.parametrize("mu", [-1.0, 180.5, 270.0])
def test_heading_domain(mu):
    with pytest.raises(ValueError):
        encounter_frequency(1.0, 1.0, mu)
    with pytest.raises(ValueError):
        frf(V, "heave", 1.0, 1.0, mu)


def test_invalid_vessel_and_dof():
    with pytest.raises(ValueError):
        VesselParams(length=0.0)
    with pytest.raises(ValueError):
        VesselParams(c_b=1.2)
    with pytest.raises(ValueError):
        frf(V, "yaw", 1.0, 0.0, 90.0)
    with pytest.raises(ValueError):
        frf(V, "heave", 0.0, 0.0, 90.0)


def test_table_defaults_are_consistent():
    # the block-coefficient box carries the design displacement
    assert RHO * V.length * V.effective_breadth * V.draught == pytest.approx(V.displacement, rel=2e-3)
    secs = V.prism_sections()
    waterplane = sum(s.length * s.breadth for s in secs)
    volume = sum(s.length * s.breadth * s.area_coefficient * V.draught for s in secs)
    assert waterplane == pytest.approx(V.c_wp * V.length * V.breadth, rel=1e-12)
    assert volume == pytest.approx(V.c_b * V.length * V.breadth * V.draught, rel=1e-12)
    assert secs[0].x_start == pytest.approx(-V.length / 2) and secs[-1].x_end == pytest.approx(V.length / 2)


@pytest.mark.parametrize("mu", [0.0, 45.0, 90.0, 135.0, 180.0])
def test_heave_long_wave_limit(mu):
    assert frf(V, "heave", 0.05, 0.0, mu).magnitude == pytest.approx(1.0, rel=0.10)


def test_long_wave_pitch_follows_wave_slope():
    # pitch -> k |cos mu| as k L -> 0
    w = 0.05
    p = frf(V, "pitch", w, 0.0, 180.0).magnitude
    assert p == pytest.approx(w**2 / 9.81, rel=1e-3)


def test_beam_sea_is_speed_independent():
    w = np.linspace(0.05, 2.0, 50)
    for dof in DOFS:
        a, b = frf(V, dof, w, 0.0, 90.0), frf(V, dof, w, 5.0, 90.0)
        # cos(90 deg) is 6e-17 in floating point, not exactly zero
        np.testing.assert_allclose(a.magnitude, b.magnitude, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(a.omega_e, b.omega_e, rtol=1e-12)


def test_no_pitch_in_beam_seas_no_roll_in_head_seas():
    w = np.linspace(0.1, 2.0, 20)
    assert np.allclose(frf(V, "pitch", w, 3.0, 90.0).magnitude, 0.0, atol=1e-15)
    assert np.allclose(frf(V, "roll", w, 3.0, 180.0).magnitude, 0.0, atol=1e-12)


def test_zero_speed_reduction():
    w = np.linspace(0.05, 2.0, 30)
    for mu in (0.0, 60.0, 150.0):
        np.testing.assert_allclose(encounter_frequency(w, 0.0, mu), w)


def test_following_sea_degeneracy_is_finite():
    # w = g / U makes w_e vanish for U = 5 m/s in following seas
    w = np.array([9.81 / 5.0, 1.5, 2.0])
    for dof in DOFS:
        p = frf(V, dof, w, 5.0, 0.0)
        assert np.all(np.isfinite(p.magnitude)) and np.all(p.magnitude >= 0)
        assert np.all(p.omega_e >= OMEGA_E_FLOOR)


def test_roll_resonance_near_natural_period():
    w = np.linspace(1.0, 8.0, 3000)
    p = frf(V, "roll", w, 0.0, 90.0)
    w_peak = w[np.argmax(p.magnitude)]
    assert w_peak == pytest.approx(2 * np.pi / V.natural_roll_period, rel=0.05)


def test_custom_coefficient_model_is_used():
    def unit_oscillator(vessel, dof, omega, u, mu_h):
        one = np.ones_like(np.asarray(omega, dtype=float))
        return EomCoefficients(0 * one, 0 * one, one, 2 * one)

    p = frf(V, "heave", np.array([0.5, 1.0]), 1.0, 30.0, coefficients=unit_oscillator)
    np.testing.assert_allclose(p.magnitude, 2.0)
    np.testing.assert_allclose(p.phase, 0.0)


@settings(max_examples=60, deadline=None)
@given(w=st.floats(0.05, 2.0), u=st.floats(0.0, 5.0), mu=st.floats(0.0, 180.0))
def test_magnitudes_non_negative_and_finite(w, u, mu):
    table = frf_table(V, np.array([w]), u, mu)
    for p in table.values():
        assert np.isfinite(p.magnitude[0]) and p.magnitude[0] >= 0
        assert -np.pi <= p.phase[0] <= np.pi


def test_heave_coefficients_match_eom_terms():
    w, u, mu = 1.2, 2.0, 150.0
    c = hull_coefficients(V, "heave", np.array([w]), u, mu)
    assert c.inertia[0] == pytest.approx(2 * V.draught / 9.81)
    assert c.stiffness[0] == 1.0
