import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sawb.simulate import DT, time_grid
from sawb.spectral import (SERIES_LENGTH, WELCH_POLICY, FeatureVector, Psd, build_features, feature_width,
                           normalize_mask, top_components, welch_psd)
from sawb.vessel import DOFS


def dft_welch(x, dt, segment, hop):
    """Independent Welch oracle: explicit DFT sums, periodic Hann window."""
    n = np.arange(segment)
    win = 0.5 - 0.5 * np.cos(2 * np.pi * n / segment)
    freqs = np.arange(segment // 2 + 1)
    kernel = np.exp(-2j * np.pi * np.outer(freqs, n) / segment)
    acc = np.zeros(freqs.size)
    starts = range(0, x.size - segment + 1, hop)
    for s in starts:
        seg = x[s:s + segment]
        acc += np.abs(kernel @ ((seg - seg.mean()) * win)) ** 2
    p = acc / len(starts) * dt / np.sum(win**2)
    p[1:-1] *= 2  # one-sided, Nyquist and DC unpaired for even segments
    return 2 * np.pi * freqs / (segment * dt), p / (2 * np.pi)


def test_policies():
    assert WELCH_POLICY["heave"].n_segments() == 15 and WELCH_POLICY["roll"].n_segments() == 15
    assert WELCH_POLICY["heave"].overlap == 0.5
    assert WELCH_POLICY["pitch"].n_segments() == 13


@pytest.mark.parametrize("dof", DOFS)
def test_welch_matches_dft_oracle(dof):
    x = np.random.default_rng(3).normal(size=SERIES_LENGTH)
    psd = welch_psd(x, DT, dof)
    pol = WELCH_POLICY[dof]
    f, p = dft_welch(x, DT, pol.segment, pol.hop)
    np.testing.assert_allclose(psd.freqs, f, rtol=1e-12)
    np.testing.assert_allclose(psd.ordinates, p, rtol=1e-9, atol=1e-15)


@pytest.mark.parametrize("dof", DOFS)
def test_zero_series(dof):
    psd = welch_psd(np.zeros(SERIES_LENGTH), DT, dof)
    assert np.all(psd.ordinates == 0) and psd.m0 == 0


@pytest.mark.parametrize("dof", DOFS)
def test_sinusoid_power_and_peak(dof):
    t = time_grid()
    pol = WELCH_POLICY[dof]
    d_omega = 2 * np.pi / (pol.segment * DT)
    w0 = 40.25 * d_omega  # between bins
    psd = welch_psd(np.sin(w0 * t), DT, dof)
    assert psd.m0 == pytest.approx(0.5, rel=0.01)
    assert abs(psd.freqs[np.argmax(psd.ordinates)] - w0) <= d_omega


@pytest.mark.parametrize("dof", DOFS)
def test_white_noise_level(dof):
    sigma = 0.3
    x = np.random.default_rng(7).normal(scale=sigma, size=SERIES_LENGTH)
    psd = welch_psd(x, DT, dof)
    level = sigma**2 * DT / np.pi  # one-sided, per rad/s
    assert np.mean(psd.ordinates[1:-1]) == pytest.approx(level, rel=0.10)
    assert psd.m0 == pytest.approx(sigma**2, rel=0.10)


def test_welch_rejects_bad_input():
    with pytest.raises(ValueError):
        welch_psd(np.zeros(100), DT, "heave")
    with pytest.raises(ValueError):
        welch_psd(np.zeros(SERIES_LENGTH), DT, "surge")
    with pytest.raises(ValueError):
        welch_psd(np.zeros(SERIES_LENGTH), 0.0, "heave")


def test_top_components_tie_break_and_order():
    psd = Psd(np.arange(6) * 0.1, np.array([1.0, 3.0, 2.0, 3.0, 0.5, 2.0]))
    o, f = top_components(psd, 4)
    np.testing.assert_array_equal(o, [3.0, 3.0, 2.0, 2.0])
    np.testing.assert_allclose(f, [0.1, 0.3, 0.2, 0.5])
    with pytest.raises(ValueError):
        top_components(psd, 7)
    with pytest.raises(ValueError):
        top_components(psd, 0)


def test_two_peak_fixture():
    freqs = np.linspace(0, 5, 51)
    ords = np.full(51, 1e-6)
    ords[10], ords[30] = 4.0, 9.0
    o, f = top_components(Psd(freqs, ords), 2)
    np.testing.assert_allclose(o, [9.0, 4.0])
    np.testing.assert_allclose(f, [3.0, 1.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1e3), min_size=5, max_size=60), st.integers(1, 5))
def test_top_components_are_the_largest(ordinates, k):
    ords = np.array(ordinates)
    psd = Psd(np.arange(ords.size, dtype=float), ords)
    o, f = top_components(psd, k)
    assert np.all(np.diff(o) <= 0)
    assert np.all(o >= np.sort(ords)[::-1][k - 1])
    np.testing.assert_array_equal(ords[f.astype(int)], o)


def test_widths():
    assert feature_width("heave", 30) == 62
    assert feature_width("heave+pitch+roll", 30) == 184
    assert feature_width(("roll", "heave", "pitch"), 80) == 484


def test_mask_normalization():
    assert normalize_mask("roll+heave") == ("heave", "roll")
    for bad in ("", "yaw", "heave+sway"):
        with pytest.raises(ValueError):
            normalize_mask(bad)


def test_feature_layout():
    rng = np.random.default_rng(0)
    psds = {d: Psd(np.linspace(0, 10, 20), rng.uniform(size=20)) for d in DOFS}
    fv = build_features(psds, 3.5, "roll+heave", 4)
    arr = fv.to_array()
    assert isinstance(fv, FeatureVector) and arr.size == len(fv) == 2 * 9 + 1
    o, f = top_components(psds["heave"], 4)
    np.testing.assert_array_equal(arr[:4], o)
    np.testing.assert_array_equal(arr[4:8], f)
    assert arr[8] == psds["heave"].m0
    assert arr[17] == psds["roll"].m0 and arr[-1] == 3.5
    with pytest.raises(ValueError):
        build_features({"heave": psds["heave"]}, 1.0, "heave+pitch", 4)
