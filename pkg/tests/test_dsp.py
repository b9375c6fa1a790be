"""Filter design and zero-phase application, cross-checked against scipy."""

import numpy as np
import pytest
from scipy.signal import butter, sosfreqz, sosfiltfilt

from eegband import dsp
from eegband.rng import make_rng

FS = 250.0


@pytest.fixture(params=["theta", "alpha", "beta"])
def band(request):
    return dsp.band_by_name(request.param)


def test_band_constants():
    assert dsp.EEG_BANDS == {"theta": (4.0, 8.0), "alpha": (8.0, 14.0),
                             "beta": (14.0, 30.0)}


def test_dc_is_killed(band):
    f = dsp.design_bandpass(band, FS, order=4)
    assert dsp.frequency_response(f, 0.0) < 1e-6


def test_geometric_center_near_unity(band):
    f = dsp.design_bandpass(band, FS, order=4)
    center = np.sqrt(band.low_hz * band.high_hz)
    assert 0.95 <= dsp.frequency_response(f, center) <= 1.0


def test_cutoffs_at_minus_3db(band):
    f = dsp.design_bandpass(band, FS, order=4)
    for edge in (band.low_hz, band.high_hz):
        assert abs(dsp.frequency_response(f, edge) - 1 / np.sqrt(2)) < 0.05


def test_nyquist_strongly_attenuated(band):
    f = dsp.design_bandpass(band, FS, order=4)
    assert dsp.frequency_response(f, FS / 2) < 0.5


def test_monotone_rolloff_above_band(band):
    f = dsp.design_bandpass(band, FS, order=4)
    freqs = np.linspace(band.high_hz, FS / 2, 50)
    mags = [dsp.frequency_response(f, fr) for fr in freqs]
    assert all(m2 <= m1 + 1e-12 for m1, m2 in zip(mags, mags[1:]))


def test_identity_cascade_response_is_flat():
    ident = dsp.FilterCascade(((1.0, 0.0, 0.0, 0.0, 0.0),), 2,
                              dsp.band_by_name("theta"), FS)
    for fr in np.linspace(0, FS / 2, 20):
        assert abs(dsp.frequency_response(ident, fr) - 1.0) < 1e-12


def test_sections_stable_and_order_matches(band):
    for order in (2, 4, 6, 8):
        f = dsp.design_bandpass(band, FS, order=order)
        assert len(f.sections) == order // 2
        for b0, b1, b2, a1, a2 in f.sections:
            poles = np.roots([1.0, a1, a2])
            assert np.all(np.abs(poles) < 1.0)


def test_band_edge_at_nyquist_rejected():
    with pytest.raises(ValueError, match="Nyquist"):
        dsp.design_bandpass(dsp.BandSpec("wide", 10.0, 125.0), FS)


def test_odd_order_rejected(band):
    with pytest.raises(ValueError, match="order"):
        dsp.design_bandpass(band, FS, order=3)


def test_response_matches_scipy_butter(band):
    """Same magnitude response as scipy's Butterworth band-pass design."""
    for order in (2, 4, 8):
        mine = dsp.design_bandpass(band, FS, order=order)
        sos = butter(order // 2, [band.low_hz, band.high_hz],
                     btype="bandpass", fs=FS, output="sos")
        freqs = np.linspace(0.1, FS / 2 - 0.1, 200)
        _, h = sosfreqz(sos, worN=2 * np.pi * freqs / FS, fs=2 * np.pi)
        for fr, href in zip(freqs, np.abs(h)):
            assert abs(dsp.frequency_response(mine, fr) - href) < 1e-8


def test_impulse_energy_decays(band):
    f = dsp.design_bandpass(band, FS, order=4)
    impulse = np.zeros(4096)
    impulse[0] = 1.0
    from scipy.signal import sosfilt
    resp = sosfilt(f.to_sos(), impulse)
    energy = resp ** 2
    total = energy.sum()
    assert np.isfinite(total)
    assert energy[-410:].sum() < 1e-8 * total


# ------------------------------------------------------------ zero-phase path

def test_zeros_in_zeros_out(band):
    f = dsp.design_bandpass(band, FS, order=4)
    out = dsp.apply_zero_phase(np.zeros(500), f)
    assert out.shape == (500,)
    assert np.all(out == 0.0)


def test_too_short_sequence_rejected(band):
    f = dsp.design_bandpass(band, FS, order=4)
    with pytest.raises(ValueError, match="too short"):
        dsp.apply_zero_phase(np.zeros(12), f)


def central(x, frac=0.5):
    n = len(x)
    k = int(n * (1 - frac) / 2)
    return x[k:n - k]


def test_band_center_sinusoid_preserved(band):
    f = dsp.design_bandpass(band, FS, order=4)
    center = np.sqrt(band.low_hz * band.high_hz)
    t = np.arange(2000) / FS
    x = np.sin(2 * np.pi * center * t)
    y = dsp.apply_zero_phase(x, f)
    ratio = np.abs(central(y)).max() / np.abs(central(x)).max()
    assert 0.9 <= ratio <= 1.0


def test_out_of_band_sinusoid_rejected_by_alpha():
    f = dsp.design_bandpass(dsp.band_by_name("alpha"), FS, order=4)
    t = np.arange(4000) / FS
    x = np.sin(2 * np.pi * 0.5 * t)
    y = dsp.apply_zero_phase(x, f)
    rms_in = np.sqrt(np.mean(central(x) ** 2))
    rms_out = np.sqrt(np.mean(central(y) ** 2))
    assert rms_out < 0.01 * rms_in


def test_zero_lag(band):
    f = dsp.design_bandpass(band, FS, order=4)
    center = np.sqrt(band.low_hz * band.high_hz)
    t = np.arange(1500) / FS
    x = np.sin(2 * np.pi * center * t)
    y = dsp.apply_zero_phase(x, f)
    xc, yc = central(x), central(y)
    corr = np.correlate(yc, xc, mode="full")
    lag = int(np.argmax(corr)) - (len(xc) - 1)
    assert lag == 0


def test_linearity(band):
    f = dsp.design_bandpass(band, FS, order=4)
    rng = make_rng(31)
    x = rng.normal(size=600)
    y = rng.normal(size=600)
    a, b = 1.7, -0.4
    combined = dsp.apply_zero_phase(a * x + b * y, f)
    separate = a * dsp.apply_zero_phase(x, f) + b * dsp.apply_zero_phase(y, f)
    scale = np.abs(separate).max()
    assert np.abs(combined - separate).max() < 1e-4 * scale


def test_multichannel_shape_and_rows_match_single(band):
    f = dsp.design_bandpass(band, FS, order=4)
    rng = make_rng(32)
    x = rng.normal(size=(31, 800)).astype(np.float32)
    y = dsp.apply_zero_phase(x, f)
    assert y.shape == x.shape
    assert y.dtype == np.float32
    row = dsp.apply_zero_phase(x[5], f)
    assert np.allclose(y[5], row, atol=1e-6)


def test_central_region_matches_scipy_sosfiltfilt(band):
    f = dsp.design_bandpass(band, FS, order=4)
    rng = make_rng(33)
    x = rng.normal(size=3000)
    mine = dsp.apply_zero_phase(x, f)
    ref = sosfiltfilt(f.to_sos(), x, padtype="even", padlen=12)
    err = np.abs(central(mine) - central(ref)).max()
    assert err < 1e-6 * np.abs(ref).max()
