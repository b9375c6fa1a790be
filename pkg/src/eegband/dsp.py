"""Butterworth band-pass design and zero-phase filtering.

Design path: analog Butterworth low-pass prototype, low-pass to band-pass
transformation at the warped analog edges, bilinear transform, conjugate
pole pairing into biquad sections with one zero at z=1 and one at z=-1 each.
`order` is the order of the final band-pass filter (number of poles), so an
order-4 band-pass holds 2 biquad sections and rolls off at 3 dB exactly at
both cutoffs.

Application is zero-phase: reflect-pad by 3*order samples, filter, reverse,
filter again, reverse, trim. The per-section recursion itself runs through
scipy.signal.sosfilt.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import sosfilt

EEG_BANDS = {
    "theta": (4.0, 8.0),
    "alpha": (8.0, 14.0),
    "beta": (14.0, 30.0),
}
BAND_ORDER = ("theta", "alpha", "beta")
DEFAULT_FS = 250.0
DEFAULT_ORDER = 4


@dataclass(frozen=True)
class BandSpec:
    name: str
    low_hz: float
    high_hz: float

    def __post_init__(self):
        if not 0 < self.low_hz < self.high_hz:
            raise ValueError(
                f"band {self.name}: need 0 < low < high, got "
                f"[{self.low_hz}, {self.high_hz}]")


def standard_bands():
    """The three expansion bands, in canonical order."""
    return [BandSpec(name, *EEG_BANDS[name]) for name in BAND_ORDER]


def band_by_name(name):
    if name not in EEG_BANDS:
        raise ValueError(f"unknown band {name!r}, expected one of {BAND_ORDER}")
    return BandSpec(name, *EEG_BANDS[name])


@dataclass(frozen=True)
class FilterCascade:
    """Biquad cascade; sections[i] = (b0, b1, b2, a1, a2), a0 normalized to 1."""

    sections: tuple
    order: int
    band: BandSpec
    fs: float

    def to_sos(self):
        """scipy second-order-sections array [n, 6]."""
        return np.array([[b0, b1, b2, 1.0, a1, a2]
                         for b0, b1, b2, a1, a2 in self.sections])


def _complex_response(sections, freq_hz, fs):
    w = 2.0 * np.pi * freq_hz / fs
    zinv = np.exp(-1j * w)
    h = 1.0 + 0.0j
    for b0, b1, b2, a1, a2 in sections:
        h *= (b0 + b1 * zinv + b2 * zinv ** 2) / (1.0 + a1 * zinv + a2 * zinv ** 2)
    return h


def frequency_response(cascade, freq_hz):
    """Single-pass magnitude of the cascade at freq_hz (0..fs/2)."""
    if not 0 <= freq_hz <= cascade.fs / 2:
        raise ValueError(f"frequency {freq_hz} outside [0, {cascade.fs / 2}]")
    return float(abs(_complex_response(cascade.sections, freq_hz, cascade.fs)))


def design_bandpass(band, fs, order=DEFAULT_ORDER):
    """Design a Butterworth band-pass as a stable biquad cascade.

    Args:
        band: BandSpec with edges strictly inside (0, fs/2).
        order: final band-pass order; even, one of {2, 4, 6, 8}.
    """
    if order % 2 != 0 or order not in (2, 4, 6, 8):
        raise ValueError(f"order must be one of 2, 4, 6, 8; got {order}")
    nyquist = fs / 2.0
    if band.high_hz >= nyquist:
        raise ValueError(
            f"band edge {band.high_hz} Hz >= Nyquist {nyquist} Hz at fs={fs}")

    n = order // 2  # analog low-pass prototype order
    # Pre-warp the band edges so the bilinear transform lands them exactly.
    w1 = 2.0 * fs * np.tan(np.pi * band.low_hz / fs)
    w2 = 2.0 * fs * np.tan(np.pi * band.high_hz / fs)
    w0 = np.sqrt(w1 * w2)
    bw = w2 - w1

    proto = [np.exp(1j * np.pi * (2 * k + n + 1) / (2 * n)) for k in range(n)]
    analog_poles = []
    for p in proto:
        disc = np.sqrt((bw * p) ** 2 - 4.0 * w0 ** 2)
        analog_poles.append((bw * p + disc) / 2.0)
        analog_poles.append((bw * p - disc) / 2.0)

    digital_poles = [(1.0 + p / (2.0 * fs)) / (1.0 - p / (2.0 * fs))
                     for p in analog_poles]
    for zp in digital_poles:
        if abs(zp) >= 1.0:
            raise ValueError(f"unstable pole |z|={abs(zp):.6f} in design")

    tol = 1e-9
    complex_poles = [zp for zp in digital_poles if zp.imag > tol]
    real_poles = sorted(zp.real for zp in digital_poles if abs(zp.imag) <= tol)
    sections = []
    for zp in sorted(complex_poles, key=lambda z: (z.real, z.imag)):
        sections.append([1.0, 0.0, -1.0, -2.0 * zp.real, abs(zp) ** 2])
    for r1, r2 in zip(real_poles[::2], real_poles[1::2]):
        sections.append([1.0, 0.0, -1.0, -(r1 + r2), r1 * r2])
    if len(sections) != n:
        raise AssertionError("pole pairing failed to form order/2 sections")

    # Unit gain where the prototype's DC lands: the digital image of w0.
    f_center = fs / np.pi * np.arctan(w0 / (2.0 * fs))
    g = abs(_complex_response([tuple(s) for s in sections], f_center, fs))
    scale = (1.0 / g) ** (1.0 / n)
    for s in sections:
        s[0] *= scale
        s[2] *= scale

    return FilterCascade(tuple(tuple(s) for s in sections), order, band, float(fs))


def apply_zero_phase(x, cascade):
    """Forward-backward filter along the last axis; output length == input.

    Accepts a single channel [T] or a trial matrix [channels, T]. Requires
    T > 3*order for the reflective edge padding.
    """
    arr = np.asarray(x)
    pad = 3 * cascade.order
    if arr.shape[-1] <= pad:
        raise ValueError(
            f"sequence of length {arr.shape[-1]} too short for zero-phase "
            f"filtering (needs > {pad} samples)")
    work = arr.astype(np.float64, copy=False)
    pad_spec = [(0, 0)] * (work.ndim - 1) + [(pad, pad)]
    padded = np.pad(work, pad_spec, mode="reflect")
    sos = cascade.to_sos()
    y = sosfilt(sos, padded, axis=-1)
    y = sosfilt(sos, y[..., ::-1], axis=-1)[..., ::-1]
    out = y[..., pad:-pad]
    return out.astype(arr.dtype, copy=False) if arr.dtype != np.float64 else out
