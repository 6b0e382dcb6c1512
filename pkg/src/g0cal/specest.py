"""Spectrum-analyzer model: resolution filters, ENBW and periodograms.

A resolution filter F(f) is normalised to unit area over ordinary frequency,
so F(0) * ENBW = 1.  For DFT-based analysis F is |W(f)|^2 of the time window,
scaled to unit area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectrum import Spectrum, SpectrumUnit

# Cosine-sum windows w[n] = sum_k (-1)^k a_k cos(2 pi k n / N).
COSINE_COEFFS = {
    "rectangular": (1.0,),
    "hann": (0.5, 0.5),
    # same coefficients as scipy.signal.windows.flattop
    "flattop": (0.21557895, 0.41663158, 0.277263158, 0.083578947, 0.006947368),
}


@dataclass(frozen=True)
class Window:
    """Window / filter family.  ``sigma_hz`` is set only for ``gaussian``."""

    kind: str
    sigma_hz: float | None = None

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.sigma_hz is None or not self.sigma_hz > 0:
                raise ValueError("gaussian window needs a positive sigma_hz")
        elif self.kind in COSINE_COEFFS:
            if self.sigma_hz is not None:
                raise ValueError(f"{self.kind} window takes no sigma")
        else:
            raise ValueError(f"unknown window {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Window":
        """Parse ``rectangular | hann | flattop | gaussian:<sigma_hz>``."""
        text = text.strip().lower()
        if text.startswith("gaussian"):
            _, _, sigma = text.partition(":")
            if not sigma:
                raise ValueError("gaussian window needs a width, e.g. gaussian:10")
            return cls("gaussian", float(sigma))
        return cls(text)

    def __str__(self):
        if self.kind == "gaussian":
            return f"gaussian:{self.sigma_hz:.17g}"
        return self.kind

    @property
    def enbw_bins(self) -> float:
        """Analytic ENBW of a cosine-sum window in DFT bins."""
        if self.kind == "gaussian":
            raise ValueError("gaussian ENBW is fixed by sigma, not by a bin count")
        a = np.asarray(COSINE_COEFFS[self.kind])
        return float((a[0] ** 2 + 0.5 * np.sum(a[1:] ** 2)) / a[0] ** 2)


def window_samples(window: Window, n: int, fs: float | None = None, sym: bool = False) -> np.ndarray:
    """Sampled window of length n.

    Periodic ("DFT-even") by default; ``sym=True`` gives the symmetric variant.
    A Gaussian window with spectral width sigma_hz has temporal width
    1 / (2 sqrt(2) pi sigma_hz) and needs ``fs``.
    """
    if n < 1:
        raise ValueError("window length must be positive")
    m = n - 1 if sym else n
    idx = np.arange(n)
    if window.kind == "gaussian":
        if fs is None:
            raise ValueError("gaussian window needs the sample rate")
        sigma_t = 1.0 / (2.0 * math.sqrt(2.0) * math.pi * window.sigma_hz)
        t = (idx - m / 2.0) / fs
        return np.exp(-0.5 * (t / sigma_t) ** 2)
    if m == 0:
        return np.ones(1)
    w = np.zeros(n)
    for k, a in enumerate(COSINE_COEFFS[window.kind]):
        w += (-1) ** k * a * np.cos(2.0 * math.pi * k * idx / m)
    return w


def enbw_of(window: Window, n: int | None = None, fs: float | None = None, sym: bool = False) -> float:
    """Effective noise bandwidth in Hz.

    With ``n`` and ``fs`` this is the discrete value fs * sum(w^2) / sum(w)^2;
    for a Gaussian filter without them it is sigma * sqrt(2 pi).
    """
    if n is not None:
        if fs is None:
            raise ValueError("discrete ENBW needs fs")
        w = window_samples(window, n, fs, sym)
        return float(fs * np.sum(w**2) / np.sum(w) ** 2)
    if window.kind == "gaussian":
        return window.sigma_hz * math.sqrt(2.0 * math.pi)
    raise ValueError(f"{window.kind} ENBW needs the record length n and sample rate fs")


@dataclass(frozen=True)
class AnalyzerModel:
    """Resolution-bandwidth filter of a (single-sided) spectrum analyzer."""

    window: Window
    enbw: float
    display: str = "single_sided"

    def __post_init__(self):
        if not self.enbw > 0:
            raise ValueError("enbw must be positive")
        if self.window.kind == "gaussian":
            expected = enbw_of(self.window)
            if abs(self.enbw - expected) > 1e-9 * expected:
                raise ValueError(f"gaussian:{self.window.sigma_hz} has ENBW {expected}, not {self.enbw}")

    @classmethod
    def gaussian(cls, enbw: float) -> "AnalyzerModel":
        return cls(Window("gaussian", enbw / math.sqrt(2.0 * math.pi)), enbw)

    @classmethod
    def from_window(cls, window: Window, enbw: float | None = None) -> "AnalyzerModel":
        if window.kind == "gaussian":
            return cls(window, enbw_of(window))
        if enbw is None:
            raise ValueError(f"{window.kind} analyzer needs an explicit ENBW")
        return cls(window, enbw)

    def filter(self, f) -> np.ndarray:
        """Unit-area filter lineshape F(f) (1/Hz), centred at 0."""
        f = np.asarray(f, dtype=float)
        if self.window.kind == "gaussian":
            s = self.window.sigma_hz
            return np.exp(-0.5 * (f / s) ** 2) / (s * math.sqrt(2.0 * math.pi))
        a = COSINE_COEFFS[self.window.kind]
        record = self.window.enbw_bins / self.enbw
        u = f * record
        amp = a[0] * np.sinc(u)
        for k, ak in enumerate(a[1:], start=1):
            amp = amp + 0.5 * ak * (np.sinc(u - k) + np.sinc(u + k))
        return (amp / a[0]) ** 2 / self.enbw


def convolve_tone(spectrum: Spectrum, tone_freq: float, tone_weight: float, analyzer: AnalyzerModel) -> Spectrum:
    """Add a filter-broadened pure tone to a spectrum.

    ``tone_weight`` is the tone's mean square (its single-sided area).  For a
    single-sided display the added feature is w (F(f - f0) + F(f + f0)),
    whose peak is w / ENBW.
    """
    f = spectrum.freqs
    if not f[0] <= tone_freq <= f[-1]:
        raise ValueError(f"tone at {tone_freq} Hz lies outside the grid [{f[0]}, {f[-1]}]")
    scale = tone_weight if spectrum.sidedness == "single" else tone_weight / 2.0
    added = scale * (analyzer.filter(f - tone_freq) + analyzer.filter(f + tone_freq))
    return spectrum.with_values(spectrum.values + added)


def periodogram(samples, fs: float, window: Window, n_segments: int = 1,
                unit: SpectrumUnit = SpectrumUnit.SIGNAL) -> Spectrum:
    """Single-sided PSD estimate, averaged over non-overlapping segments.

    Normalised so that sum(PSD) * df equals the window-compensated mean square
    sum((x w)^2) / sum(w^2) of each segment.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("periodogram needs at least two samples")
    if not fs > 0:
        raise ValueError("fs must be positive")
    nseg = x.size // n_segments
    if nseg < 2:
        raise ValueError("segments too short")
    w = window_samples(window, nseg, fs)
    segs = x[: nseg * n_segments].reshape(n_segments, nseg)
    spec = np.abs(np.fft.rfft(segs * w, axis=1)) ** 2
    psd = spec.mean(axis=0) / (fs * np.sum(w**2))
    psd[1:] *= 2.0
    if nseg % 2 == 0:
        psd[-1] /= 2.0  # Nyquist bin is not doubled
    freqs = np.fft.rfftfreq(nseg, 1.0 / fs)
    enbw = fs * np.sum(w**2) / np.sum(w) ** 2
    meta = {"window": str(window), "enbw_hz": repr(float(enbw)), "n_segments": str(n_segments)}
    return Spectrum(freqs, psd, "single", unit, meta)
