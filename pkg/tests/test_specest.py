import math

import numpy as np
import pytest
from scipy import integrate

from g0cal.analysis import measure_tone
from g0cal.specest import AnalyzerModel, Window, convolve_tone, enbw_of, periodogram, window_samples
from g0cal.spectrum import Spectrum


def test_window_parse():
    assert Window.parse("hann") == Window("hann")
    w = Window.parse("gaussian:12.5")
    assert w.sigma_hz == 12.5 and str(w).startswith("gaussian:")
    for bad in ("gaussian", "kaiser", "gaussian:-1"):
        with pytest.raises(ValueError):
            Window.parse(bad)
    with pytest.raises(ValueError):
        Window("hann", 3.0)


def test_rectangular_one_bin():
    assert enbw_of(Window("rectangular"), 1000, 1e4) == pytest.approx(10.0, rel=1e-14)


def test_hann_enbw():
    n = 2**14
    assert enbw_of(Window("hann"), n, n) == pytest.approx(1.5, rel=1e-3)
    assert Window("hann").enbw_bins == 1.5


@pytest.mark.parametrize("kind", ["hann", "flattop"])
def test_discrete_enbw_converges(kind):
    w = Window(kind)
    errs = [abs(enbw_of(w, n, n, sym=True) - w.enbw_bins) for n in (2**10, 2**12, 2**14, 2**16)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    # periodic windows hit the analytic value exactly
    assert enbw_of(w, 2**10, 2**10) == pytest.approx(w.enbw_bins, rel=1e-12)


def test_gaussian_enbw_closed_form():
    sigma = 7.0
    a = AnalyzerModel.gaussian(sigma * math.sqrt(2 * math.pi))
    area, _ = integrate.quad(a.filter, -np.inf, np.inf, epsabs=0, epsrel=1e-12)
    assert area == pytest.approx(1.0, rel=1e-9)
    assert enbw_of(Window("gaussian", sigma)) == pytest.approx(1 / a.filter(0.0), rel=1e-12)
    with pytest.raises(ValueError):
        AnalyzerModel(Window("gaussian", sigma), 1.0)


@pytest.mark.parametrize("kind", ["rectangular", "hann", "flattop"])
def test_filter_unit_area(kind):
    a = AnalyzerModel(Window(kind), 10.0)
    assert a.filter(0.0) * a.enbw == pytest.approx(1.0, rel=1e-12)
    f = np.linspace(-2000, 2000, 800001)
    area = np.sum(a.filter(f)) * (f[1] - f[0])
    # sinc^2 tails of the rectangular filter converge slowly
    assert area == pytest.approx(1.0, rel=2e-3 if kind == "rectangular" else 1e-5)


def test_gaussian_window_matches_filter_width():
    fs, n = 1e4, 2**16
    w = window_samples(Window("gaussian", 5.0), n, fs)
    assert enbw_of(Window("gaussian", 5.0), n, fs) == pytest.approx(5.0 * math.sqrt(2 * math.pi), rel=1e-6)
    assert w.max() == pytest.approx(1.0)


def test_convolve_tone_area_and_peak():
    f = np.linspace(900, 1100, 4001)
    base = Spectrum(f, np.zeros_like(f))
    for enbw in (5.0, 10.0):
        a = AnalyzerModel.gaussian(enbw)
        s = convolve_tone(base, 1000.03, 2.5, a)
        assert np.sum(s.values) * (f[1] - f[0]) == pytest.approx(2.5, rel=1e-6)
        assert s.values.max() == pytest.approx(2.5 / enbw, rel=1e-3)
    with pytest.raises(ValueError):
        convolve_tone(base, 2000.0, 1.0, a)
    double = convolve_tone(Spectrum(f, np.zeros_like(f), "double"), 1000.0, 2.0, a)
    assert np.sum(double.values) * (f[1] - f[0]) == pytest.approx(1.0, rel=1e-6)


def test_periodogram_parseval():
    rng = np.random.default_rng(0)
    x = rng.normal(size=4096)
    for win in ("rectangular", "hann", "flattop"):
        w = window_samples(Window(win), 4096)
        p = periodogram(x, 1.0, Window(win))
        df = p.freqs[1] - p.freqs[0]
        assert np.sum(p.values) * df == pytest.approx(np.sum((x * w) ** 2) / np.sum(w**2), rel=1e-10)
    with pytest.raises(ValueError):
        periodogram([1.0], 1.0, Window("hann"))


def test_periodogram_sine_rectangular():
    n, fs = 1024, 1024.0
    t = np.arange(n) / fs
    p = periodogram(np.sin(2 * np.pi * 64 * t), fs, Window("rectangular"))
    assert np.sum(p.values) * (p.freqs[1] - p.freqs[0]) == pytest.approx(0.5, rel=1e-12)


def test_periodogram_white_noise_level():
    rng = np.random.default_rng(11)
    sigma, fs = 0.7, 1e3
    p = periodogram(rng.normal(0, sigma, 256 * 1000), fs, Window("hann"), n_segments=1000)
    interior = p.values[1:-1]
    level = sigma**2 / (fs / 2)
    assert np.mean(interior) == pytest.approx(level, rel=0.01)
    # ripple over 16-bin bands
    smooth = np.convolve(interior, np.ones(16) / 16, mode="valid")
    assert np.max(np.abs(smooth / level - 1)) < 0.05


def test_hann_tone_height_matches_convolve_tone():
    n, fs, k = 4096, 4096.0, 300
    t = np.arange(n) / fs
    amp = 0.01
    p = periodogram(amp * np.sin(2 * np.pi * k * t), fs, Window("hann"))
    enbw = float(p.meta["enbw_hz"])
    assert enbw == pytest.approx(1.5 * fs / n, rel=1e-12)
    weight = amp**2 / 2
    assert p.values[k] == pytest.approx(weight / enbw, rel=1e-9)
    model = convolve_tone(Spectrum(p.freqs, np.zeros_like(p.freqs)), k * fs / n, weight,
                          AnalyzerModel(Window("hann"), enbw))
    assert model.values[k] == pytest.approx(p.values[k], rel=1e-9)
    np.testing.assert_allclose(model.values[k - 1:k + 2], p.values[k - 1:k + 2], rtol=1e-6)


def test_periodogram_power_linearity():
    rng = np.random.default_rng(5)
    n, seg = 512, 400
    a = rng.normal(0, 1.0, n * seg)
    b = rng.normal(0, 2.0, n * seg)
    pa = periodogram(a, 1.0, Window("hann"), seg).values[1:-1]
    pb = periodogram(b, 1.0, Window("hann"), seg).values[1:-1]
    pab = periodogram(a + b, 1.0, Window("hann"), seg).values[1:-1]
    diff = np.mean(pab) - np.mean(pa + pb)
    # each averaged bin has relative scatter 1/sqrt(seg); average over bins
    err = np.mean(pa + pb) * 3 / math.sqrt(seg * pab.size / 2)
    assert abs(diff) < err


def test_tone_area_through_periodogram():
    rng = np.random.default_rng(2024)
    n, seg, fs = 4096, 64, 1e6
    k = 700
    t = np.arange(n * seg) / fs
    amp = 3e-3
    x = amp * np.sin(2 * np.pi * k * fs / n * t) + rng.normal(0, 1e-3, t.size)
    p = periodogram(x, fs, Window("hann"), seg)
    tone = measure_tone(p, k * fs / n, AnalyzerModel(Window("hann"), float(p.meta["enbw_hz"])))
    assert tone.area == pytest.approx(amp**2 / 2, rel=0.01)
