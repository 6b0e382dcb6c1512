import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from g0cal import units
from g0cal.physics import CavityParams, MechMode, RegimeWarning, s_ww_thermal
from g0cal.presets import preset_config, preset_mapping
from g0cal.files import build_synth_config, config_from_mapping
from g0cal.specest import AnalyzerModel
from g0cal.spectrum import SpectrumUnit
from g0cal.synth import (
    BackgroundTerm,
    FrequencyGrid,
    NoiseRealization,
    SynthConfig,
    default_modulation_frequency,
    noiseless_parts,
    synth_frequency_noise_view,
    synth_trace,
    to_frequency_noise,
)
from g0cal.transduction import DetectionScheme


def _config(**kw):
    mode = kw.pop("mode", MechMode(units.to_angular(1e6), units.to_angular(200.0), 300.0, g0=units.to_angular(100.0)))
    cav = kw.pop("cavity", CavityParams(units.to_angular(1e8), 0.5, 0.0))
    scheme = kw.pop("scheme", DetectionScheme("homodyne", cav))
    base = dict(
        mode=mode, scheme=scheme, phi0=1e-3, omega_mod=units.to_angular(1.006e6),
        analyzer=AnalyzerModel.gaussian(25.0), grid=FrequencyGrid.centered(1.003e6, 2e4, 3001),
    )
    base.update(kw)
    return SynthConfig(**base)


def test_phi0_zero_has_no_tone_and_peak_at_omega_m():
    cfg = _config(phi0=0.0)
    tr = synth_trace(cfg)
    assert np.all(noiseless_parts(cfg)["tone"] == 0)
    assert abs(tr.freqs[np.argmax(tr.values)] - 1e6) <= tr.step / 2


def test_frequency_noise_view_is_single_sided_s_ww():
    cfg = _config(phi0=0.0)
    view = synth_frequency_noise_view(cfg, SpectrumUnit.FREQ_NOISE_RAD)
    expect = 2.0 * s_ww_thermal(cfg.mode, units.to_angular(view.freqs))
    np.testing.assert_allclose(view.values, expect, rtol=1e-12)
    assert view.sidedness == "single"


def test_direct_zero_detuning_masks_every_bin():
    cav = CavityParams(units.to_angular(1e8), 0.5, 0.0)
    cfg = _config(scheme=DetectionScheme("direct", cav), phi0=0.0)
    with pytest.warns(RegimeWarning):
        tr = synth_trace(cfg)
    view = to_frequency_noise(tr, cfg.scheme, cfg.power)
    assert np.all(np.isnan(view.values))
    assert view.meta["masked_bins"] == str(len(tr))


def test_tone_area_is_half_phi0_sq_k():
    cfg = _config()
    tone = noiseless_parts(cfg)["tone"]
    area = np.sum(tone) * cfg.grid.step
    expect = cfg.power * 0.5 * cfg.phi0**2 * float(cfg.scheme.k(cfg.omega_mod))
    assert area == pytest.approx(expect, rel=1e-6)


@settings(max_examples=40)
@given(
    ratio=st.floats(1.0, 20.0),
    eta=st.floats(0.05, 0.95),
    offset=st.floats(5.0, 40.0),
)
def test_flat_k_ratio_of_tone_to_peak(ratio, eta, offset):
    # homodyne on resonance with Omega_m >= kappa: K/Omega^2 nearly equal at
    # the peak and the tone, so the peak/tone relation of the simple method holds
    f_m, fwhm = 1e7, 100.0
    kappa = units.to_angular(f_m / ratio)
    mode = MechMode(units.to_angular(f_m), units.to_angular(fwhm), 300.0, g0=units.to_angular(200.0))
    scheme = DetectionScheme("homodyne", CavityParams(kappa, eta, 0.0))
    omega_mod = units.to_angular(f_m + offset * fwhm)
    k_m = scheme.k(mode.omega_m) / mode.omega_m**2
    k_mod = scheme.k(omega_mod) / omega_mod**2
    assert abs(k_m / k_mod - 1) < 4 * offset * fwhm / f_m + 1e-12


def test_noise_statistics():
    cfg = _config(noise=NoiseRealization(7, 100))
    clean = synth_trace(_config())
    noisy = synth_trace(cfg)
    r = noisy.values / clean.values
    assert r.mean() == pytest.approx(1.0, abs=4 * 0.1 / math.sqrt(r.size))
    assert r.var() == pytest.approx(0.01, rel=0.1)
    assert np.all(noisy.values > 0)


def test_seed_determinism():
    a = synth_trace(_config(noise=NoiseRealization(11, 10))).values
    b = synth_trace(_config(noise=NoiseRealization(11, 10))).values
    c = synth_trace(_config(noise=NoiseRealization(12, 10))).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_config_validation():
    with pytest.raises(ValueError):
        _config(phi0=0.2)
    with pytest.raises(ValueError):
        _config(omega_mod=units.to_angular(5e6))
    with pytest.raises(ValueError):
        _config(p_in=0.0)
    with pytest.raises(ValueError):
        NoiseRealization(1, 0)
    with pytest.raises(ValueError):
        BackgroundTerm("pink", 1.0)
    with pytest.raises(ValueError):
        FrequencyGrid(2.0, 1.0, 10)
    with pytest.warns(RegimeWarning):
        _config(omega_mod=units.to_angular(1.0001e6))


@pytest.mark.parametrize("alpha", [0.1, 10.0])
def test_displacement_normalisation_does_not_change_trace(alpha):
    g0 = units.to_angular(100.0)
    base = MechMode(units.to_angular(1e6), units.to_angular(200.0), 300.0, g0=g0).with_mass(1e-12)
    a = synth_trace(_config(mode=base)).values
    b = synth_trace(_config(mode=base.rescaled(alpha))).values
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_power_scales_whole_optical_trace():
    # detector PSD goes with the square of the optical power
    a = noiseless_parts(_config(p_in=1.0))
    b = noiseless_parts(_config(p_in=3.0))
    for key in ("mechanical", "tone"):
        np.testing.assert_allclose(b[key], 9.0 * a[key], rtol=1e-12, atol=1e-300)


def test_frequency_domain_background_is_flat_in_view():
    bg = BackgroundTerm("white", 1e3, domain="frequency_noise")
    cfg = _config(phi0=0.0, backgrounds=(bg,))
    clean = synth_frequency_noise_view(_config(phi0=0.0))
    view = synth_frequency_noise_view(cfg)
    np.testing.assert_allclose(view.values - clean.values, 1e3, rtol=1e-9)


def test_power_law_background_evaluates():
    term = BackgroundTerm("power_law", 2.0, -1.0, f_ref_hz=1e6)
    np.testing.assert_allclose(term.evaluate([1e6, 2e6]), [2.0, 1.0])


def test_default_modulation_frequency():
    mode = MechMode(units.to_angular(1e6), units.to_angular(100.0), 300.0, g0=1.0)
    f = units.to_hz(default_modulation_frequency(mode, AnalyzerModel.gaussian(10.0), units.to_angular(1e9)))
    assert f == pytest.approx(1e6 + 2000.0)
    f = units.to_hz(default_modulation_frequency(mode, AnalyzerModel.gaussian(10.0), units.to_angular(1e4)))
    assert f == pytest.approx(1e6 + 1e3)


def test_nanobeam_preset_shape():
    cfg = preset_config("nanobeam")
    tr = synth_trace(cfg)
    parts = noiseless_parts(cfg)
    mech_peak = tr.freqs[np.argmax(parts["mechanical"])]
    tone_peak = tr.freqs[np.argmax(parts["tone"])]
    assert abs(mech_peak - 8.3e6) <= tr.step
    assert abs(tone_peak - 8.0e6) <= tr.step
    # the tone stands well above the thermal continuum around it
    assert parts["tone"].max() > 10 * parts["mechanical"][np.argmax(parts["tone"])]


def test_preset_mapping_builds_through_config_layer():
    mapping = preset_mapping("dir_slope")
    cfg = build_synth_config(config_from_mapping(mapping))
    assert cfg.scheme.kind == "direct"
    assert cfg.cavity.detuning != 0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        synth_trace(cfg)
