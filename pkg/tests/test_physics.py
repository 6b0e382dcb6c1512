import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from g0cal import units
from g0cal.physics import (
    HBAR,
    K_B,
    ApproximationWarning,
    CavityParams,
    MechMode,
    RegimeWarning,
    frequency_variance,
    occupation,
    s_ww_thermal,
    s_xx_thermal,
    x_zpf,
)
from g0cal.spectrum import Spectrum, SpectrumUnit

TWO_PI = 2 * math.pi


def test_constants_exact():
    assert HBAR == 6.62607015e-34 / (2 * math.pi)
    assert K_B == 1.380649e-23
    assert HBAR == pytest.approx(1.054571817e-34, rel=1e-9)


def test_x_zpf_identity_and_scaling():
    assert x_zpf(HBAR / 2, 1.0) == pytest.approx(1.0, rel=1e-15)
    a = x_zpf(1e-11, TWO_PI * 70e6)
    assert a == pytest.approx(1.1e-16, rel=0.05)
    # hand value sqrt(hbar / (2 m Omega))
    assert a == pytest.approx(math.sqrt(1.054571817e-34 / (2e-11 * TWO_PI * 70e6)), rel=1e-9)
    assert x_zpf(2e-11, TWO_PI * 70e6) == pytest.approx(a / math.sqrt(2), rel=1e-14)
    with pytest.raises(ValueError):
        x_zpf(0.0, 1.0)
    with pytest.raises(ValueError):
        x_zpf(1.0, -1.0)


def test_occupation_values():
    wm = TWO_PI * 8.3e6
    n = occupation(wm, 300.0)
    assert n == pytest.approx(7.5e5, rel=0.01)
    assert occupation(wm, 300.0, exact=True) == pytest.approx(n, rel=1e-5)


def test_occupation_definition_at_unit_ratio():
    wm = 1e9
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert occupation(wm, HBAR * wm / K_B) == pytest.approx(1.0, rel=1e-14)
    assert any(issubclass(w.category, ApproximationWarning) for w in caught)


def test_occupation_high_t_series():
    # hbar Omega / kT = 0.01: 1/(e^x - 1) = 1/x - 1/2 + x/12
    x = 0.01
    wm = 1e9
    T = HBAR * wm / (K_B * x)
    hi, ex = occupation(wm, T), occupation(wm, T, exact=True)
    assert (hi - ex) / ex == pytest.approx(0.5 * x, rel=0.02)


def test_occupation_zero_temperature():
    assert occupation(1e6, 0.0, exact=True) == 0.0
    with pytest.warns(ApproximationWarning):
        assert occupation(1e6, 0.0) == 0.0
    with pytest.raises(ValueError):
        occupation(1e6, -1.0)


def test_mechmode_branches():
    with pytest.raises(ValueError):
        MechMode(1e6, 1.0)
    with pytest.raises(ValueError):
        MechMode(1e6, 1.0, m_eff=1e-12, G=1e18, g0=1.0)
    with pytest.raises(ValueError):
        MechMode(1e6, 1.0, m_eff=1e-12)
    with pytest.raises(ValueError):
        MechMode(-1.0, 1.0, g0=1.0)
    with pytest.raises(ValueError):
        CavityParams(1.0, 1.5)


def test_mass_branch_round_trip():
    mode = MechMode(TWO_PI * 70e6, TWO_PI * 5e3, m_eff=3e-12, G=TWO_PI * 1e19)
    g0 = mode.coupling_rate
    assert g0 == pytest.approx(mode.G * mode.x_zpf, rel=1e-15)
    back = mode.without_mass().with_mass(mode.m_eff)
    assert back.G == pytest.approx(mode.G, rel=1e-12)
    for alpha in (0.1, 10.0):
        assert mode.rescaled(alpha).coupling_rate == pytest.approx(g0, rel=1e-12)


def test_sxx_resonance_and_forms():
    mode = MechMode(TWO_PI * 1e6, TWO_PI * 10.0, 300.0, m_eff=1e-12, G=1e18)
    wm = mode.omega_m
    peak = float(s_xx_thermal(mode, wm))
    assert peak == pytest.approx(2 * K_B * 300 / (mode.m_eff * mode.gamma_m * wm**2), rel=1e-14)
    om = np.linspace(-3 * wm, 3 * wm, 2001)
    ex = s_xx_thermal(mode, om, "exact_coth")
    assert np.all(ex > 0)
    np.testing.assert_allclose(ex, ex[::-1], rtol=1e-12)
    # Omega = 0 uses the analytic limit
    assert np.isfinite(s_xx_thermal(mode, 0.0, "exact_coth"))
    hot = MechMode(wm, mode.gamma_m, 1e9, m_eff=1e-12, G=1e18)
    np.testing.assert_allclose(s_xx_thermal(hot, om, "exact_coth"), s_xx_thermal(hot, om), rtol=1e-6)
    with pytest.raises(ValueError):
        s_xx_thermal(mode.without_mass(), wm)


def test_equipartition():
    mode = MechMode(TWO_PI * 1e6, TWO_PI * 1e3, 300.0, m_eff=1e-12, G=1e18)
    wm, gm = mode.omega_m, mode.gamma_m

    def f(theta):
        om = wm + 0.5 * gm * math.tan(theta)
        return float(s_xx_thermal(mode, om)) * 0.5 * gm / math.cos(theta) ** 2

    half, _ = integrate.quad(f, math.atan(-wm / (0.5 * gm)), math.pi / 2, limit=400, epsrel=1e-12)
    total = 2 * half / TWO_PI
    assert total == pytest.approx(K_B * 300 / (mode.m_eff * wm**2), rel=1e-3)


def test_sww_branches_agree():
    mass = MechMode(TWO_PI * 8e6, TWO_PI * 2e3, 300.0, m_eff=2e-13, G=TWO_PI * 5e18)
    direct = mass.without_mass()
    om = np.linspace(0.9, 1.1, 101) * mass.omega_m
    np.testing.assert_allclose(s_ww_thermal(mass, om), s_ww_thermal(direct, om), rtol=1e-13)
    doubled = MechMode(mass.omega_m, mass.gamma_m, 300.0, m_eff=mass.m_eff, G=2 * mass.G)
    np.testing.assert_allclose(s_ww_thermal(doubled, om), 4 * s_ww_thermal(mass, om), rtol=1e-14)


def test_sww_peak_equals_variance_form():
    mode = MechMode(TWO_PI * 8.3e6, TWO_PI * 100.0, 300.0, g0=TWO_PI * 500)
    n = occupation(mode.omega_m, 300.0)
    peak = float(s_ww_thermal(mode, mode.omega_m))
    assert peak == pytest.approx(4 * n * mode.g0**2 / mode.gamma_m, rel=1e-13)


def test_variance_identity():
    mode = MechMode(TWO_PI * 10e6, TWO_PI * 1e3, 300.0, g0=TWO_PI * 500)
    v = frequency_variance(mode)
    assert v.narrow
    assert v.max_rel_spread < 1e-6
    mode = MechMode(TWO_PI * 10e6, TWO_PI * 1e6 * 3, 300.0, g0=TWO_PI * 500)
    with pytest.warns(RegimeWarning):
        frequency_variance(mode)


def test_variance_identity_arithmetic():
    # 2 <n> g0^2 with <n> = 1e6, g0 = 2 pi 500 Hz
    wm = 1e7
    T = 1e6 * HBAR * wm / K_B
    mode = MechMode(wm, wm * 1e-4, T, g0=TWO_PI * 500)
    v = frequency_variance(mode)
    assert v.occupation_form == pytest.approx(2e6 * (TWO_PI * 500) ** 2, rel=1e-12)


def test_nanobeam_number():
    # <d omega^2> = (2 pi 530 kHz)^2 at 300 K, Omega_m = 2 pi 8.3 MHz
    n = occupation(TWO_PI * 8.3e6, 300.0)
    g0 = math.sqrt((TWO_PI * 530e3) ** 2 / (2 * n))
    assert units.to_hz(g0) == pytest.approx(420.0, rel=0.05)
    # frozen regression value
    assert units.to_hz(g0) == pytest.approx(431.8428, rel=1e-6)


def test_spectrum_sidedness_round_trip():
    f = np.linspace(0, 10, 11)
    s = Spectrum(f, np.arange(11.0) + 1)
    d = s.to_double()
    assert d.freqs[0] == -10 and d.values[0] == 11 / 2
    back = d.to_single()
    np.testing.assert_array_equal(back.values, s.values)
    np.testing.assert_array_equal(back.freqs, s.freqs)
    assert s.integrate() == pytest.approx(d.integrate(), rel=0.1)


def test_spectrum_validation_and_units():
    with pytest.raises(ValueError):
        Spectrum([0, 0], [1, 1])
    with pytest.raises(ValueError):
        Spectrum([0, 1], [1, 1], sidedness="both")
    s = Spectrum([1.0, 2.0], [TWO_PI**2, 0.0], unit=SpectrumUnit.FREQ_NOISE_RAD)
    hz = s.convert(SpectrumUnit.FREQ_NOISE_HZ)
    assert hz.values[0] == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ValueError):
        s.convert(SpectrumUnit.DISPLACEMENT)
    assert units.to_hz(units.to_angular(3.0)) == pytest.approx(3.0, rel=1e-15)
