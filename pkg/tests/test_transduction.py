import math
import warnings

import numpy as np
import pytest
from scipy import optimize

from g0cal.physics import CavityParams, RegimeWarning
from g0cal.transduction import (
    DetectionScheme,
    k_direct,
    k_homodyne,
    k_homodyne_resonant,
    k_homodyne_rsb,
    optimal_detuning_direct,
    rsb_residual,
)


def test_direct_zeros():
    cav = CavityParams(1.0, 0.7, 0.0)
    assert np.all(k_direct(cav, np.linspace(0, 10, 11)) == 0)
    assert k_direct(CavityParams(1.0, 0.7, 0.3), 0.0) == 0


def test_homodyne_special_values():
    cav = CavityParams(1.0, 1.0, 0.0)
    assert float(k_homodyne(cav, 1e6)) == pytest.approx(16.0, rel=1e-9)
    assert float(k_homodyne(cav, 0.5)) == pytest.approx(8.0, rel=1e-14)


@pytest.mark.parametrize("eta", [0.1, 0.5 - 1e-6, 0.9])
def test_homodyne_small_detuning_limit(eta):
    om = np.geomspace(1e-2, 1e2, 9)
    lim = k_homodyne_resonant(eta, 1.0, om)
    # the limit needs Delta << |1 - 2 eta| kappa
    small = 1e-4 * abs(1 - 2 * eta)
    np.testing.assert_allclose(k_homodyne(CavityParams(1.0, eta, small), om), lim, rtol=1e-6)
    np.testing.assert_allclose(k_homodyne(CavityParams(1.0, eta, 0.0), om), lim, rtol=1e-12)


def test_homodyne_limit_branch_continuous():
    om = np.geomspace(1e-2, 1e2, 9)
    at = k_homodyne(CavityParams(1.0, 0.5, 0.0), om)
    for d_eta in (1e-3, 1e-5, 1e-7):
        near = k_homodyne(CavityParams(1.0, 0.5 + d_eta, 0.0), om)
        np.testing.assert_allclose(near, at, rtol=10 * d_eta)
    assert DetectionScheme("homodyne", CavityParams(1.0, 0.5)).needs_limit


def test_rsb_approximation():
    with pytest.warns(RegimeWarning):
        k_homodyne_rsb(CavityParams(1.0, 1.0, 2.0))
    assert k_homodyne_rsb(CavityParams(1.0, 1.0, 1e6)) == pytest.approx(4.0, rel=1e-10)
    assert k_homodyne_rsb(CavityParams(1.0, 13 / 16, 10.0)) == pytest.approx(4 * (13 / 16) ** 2, rel=1e-15)
    assert abs(rsb_residual(CavityParams(1.0, 0.5, 10.0))) < 5e-4


def test_rsb_residual_scaling():
    r1 = rsb_residual(CavityParams(1.0, 0.5, 10.0))
    r2 = rsb_residual(CavityParams(0.5, 0.5, 10.0))
    assert 12 <= r1 / r2 <= 20


def test_optimal_detuning_known_point():
    (opt,) = optimal_detuning_direct(1.0, 0.5, 1.0)
    assert opt.branch == "single"
    assert opt.detuning == pytest.approx(math.sqrt(15) / 6, rel=1e-14)
    assert opt.k_closed_form == pytest.approx(27 * 0.25 * 1.25 / 8, rel=1e-14)
    assert opt.k_value == pytest.approx(1.0546875, rel=1e-12)


def test_optimal_detuning_high_omega():
    out = optimal_detuning_direct(1.0, 1.0, 10.0)
    assert [o.branch for o in out] == ["slope", "sideband"]
    for o in out:
        assert o.k_value == pytest.approx(4.0, rel=1e-12)
    assert abs(out[0].k_value / out[1].k_value - 1) < 1e-12


def _numeric_argmax(kappa, eta, omega, lo, hi):
    res = optimize.minimize_scalar(lambda d: -float(k_direct(CavityParams(kappa, eta, d), omega)),
                                   bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return res.x


@pytest.mark.parametrize("omega,eta", [(0.3, 0.2), (1.0, 0.5), (1.3, 0.9), (2.0, 0.5), (5.0, 0.3), (20.0, 0.8)])
def test_optimal_detuning_matches_numeric(omega, eta):
    for o in optimal_detuning_direct(1.0, eta, omega):
        d = _numeric_argmax(1.0, eta, omega, 0.8 * o.detuning, 1.2 * o.detuning)
        assert abs(d - o.detuning) < 1e-6
        assert o.k_value == pytest.approx(o.k_closed_form, rel=1e-12)


def test_scheme():
    s = DetectionScheme("direct", CavityParams(1.0, 0.5))
    assert s.degenerate
    assert s.power_scale(2.0) == 4.0
    h = DetectionScheme("homodyne", CavityParams(1.0, 0.5), lo_power_ratio=3.0)
    assert h.power_scale(2.0) == 12.0
    with pytest.raises(ValueError):
        DetectionScheme("pdh", CavityParams(1.0, 0.5))
    with pytest.raises(ValueError):
        DetectionScheme("homodyne", CavityParams(1.0, 0.5), lo_power_ratio=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert float(h.k(1.0)) > 0
