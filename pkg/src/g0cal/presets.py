"""Named synthetic configurations.

Each preset is a run-config mapping (the same keys as a config file).  The
grids follow one recipe: step about FWHM/30, Gaussian ENBW FWHM/8, span of
about 100 FWHM and the tone 30 FWHM above the mechanical line.  The trace
backgrounds are synthetic choices, not measured levels.
"""

from __future__ import annotations

from .files import build_synth_config, config_from_mapping


def _recipe(omega_m_hz, gamma_m_hz, *, offset_fwhm=30.0, span_fwhm=100.0, per_fwhm=30, enbw_frac=1 / 8):
    f_mod = omega_m_hz + offset_fwhm * gamma_m_hz
    span = span_fwhm * gamma_m_hz
    return {
        "omega_m_hz": omega_m_hz,
        "gamma_m_hz": gamma_m_hz,
        "f_mod_hz": f_mod,
        "center_hz": omega_m_hz + 0.5 * offset_fwhm * gamma_m_hz,
        "span_hz": span,
        "n_points": int(round(span_fwhm * per_fwhm)) + 1,
        "rbw_hz": enbw_frac * gamma_m_hz,
    }


def _preset(detection, kappa_hz, eta_c, detuning, omega_m_hz, gamma_m_hz, g0_hz, phi0, **extra):
    out = {"detection": detection, "kappa_hz": kappa_hz, "eta_c": eta_c, "detuning_hz": detuning}
    out.update(_recipe(omega_m_hz, gamma_m_hz))
    out.update({"g0_hz": g0_hz, "phi0_rad": phi0, "temperature_k": 300})
    out.update(extra)
    return out


# flat-K round-trip set: homodyne on resonance and direct detection at the optimal detunings
ROUND_TRIP = {
    "hom_balanced": _preset("homodyne", 1e9, 0.5, 0, 5e6, 50.0, 1000.0, 8e-3),
    "hom_overcoupled": _preset("homodyne", 5e8, 1.0, 0, 20e6, 200.0, 300.0, 1e-3),
    "hom_undercoupled": _preset("homodyne", 2e9, 0.1, 0, 50e6, 500.0, 2000.0, 5e-3),
    "hom_resolved": _preset("homodyne", 50e6, 0.3, 0, 200e6, 2000.0, 150.0, 1e-3,
                            backgrounds="white:3e-13"),
    "hom_low_q": _preset("homodyne", 1e8, 0.7, 0, 1e6, 50.0, 100.0, 5e-2,
                         lo_power_ratio=10, p_in=3e-3, backgrounds="white:1e-11"),
    "dir_slope": _preset("direct", 10e6, 0.5, "optimal_slope", 30e6, 300.0, 500.0, 1e-3),
    "dir_sideband": _preset("direct", 10e6, 0.5, "optimal_sideband", 30e6, 300.0, 500.0, 1e-3),
    "dir_single": _preset("direct", 20e6, 0.8, "optimal", 5e6, 50.0, 800.0, 6e-3),
    "dir_overcoupled": _preset("direct", 30e6, 1.0, "optimal_slope", 100e6, 1000.0, 250.0, 1e-3,
                               backgrounds="white:4e-11"),
    "dir_weak": _preset("direct", 5e6, 0.2, "optimal_sideband", 40e6, 400.0, 1500.0, 3e-3, p_in=2.0),
}

# device-like presets: a nanobeam read out by homodyne and a ring read out on the cavity slope
NANOBEAM = {
    "detection": "homodyne", "kappa_hz": 5e9, "eta_c": 0.5, "detuning_hz": 0,
    "omega_m_hz": 8.3e6, "gamma_m_hz": 2e3, "temperature_k": 300, "g0_hz": 420.0,
    "phi0_rad": 1e-2, "f_mod_hz": 8.0e6, "center_hz": 8.15e6, "span_hz": 5e5,
    "n_points": 25001, "rbw_hz": 250.0, "backgrounds": "white:1e-12",
}
RBM = {
    "detection": "direct", "kappa_hz": 20e6, "eta_c": 0.5, "detuning_hz": "optimal_slope",
    "omega_m_hz": 71.5e6, "gamma_m_hz": 5e3, "temperature_k": 300, "g0_hz": 570.0,
    "phi0_rad": 2e-3, "f_mod_hz": 71.38e6, "center_hz": 71.44e6, "span_hz": 4e5,
    "n_points": 4001, "rbw_hz": 500.0, "backgrounds": "white:3e-11",
}
# direct detection with Gamma_m = kappa/5: K is far from flat across the line
NON_FLAT = {
    "detection": "direct", "kappa_hz": 1e6, "eta_c": 0.5, "detuning_hz": "optimal_sideband",
    "omega_m_hz": 200e6, "gamma_m_hz": 2e5, "temperature_k": 300, "g0_hz": 100.0,
    "phi0_rad": 1e-3, "f_mod_hz": 202e6, "center_hz": 200.5e6, "span_hz": 6e6,
    "n_points": 6001, "rbw_hz": 5e3,
}

ALL = {**ROUND_TRIP, "nanobeam": NANOBEAM, "rbm": RBM, "non_flat": NON_FLAT}


def preset_mapping(name: str) -> dict:
    if name not in ALL:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(ALL)}")
    return dict(ALL[name])


def preset_config(name: str, **overrides):
    """SynthConfig for a named preset; keyword overrides replace config keys."""
    mapping = preset_mapping(name)
    mapping.update(overrides)
    return build_synth_config(config_from_mapping(mapping))
