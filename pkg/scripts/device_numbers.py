#!/usr/bin/env python3
"""Device reference numbers: g0 from a frequency variance of (2pi 530 kHz)^2
(nanobeam) and a configured-truth round trip for the RBM-like trace."""

import argparse
import warnings

from g0cal import units
from g0cal.analysis import extract_g0_full, extract_g0_simple, g0_from_variance
from g0cal.physics import occupation
from g0cal.presets import preset_config
from g0cal.synth import synth_trace


def nanobeam(temperature):
    omega_m = units.to_angular(8.3e6)
    var = units.to_angular(530e3) ** 2
    g0 = units.to_hz(g0_from_variance(var, omega_m, temperature))
    print(f"nanobeam: <n_m> = {occupation(omega_m, temperature):.4g} at T = {temperature:g} K")
    print(f"nanobeam: g0 = 2pi x {g0:.2f} Hz (reference 2pi x 420 Hz, {g0 / 420 - 1:+.2%})")


def round_trip(name, configured):
    cfg = preset_config(name)
    trace = synth_trace(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        simple = extract_g0_simple(trace, cfg.f_mod, cfg.phi0, cfg.analyzer, cfg.mode.temperature)
    full = extract_g0_full(trace, cfg.f_mod, cfg.phi0, cfg.analyzer, cfg.scheme, cfg.mode.temperature)
    for res in (simple, full):
        print(f"{name}: {res.method:7s} g0 = 2pi x {res.g0_hz:.3f} Hz (configured {configured} Hz, "
              f"{res.g0_hz / configured - 1:+.2e}), tone at {cfg.f_mod / 1e6:.2f} MHz")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--temperature-k", type=float, default=300.0)
    args = p.parse_args()
    nanobeam(args.temperature_k)
    round_trip("nanobeam", 420.0)
    round_trip("rbm", 570.0)


if __name__ == "__main__":
    main()
