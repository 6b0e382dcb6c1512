#!/usr/bin/env python3
"""Write device-style traces and their frequency-noise views as CSV.

For each preset: the synthesized analyzer trace, and the tone-calibrated
S_nu_nu (Hz^2/Hz) with the fitted Lorentzian alongside.
"""

import argparse
import csv
from pathlib import Path

from g0cal.analysis import extract_g0_full, frequency_noise_view
from g0cal.files import write_spectrum
from g0cal.presets import ALL, preset_config
from g0cal.spectrum import SpectrumUnit
from g0cal.synth import synth_trace
from g0cal import units


def export(name, outdir, seed, n_avg):
    cfg = preset_config(name, seed=seed, n_avg=n_avg)
    trace = synth_trace(cfg)
    write_spectrum(trace, outdir / f"{name}_trace.csv")
    res = extract_g0_full(trace, cfg.f_mod, cfg.phi0, cfg.analyzer, cfg.scheme, cfg.mode.temperature)
    view = frequency_noise_view(trace, cfg.f_mod, cfg.phi0, res.tone_area, cfg.scheme, SpectrumUnit.FREQ_NOISE_HZ)
    fit = units.freq_noise_to_hz2(res.fit.evaluate(view.freqs))
    with open(outdir / f"{name}_view.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frequency_hz", "s_nu_nu_hz2_per_hz", "fit_hz2_per_hz"])
        for row in zip(view.freqs, view.values, fit):
            w.writerow([f"{v:.12g}" for v in row])
    print(f"{name}: g0 = 2pi x {res.g0_hz:.2f} +- {units.to_hz(res.g0_stderr):.2f} Hz, "
          f"delta nu rms = {units.to_hz(res.delta_omega_sq ** 0.5) / 1e3:.1f} kHz")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default="traces_out")
    p.add_argument("--presets", nargs="+", default=["nanobeam", "rbm"], choices=sorted(ALL))
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--n-avg", type=int, default=100)
    args = p.parse_args()
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name in args.presets:
        export(name, outdir, args.seed, args.n_avg)


if __name__ == "__main__":
    main()
