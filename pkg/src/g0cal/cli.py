"""Command-line interface: synth, analyze, transduction, modeshift, selftest.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import __version__, units
from .analysis import FitError, MaskedBinError, ToneError, extract_g0_full, extract_g0_simple, frequency_noise_view
from .files import (
    KEYS,
    ConfigError,
    RunConfig,
    build_analyzer,
    build_scheme,
    build_synth_config,
    config_from_mapping,
    read_config,
    read_spectrum,
    write_spectrum,
)
from .spectrum import Spectrum, SpectrumUnit
from .synth import synth_trace

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, stage: str, message: str, code: int):
        super().__init__(f"{stage}: {message}")
        self.code = code


def _emit(lines, stream=None):
    stream = stream or sys.stdout
    for line in lines:
        print(line, file=stream)


# -- synth ------------------------------------------------------------------------

def cmd_synth(args) -> int:
    try:
        if args.preset:
            from .presets import preset_mapping

            mapping = preset_mapping(args.preset)
            if args.config:
                raise ConfigError("give either --config or --preset")
            cfg = config_from_mapping(mapping)
        elif args.config:
            cfg = read_config(args.config)
        else:
            raise ConfigError("synth needs --config or --preset")
        if args.seed is not None or args.n_avg is not None:
            values = dict(cfg.values)
            if args.seed is not None:
                values["seed"] = str(args.seed)
            if args.n_avg is not None:
                values["n_avg"] = str(args.n_avg)
            cfg = RunConfig(values, dict(cfg.lines))
        config = build_synth_config(cfg)
    except KeyError as exc:
        raise CliError("config", str(exc.args[0]), EXIT_CONFIG) from None
    except ConfigError as exc:
        raise CliError("config", str(exc), EXIT_CONFIG) from None
    except OSError as exc:
        raise CliError("io", str(exc), EXIT_IO) from None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        trace = synth_trace(config)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    meta = {"tool": "g0cal synth", "version": __version__}
    try:
        write_spectrum(trace, args.out, meta)
    except OSError as exc:
        raise CliError("io", str(exc), EXIT_IO) from None
    print(f"wrote {len(trace)} points to {args.out}")
    return EXIT_OK


# -- analyze -------------------------------------------------------------------------

_FLAG_KEYS = {
    "f_mod_hz": "f_mod_hz", "phi0_rad": "phi0_rad", "kappa_hz": "kappa_hz", "eta_c": "eta_c",
    "detuning_hz": "detuning_hz", "detection": "detection", "lo_power_ratio": "lo_power_ratio",
    "temperature_k": "temperature_k", "rbw_hz": "rbw_hz", "window": "window", "omega_m_hz": "omega_m_hz",
}


def _analysis_config(args, trace: Spectrum) -> RunConfig:
    """Trace metadata first, then --config, then explicit flags."""
    values = {k: v for k, v in trace.meta.items() if k in KEYS}
    if args.config:
        values.update(read_config(args.config).values)
    for attr, key in _FLAG_KEYS.items():
        v = getattr(args, attr)
        if v is not None:
            values[key] = str(v)
    return RunConfig(values, {})


def _need(cfg: RunConfig, key: str) -> float:
    raw = cfg.get(key)
    if raw is None:
        raise ConfigError(f"missing {key!r}: not in the trace metadata, pass --{key.replace('_', '-')}")
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key!r}: cannot parse {raw!r}") from None


def cmd_analyze(args) -> int:
    try:
        trace = read_spectrum(args.trace)
    except (OSError, ValueError) as exc:
        raise CliError("io", str(exc), EXIT_IO) from None
    try:
        cfg = _analysis_config(args, trace)
        f_mod = _need(cfg, "f_mod_hz")
        phi0 = _need(cfg, "phi0_rad")
        temperature = float(cfg.get("temperature_k", "300"))
        analyzer = build_analyzer(cfg) if cfg.get("rbw_hz") else None
        if analyzer is None:
            raise ConfigError("missing 'rbw_hz' (analyzer ENBW)")
        scheme = None
        if args.method == "full" or args.view_out:
            scheme = build_scheme(cfg)
        window = tuple(float(x) for x in args.fit_window.split(",")) if args.fit_window else None
        if window is not None and len(window) != 2:
            raise ConfigError("--fit-window takes 'lo,hi' in Hz")
    except OSError as exc:
        raise CliError("io", str(exc), EXIT_IO) from None
    except ValueError as exc:  # ConfigError included
        raise CliError("config", str(exc), EXIT_CONFIG) from None

    kwargs = dict(temperature=temperature, window=window, power_law=args.power_law,
                  exponent="free" if args.power_law_exponent is None else args.power_law_exponent)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            if args.method == "simple":
                result = extract_g0_simple(trace, f_mod, phi0, analyzer, **kwargs)
            else:
                result = extract_g0_full(trace, f_mod, phi0, analyzer, scheme, **kwargs)
        except ToneError as exc:
            raise CliError("tone", str(exc), EXIT_NUMERIC) from None
        except MaskedBinError as exc:
            raise CliError("transduction", str(exc), EXIT_NUMERIC) from None
        except FitError as exc:
            raise CliError("fit", str(exc), EXIT_NUMERIC) from None
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise CliError("fit", str(exc), EXIT_NUMERIC) from None
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)

    lines = [f"# g0cal {__version__} analyze"]
    lines += [f"input_trace = {args.trace}"]
    lines += [f"input_{k} = {v}" for k, v in sorted(cfg.values.items())]
    lines += result.report_lines()
    _emit(lines)
    if args.view_out:
        view = frequency_noise_view(trace, f_mod, phi0, result.tone_area, scheme, SpectrumUnit.FREQ_NOISE_HZ)
        try:
            write_spectrum(view, args.view_out, {"tool": "g0cal analyze", "version": __version__})
        except OSError as exc:
            raise CliError("io", str(exc), EXIT_IO) from None
    return EXIT_OK


# -- transduction -------------------------------------------------------------------

def cmd_transduction(args) -> int:
    from .physics import CavityParams
    from .transduction import DetectionScheme

    try:
        kappa = units.to_angular(args.kappa_hz)
        cavity = CavityParams(kappa, args.eta_c, units.to_angular(args.detuning_hz))
        scheme = DetectionScheme(args.detection, cavity)
        if not 0 < args.f_start_hz < args.f_stop_hz or args.n_points < 2:
            raise ValueError("need 0 < f_start < f_stop and n_points >= 2")
    except ValueError as exc:
        raise CliError("config", str(exc), EXIT_CONFIG) from None
    f = np.geomspace(args.f_start_hz, args.f_stop_hz, args.n_points)
    k = scheme.k(units.to_angular(f))
    rows = ["# detection = " + args.detection, f"# kappa_hz = {args.kappa_hz!r}", f"# eta_c = {args.eta_c!r}",
            f"# detuning_hz = {args.detuning_hz!r}", "frequency_hz,k"]
    rows += [f"{a:.17g},{b:.17g}" for a, b in zip(f, k)]
    text = "\n".join(rows) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise CliError("io", str(exc), EXIT_IO) from None
        print(f"wrote {args.n_points} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- modeshift ------------------------------------------------------------------------

def cmd_modeshift(args) -> int:
    from .modeshift import PRESETS, REFINEMENTS, NonlinearityError, OpenDomainError, run_preset

    names = sorted(PRESETS) if args.preset == "all" else [args.preset]
    try:
        for name in names:
            ladder = REFINEMENTS[name] if args.n_cells is None else (args.n_cells,)
            for n in ladder:
                r = run_preset(name, n, variant=args.variant)
                print(f"{name} n_cells = {n} G = {r.G:.10g} G_ref = {r.G_reference:.10g} ratio = {r.ratio:.6f}")
    except (OpenDomainError, NonlinearityError) as exc:
        raise CliError("modeshift", str(exc), EXIT_NUMERIC) from None
    return EXIT_OK


# -- selftest ------------------------------------------------------------------------

def cmd_selftest(args) -> int:
    from .field_response import oracle_sweep

    worst = oracle_sweep(args.n_tuples, args.seed)
    ok = True
    for key in sorted(worst):
        passed = worst[key] < args.tolerance
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {key} max_rel_error = {worst[key]:.3e}")
    overall = max(worst.values())
    print(f"{'PASS' if ok else 'FAIL'} oracle equivalence over {args.n_tuples} tuples: max {overall:.3e} "
          f"(tolerance {args.tolerance:g})")
    return EXIT_OK if ok else EXIT_NUMERIC


# -- entry point -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="g0cal", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"g0cal {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesize an analyzer trace")
    s.add_argument("--config", help="flat key = value config file")
    s.add_argument("--preset", help="named preset instead of a config file")
    s.add_argument("--out", required=True, help="output spectrum CSV")
    s.add_argument("--seed", type=int, help="override the noise seed")
    s.add_argument("--n-avg", type=int, help="override the number of averages")
    s.set_defaults(func=cmd_synth)

    a = sub.add_parser("analyze", help="extract g0 from a trace")
    a.add_argument("--trace", required=True)
    a.add_argument("--config", help="config file supplying missing parameters")
    a.add_argument("--method", choices=("simple", "full"), default="full")
    a.add_argument("--f-mod-hz", type=float)
    a.add_argument("--phi0-rad", type=float)
    a.add_argument("--rbw-hz", type=float, help="analyzer ENBW")
    a.add_argument("--window")
    a.add_argument("--temperature-k", type=float)
    a.add_argument("--detection", choices=("direct", "homodyne"))
    a.add_argument("--kappa-hz", type=float)
    a.add_argument("--eta-c", type=float)
    a.add_argument("--detuning-hz", help="Hz, or optimal / optimal_slope / optimal_sideband")
    a.add_argument("--omega-m-hz", type=float, help="only needed for an optimal detuning keyword")
    a.add_argument("--lo-power-ratio", type=float)
    a.add_argument("--fit-window", help="lo,hi in Hz")
    a.add_argument("--power-law", action="store_true", help="add a power-law background term")
    a.add_argument("--power-law-exponent", type=float, help="fix the exponent (free by default)")
    a.add_argument("--view-out", help="write the frequency-noise view (Hz^2/Hz) to this CSV")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("transduction", help="tabulate K(Omega)")
    t.add_argument("--detection", choices=("direct", "homodyne"), default="homodyne")
    t.add_argument("--kappa-hz", type=float, required=True)
    t.add_argument("--eta-c", type=float, default=0.5)
    t.add_argument("--detuning-hz", type=float, default=0.0)
    t.add_argument("--f-start-hz", type=float, default=None)
    t.add_argument("--f-stop-hz", type=float, default=None)
    t.add_argument("--n-points", type=int, default=201)
    t.add_argument("--out")
    t.set_defaults(func=cmd_transduction)

    m = sub.add_parser("modeshift", help="G from perturbation theory for a preset geometry")
    m.add_argument("--preset", choices=("fabry_perot", "wgm_ring", "all"), default="all")
    m.add_argument("--n-cells", type=int, help="single grid instead of the refinement ladder")
    m.add_argument("--variant", choices=("advected", "linearized"), default="advected")
    m.set_defaults(func=cmd_modeshift)

    st = sub.add_parser("selftest", help="sideband oracle against the closed-form K")
    st.add_argument("--n-tuples", type=int, default=1000)
    st.add_argument("--seed", type=int, default=1)
    st.add_argument("--tolerance", type=float, default=1e-9)
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "transduction":
        args.f_start_hz = args.f_start_hz or 1e-3 * args.kappa_hz
        args.f_stop_hz = args.f_stop_hz or 1e3 * args.kappa_hz
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
