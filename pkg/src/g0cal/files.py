"""Flat key-value run configs and the spectrum CSV format.

Config files hold ``key = value`` lines with ``#`` comments.  Physical keys
are in ordinary frequency and carry their unit in the name.

Spectrum CSV: ``# key = value`` metadata lines, one header row
``frequency_hz,psd`` and one row per bin, numbers written with %.17g so a
round trip through the file is exact.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import units
from .physics import CavityParams, MechMode
from .specest import AnalyzerModel, Window
from .spectrum import Spectrum, SpectrumUnit
from .synth import BackgroundTerm, FrequencyGrid, NoiseRealization, SynthConfig
from .transduction import DetectionScheme, optimal_detuning_direct

CSV_HEADER = "frequency_hz,psd"

# key -> (kind, default); a default of None means "no default"
KEYS = {
    "kappa_hz": ("float", None),
    "eta_c": ("float", None),
    "detuning_hz": ("detuning", "0"),
    "omega_m_hz": ("float", None),
    "gamma_m_hz": ("float", None),
    "temperature_k": ("float", "300"),
    "g0_hz": ("float", None),
    "meff_kg": ("float", None),
    "g_hz_per_m": ("float", None),
    "phi0_rad": ("float", None),
    "f_mod_hz": ("float", None),
    "window": ("str", "gaussian"),
    "rbw_hz": ("float", None),
    "span_hz": ("float", None),
    "center_hz": ("float", None),
    "n_points": ("int", None),
    "detection": ("str", "homodyne"),
    "lo_power_ratio": ("float", "1"),
    "p_in": ("float", "1"),
    "backgrounds": ("str", ""),
    "seed": ("int", None),
    "n_avg": ("int", None),
    "thermal_form": ("str", "high_T"),
}
REQUIRED = ("kappa_hz", "eta_c", "omega_m_hz", "gamma_m_hz", "phi0_rad", "f_mod_hz", "rbw_hz", "span_hz", "n_points")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Parsed config: raw string values plus the line each key came from."""

    values: dict[str, str]
    lines: dict[str, int]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def echo(self) -> list[tuple[str, str]]:
        return [(k, self.values[k]) for k in KEYS if k in self.values]


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: key {key!r} repeated (first on line {lines[key]})")
        values[key], lines[key] = value, lineno
    return RunConfig(values, lines)


def read_config(path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))


def config_from_mapping(mapping: dict) -> RunConfig:
    values = {k: str(v) for k, v in mapping.items()}
    for k in values:
        if k not in KEYS:
            raise ConfigError(f"unknown key {k!r}")
    return RunConfig(values, {k: 0 for k in values})


def _value(cfg: RunConfig, key: str):
    kind, default = KEYS[key]
    raw = cfg.values.get(key, default)
    if raw is None:
        return None
    where = f"line {cfg.lines[key]}" if cfg.lines.get(key) else "default"
    try:
        if kind == "float":
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError
            return v
        if kind == "int":
            return int(raw)
    except ValueError:
        raise ConfigError(f"key {key!r} ({where}): cannot parse {raw!r} as {kind}") from None
    return raw


def parse_backgrounds(text: str) -> tuple[BackgroundTerm, ...]:
    """``white:<level>[@domain]`` or ``power_law:<amp>:<exponent>[@domain]``, comma separated.

    domain is ``signal`` (default) or ``freq`` for Hz^2/Hz frequency noise.
    """
    terms = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        body, _, domain = item.partition("@")
        domain = {"": "signal", "signal": "signal", "freq": "frequency_noise"}.get(domain.strip())
        if domain is None:
            raise ConfigError(f"background {item!r}: domain must be 'signal' or 'freq'")
        parts = [p.strip() for p in body.split(":")]
        try:
            if parts[0] == "white" and len(parts) == 2:
                terms.append(BackgroundTerm("white", float(parts[1]), domain=domain))
            elif parts[0] == "power_law" and len(parts) == 3:
                terms.append(BackgroundTerm("power_law", float(parts[1]), float(parts[2]), domain=domain))
            else:
                raise ConfigError(f"background {item!r}: expected white:<level> or power_law:<amp>:<exp>")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"background {item!r}: {exc}") from None
    return tuple(terms)


def resolve_detuning(raw: str, kappa: float, eta_c: float, omega_m: float) -> float:
    """Detuning in rad/s from a number (Hz) or an ``optimal[_slope|_sideband]`` keyword."""
    raw = raw.strip().lower()
    if raw.startswith("optimal"):
        branches = {o.branch: o.detuning for o in optimal_detuning_direct(kappa, eta_c, omega_m)}
        want = raw.partition("_")[2] or None
        if want is None:
            return branches.get("slope", branches.get("single"))
        if want not in branches:
            raise ConfigError(f"detuning branch {want!r} does not exist here; available: {sorted(branches)}")
        return branches[want]
    try:
        return units.to_angular(float(raw))
    except ValueError:
        raise ConfigError(f"detuning_hz: cannot parse {raw!r}") from None


def build_mode(cfg: RunConfig) -> MechMode:
    omega_m = units.to_angular(_value(cfg, "omega_m_hz"))
    gamma_m = units.to_angular(_value(cfg, "gamma_m_hz"))
    temperature = _value(cfg, "temperature_k")
    g0, meff, g_pull = (_value(cfg, k) for k in ("g0_hz", "meff_kg", "g_hz_per_m"))
    if g0 is not None and (meff is not None or g_pull is not None):
        raise ConfigError("give either g0_hz or meff_kg + g_hz_per_m, not both")
    if g0 is not None:
        return MechMode(omega_m, gamma_m, temperature, g0=units.to_angular(g0))
    if meff is None or g_pull is None:
        raise ConfigError("missing coupling: give g0_hz or meff_kg + g_hz_per_m")
    return MechMode(omega_m, gamma_m, temperature, m_eff=meff, G=units.to_angular(g_pull))


def build_scheme(cfg: RunConfig, omega_m: float | None = None) -> DetectionScheme:
    for key in ("kappa_hz", "eta_c"):
        if _value(cfg, key) is None:
            raise ConfigError(f"missing required key {key!r}")
    kappa = units.to_angular(_value(cfg, "kappa_hz"))
    eta_c = _value(cfg, "eta_c")
    if omega_m is None and _value(cfg, "omega_m_hz") is not None:
        omega_m = units.to_angular(_value(cfg, "omega_m_hz"))
    raw = _value(cfg, "detuning_hz")
    if raw.strip().lower().startswith("optimal") and omega_m is None:
        raise ConfigError("optimal detuning needs omega_m_hz")
    detuning = resolve_detuning(raw, kappa, eta_c, omega_m or 0.0)
    return DetectionScheme(_value(cfg, "detection"), CavityParams(kappa, eta_c, detuning), _value(cfg, "lo_power_ratio"))


def build_analyzer(cfg: RunConfig) -> AnalyzerModel:
    """``window = gaussian`` takes its width from rbw_hz (the ENBW)."""
    enbw = _value(cfg, "rbw_hz")
    text = _value(cfg, "window").strip().lower()
    if text == "gaussian":
        return AnalyzerModel.gaussian(enbw)
    window = Window.parse(text)
    if window.kind == "gaussian":
        return AnalyzerModel(window, enbw)
    return AnalyzerModel.from_window(window, enbw)


def build_synth_config(cfg: RunConfig) -> SynthConfig:
    """Turn a parsed run config into a SynthConfig; every error is a ConfigError."""
    missing = [k for k in REQUIRED if _value(cfg, k) is None]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    try:
        mode = build_mode(cfg)
        scheme = build_scheme(cfg, mode.omega_m)
        analyzer = build_analyzer(cfg)
        span, n = _value(cfg, "span_hz"), _value(cfg, "n_points")
        center = _value(cfg, "center_hz")
        if center is None:
            center = 0.5 * (_value(cfg, "omega_m_hz") + _value(cfg, "f_mod_hz"))
        grid = FrequencyGrid.centered(center, span, n)
        seed, n_avg = _value(cfg, "seed"), _value(cfg, "n_avg")
        if (seed is None) != (n_avg is None):
            raise ConfigError("seed and n_avg go together")
        noise = None if seed is None else NoiseRealization(seed, n_avg)
        return SynthConfig(
            mode=mode, scheme=scheme, phi0=_value(cfg, "phi0_rad"),
            omega_mod=units.to_angular(_value(cfg, "f_mod_hz")), analyzer=analyzer, grid=grid,
            backgrounds=parse_backgrounds(_value(cfg, "backgrounds")), noise=noise,
            p_in=_value(cfg, "p_in"), thermal_form=_value(cfg, "thermal_form"),
            meta={k: v for k, v in cfg.echo()},
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def format_config(mapping: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in mapping.items())


# -- spectrum CSV -----------------------------------------------------------------

def write_spectrum(spectrum: Spectrum, path, extra_meta: dict | None = None):
    """Write the CSV; metadata keys are written in sorted order for byte stability."""
    meta = dict(spectrum.meta)
    meta.update({k: str(v) for k, v in (extra_meta or {}).items()})
    meta["unit"] = spectrum.unit.value
    meta["sidedness"] = spectrum.sidedness
    buf = io.StringIO()
    for key in sorted(meta):
        value = str(meta[key]).replace("\n", " ")
        buf.write(f"# {key} = {value}\n")
    buf.write(CSV_HEADER + "\n")
    for f, v in zip(spectrum.freqs, spectrum.values):
        buf.write(f"{f:.17g},{v:.17g}\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="\n")


def read_spectrum(path) -> Spectrum:
    """Read the CSV format; raises ValueError naming the line on violations."""
    text = Path(path).read_text(encoding="utf-8")
    meta, rows, header_seen = {}, [], False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                meta[key.strip()] = value.strip()
            continue
        if not header_seen:
            if line.replace(" ", "") != CSV_HEADER:
                raise ValueError(f"{path}:{lineno}: expected header {CSV_HEADER!r}, got {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected two columns")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not header_seen:
        raise ValueError(f"{path}: missing header {CSV_HEADER!r}")
    if len(rows) < 2:
        raise ValueError(f"{path}: fewer than two data rows")
    data = np.array(rows)
    unit = meta.pop("unit", SpectrumUnit.SIGNAL.value)
    side = meta.pop("sidedness", "single")
    return Spectrum(data[:, 0], data[:, 1], side, SpectrumUnit(unit), meta)
