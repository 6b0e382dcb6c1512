"""Forward model of the analyzer trace.

The single-sided detector PSD is

    S_II(f) = P [2 K(Omega) S_ww(Omega) / Omega^2
                 + (phi0^2 / 2) K(Omega_mod) (F(f - f_mod) + F(f + f_mod))]
              + backgrounds

with S_ww double-sided, Omega = 2 pi f, and P the optical power factor of the
detection scheme.  The thermal continuum is not convolved with the filter,
which assumes ENBW much narrower than every feature of S_ww.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import units
from .physics import MechMode, RegimeWarning, s_ww_thermal
from .specest import AnalyzerModel, convolve_tone
from .spectrum import Spectrum, SpectrumUnit
from .transduction import DetectionScheme


@dataclass(frozen=True)
class BackgroundTerm:
    """Additive background.

    ``domain="signal"`` terms are in trace units and are added after
    transduction (shot noise).  ``domain="frequency_noise"`` terms are a
    single-sided S_nu_nu in Hz^2/Hz and are transduced like the mechanical
    signal (thermorefractive noise).  The power law is
    amplitude * (f / f_ref) ** exponent.
    """

    kind: str
    level: float
    exponent: float = 0.0
    domain: str = "signal"
    f_ref_hz: float = 1e6

    def __post_init__(self):
        if self.kind not in ("white", "power_law"):
            raise ValueError(f"unknown background kind {self.kind!r}")
        if self.domain not in ("signal", "frequency_noise"):
            raise ValueError(f"unknown background domain {self.domain!r}")
        if self.level < 0:
            raise ValueError("background level must be non-negative")

    def evaluate(self, f_hz) -> np.ndarray:
        f_hz = np.asarray(f_hz, dtype=float)
        if self.kind == "white":
            return np.full_like(f_hz, self.level)
        return self.level * (f_hz / self.f_ref_hz) ** self.exponent


@dataclass(frozen=True)
class FrequencyGrid:
    start_hz: float
    stop_hz: float
    n_points: int

    def __post_init__(self):
        if not 0 < self.start_hz < self.stop_hz:
            raise ValueError("grid needs 0 < start < stop")
        if self.n_points < 2:
            raise ValueError("grid needs at least two points")

    @classmethod
    def centered(cls, center_hz: float, span_hz: float, n_points: int) -> "FrequencyGrid":
        return cls(center_hz - span_hz / 2, center_hz + span_hz / 2, n_points)

    @property
    def freqs(self) -> np.ndarray:
        return np.linspace(self.start_hz, self.stop_hz, self.n_points)

    @property
    def step(self) -> float:
        return (self.stop_hz - self.start_hz) / (self.n_points - 1)


@dataclass(frozen=True)
class NoiseRealization:
    """Power-averaged periodogram scatter: each bin times Gamma(n_avg, 1/n_avg).

    Streams come from numpy's counter-based Philox generator keyed by ``seed``.
    """

    seed: int
    n_avg: int

    def __post_init__(self):
        if self.n_avg < 1:
            raise ValueError("n_avg must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def factors(self, n: int) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(self.seed))
        return rng.gamma(self.n_avg, 1.0 / self.n_avg, size=n)


@dataclass(frozen=True)
class SynthConfig:
    mode: MechMode
    scheme: DetectionScheme
    phi0: float
    omega_mod: float
    analyzer: AnalyzerModel
    grid: FrequencyGrid
    backgrounds: tuple[BackgroundTerm, ...] = ()
    noise: NoiseRealization | None = None
    p_in: float = 1.0
    thermal_form: str = "high_T"
    meta: dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0 <= self.phi0 < 0.1:
            raise ValueError(f"phi0 = {self.phi0} is outside the linear regime [0, 0.1)")
        f_mod = units.to_hz(self.omega_mod)
        if not self.grid.start_hz <= f_mod <= self.grid.stop_hz:
            raise ValueError(f"modulation frequency {f_mod} Hz is outside the analyzer grid")
        if not self.p_in > 0:
            raise ValueError("p_in must be positive")
        clearance = 3 * max(self.mode.gamma_m, units.to_angular(self.analyzer.enbw))
        if abs(self.omega_mod - self.mode.omega_m) < clearance:
            warnings.warn("calibration tone overlaps the mechanical peak", RegimeWarning, stacklevel=2)

    @property
    def cavity(self):
        return self.scheme.cavity

    @property
    def f_mod(self) -> float:
        return units.to_hz(self.omega_mod)

    @property
    def power(self) -> float:
        return self.scheme.power_scale(self.p_in)


def _transduced(scheme: DetectionScheme, freqs, s_ww_single):
    """Single-sided rad^2 s^-2/Hz frequency noise -> K S_psipsi (per unit power)."""
    omega = units.to_angular(freqs)
    return scheme.k(omega) / omega**2 * s_ww_single


def noiseless_parts(config: SynthConfig) -> dict[str, np.ndarray]:
    """The individual contributions to the trace, in trace units."""
    f = config.grid.freqs
    omega = units.to_angular(f)
    p = config.power
    mech = p * _transduced(config.scheme, f, 2.0 * s_ww_thermal(config.mode, omega, config.thermal_form))
    tone_weight = p * 0.5 * config.phi0**2 * float(config.scheme.k(config.omega_mod))
    blank = Spectrum(f, np.zeros_like(f), "single", SpectrumUnit.SIGNAL)
    tone = convolve_tone(blank, config.f_mod, tone_weight, config.analyzer).values
    bg_signal = np.zeros_like(f)
    bg_freq = np.zeros_like(f)
    for term in config.backgrounds:
        if term.domain == "signal":
            bg_signal += term.evaluate(f)
        else:
            bg_freq += p * _transduced(config.scheme, f, units.freq_noise_to_rad2(term.evaluate(f)))
    return {"mechanical": mech, "tone": tone, "background_signal": bg_signal, "background_frequency": bg_freq}


def synth_trace(config: SynthConfig) -> Spectrum:
    """Single-sided detector PSD as an analyzer would display it."""
    if config.scheme.degenerate:
        warnings.warn("direct detection at zero detuning transduces no frequency noise", RegimeWarning, stacklevel=2)
    parts = noiseless_parts(config)
    values = sum(parts.values())
    if config.noise is not None:
        values = values * config.noise.factors(values.size)
    meta = dict(config.meta)
    meta.setdefault("enbw_hz", repr(config.analyzer.enbw))
    return Spectrum(config.grid.freqs, values, "single", SpectrumUnit.SIGNAL, meta)


def to_frequency_noise(trace: Spectrum, scheme: DetectionScheme, power: float,
                       unit: SpectrumUnit = SpectrumUnit.FREQ_NOISE_RAD) -> Spectrum:
    """Divide a detector trace by P K(Omega) / Omega^2.

    Bins where K vanishes are set to NaN and counted in meta["masked_bins"].
    """
    omega = units.to_angular(trace.freqs)
    gain = power * scheme.k(omega) / omega**2
    masked = ~(gain > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(masked, np.nan, trace.values / np.where(masked, 1.0, gain))
    view = trace.with_values(values, SpectrumUnit.FREQ_NOISE_RAD, masked_bins=int(masked.sum()))
    return view.convert(unit)


def synth_frequency_noise_view(config: SynthConfig, unit: SpectrumUnit = SpectrumUnit.FREQ_NOISE_HZ) -> Spectrum:
    """The synthesized trace expressed as single-sided cavity frequency noise."""
    return to_frequency_noise(synth_trace(config), config.scheme, config.power, unit)


def default_modulation_frequency(mode: MechMode, analyzer: AnalyzerModel, kappa: float) -> float:
    """Tone placement 20 max(Gamma_m, ENBW) above Omega_m, capped at kappa/10 away."""
    offset = min(20 * max(mode.gamma_m, units.to_angular(analyzer.enbw)), kappa / 10)
    return mode.omega_m + offset


__all__ = [
    "BackgroundTerm",
    "FrequencyGrid",
    "NoiseRealization",
    "SynthConfig",
    "noiseless_parts",
    "synth_trace",
    "synth_frequency_noise_view",
    "to_frequency_noise",
    "default_modulation_frequency",
]
