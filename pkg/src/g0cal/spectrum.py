"""Sampled spectral densities with an explicit sidedness and unit tag."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import units


class SpectrumUnit(str, Enum):
    FREQ_NOISE_HZ = "Hz^2/Hz"
    FREQ_NOISE_RAD = "rad^2 s^-2/Hz"
    PHASE = "rad^2/Hz"
    DISPLACEMENT = "m^2/Hz"
    SIGNAL = "signal^2/Hz"
    DIMENSIONLESS = "1"


_SIDES = ("single", "double")


@dataclass
class Spectrum:
    """Power spectral density sampled on a strictly increasing grid (Hz).

    ``sidedness`` is ``"single"`` (positive frequencies, twice the
    double-sided density) or ``"double"`` (symmetric over +-f).  A zero-frequency
    bin is never doubled.
    """

    freqs: np.ndarray
    values: np.ndarray
    sidedness: str = "single"
    unit: SpectrumUnit = SpectrumUnit.SIGNAL
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.unit = SpectrumUnit(self.unit)
        if self.freqs.ndim != 1 or self.freqs.shape != self.values.shape:
            raise ValueError("freqs and values must be 1-D arrays of equal length")
        if self.freqs.size and np.any(np.diff(self.freqs) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        if self.sidedness not in _SIDES:
            raise ValueError(f"sidedness must be one of {_SIDES}, got {self.sidedness!r}")

    def __len__(self):
        return self.freqs.size

    @property
    def step(self) -> float:
        """Median grid step in Hz."""
        return float(np.median(np.diff(self.freqs)))

    def with_values(self, values, unit=None, **meta) -> "Spectrum":
        return replace(
            self,
            values=np.asarray(values, dtype=float),
            unit=self.unit if unit is None else unit,
            meta={**self.meta, **{k: str(v) for k, v in meta.items()}},
        )

    def select(self, lo: float, hi: float) -> "Spectrum":
        """Restrict to lo <= f <= hi."""
        keep = (self.freqs >= lo) & (self.freqs <= hi)
        return replace(self, freqs=self.freqs[keep], values=self.values[keep], meta=dict(self.meta))

    def to_double(self) -> "Spectrum":
        if self.sidedness == "double":
            return replace(self, meta=dict(self.meta))
        if self.freqs[0] < 0:
            raise ValueError("single-sided spectrum has negative frequencies")
        pos = self.freqs > 0
        half = self.values[pos] / 2.0
        dc_f = self.freqs[~pos]
        dc_v = self.values[~pos]
        freqs = np.concatenate([-self.freqs[pos][::-1], dc_f, self.freqs[pos]])
        values = np.concatenate([half[::-1], dc_v, half])
        return Spectrum(freqs, values, "double", self.unit, dict(self.meta))

    def to_single(self) -> "Spectrum":
        if self.sidedness == "single":
            return replace(self, meta=dict(self.meta))
        keep = self.freqs >= 0
        freqs = self.freqs[keep]
        values = np.where(freqs > 0, 2.0 * self.values[keep], self.values[keep])
        return Spectrum(freqs, values, "single", self.unit, dict(self.meta))

    def convert(self, unit: SpectrumUnit) -> "Spectrum":
        """Convert between the two frequency-noise units."""
        unit = SpectrumUnit(unit)
        if unit == self.unit:
            return self.with_values(self.values.copy())
        pair = (self.unit, unit)
        if pair == (SpectrumUnit.FREQ_NOISE_RAD, SpectrumUnit.FREQ_NOISE_HZ):
            return self.with_values(units.freq_noise_to_hz2(self.values), unit)
        if pair == (SpectrumUnit.FREQ_NOISE_HZ, SpectrumUnit.FREQ_NOISE_RAD):
            return self.with_values(units.freq_noise_to_rad2(self.values), unit)
        raise ValueError(f"no conversion from {self.unit.value} to {unit.value}")

    def integrate(self) -> float:
        """Rectangle-rule integral over the grid (density * Hz)."""
        if len(self) < 2:
            return 0.0
        widths = np.gradient(self.freqs)
        return float(np.sum(self.values * widths))
