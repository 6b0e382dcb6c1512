"""Parameter records, constants and closed-form thermal noise spectra.

Angular frequencies throughout (rad/s).  Spectral densities are double-sided
and normalised per Hz, i.e. the variance is the integral over dOmega/2pi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

# SI 2019 exact values (identical to CODATA 2018).
H_PLANCK = 6.62607015e-34  # J s
HBAR = H_PLANCK / (2.0 * math.pi)  # 1.054571817...e-34 J s
K_B = 1.380649e-23  # J/K


class ApproximationWarning(UserWarning):
    """A high-temperature approximation is off by more than 1 %."""


class RegimeWarning(UserWarning):
    """An operation is used outside the regime where it is accurate."""


@dataclass(frozen=True)
class CavityParams:
    """Optical cavity: total loss rate, coupling fraction, laser detuning.

    ``detuning`` is omega_laser - omega_cavity.  ``omega_c`` is only needed
    when a result has to be expressed relative to the optical frequency.
    """

    kappa: float
    eta_c: float
    detuning: float = 0.0
    omega_c: float | None = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not 0.0 <= self.eta_c <= 1.0:
            raise ValueError(f"eta_c must lie in [0, 1], got {self.eta_c}")

    def with_detuning(self, detuning: float) -> "CavityParams":
        return replace(self, detuning=detuning)


@dataclass(frozen=True)
class MechMode:
    """Mechanical mode, specified either by (m_eff, G) or directly by g0.

    Exactly one branch must be given.  G is the cavity frequency pull
    d(omega_c)/dx in rad/s per metre.
    """

    omega_m: float
    gamma_m: float
    temperature: float = 300.0
    m_eff: float | None = None
    G: float | None = None
    g0: float | None = None

    def __post_init__(self):
        if not self.omega_m > 0:
            raise ValueError("omega_m must be positive")
        if not self.gamma_m > 0:
            raise ValueError("gamma_m must be positive")
        if not self.temperature >= 0:
            raise ValueError("temperature must be non-negative")
        mass_branch = self.m_eff is not None or self.G is not None
        if mass_branch == (self.g0 is not None):
            raise ValueError("give either (m_eff, G) or g0, not both or neither")
        if mass_branch:
            if self.m_eff is None or self.G is None:
                raise ValueError("mass branch needs both m_eff and G")
            if not self.m_eff > 0:
                raise ValueError("m_eff must be positive")

    @property
    def has_mass(self) -> bool:
        return self.m_eff is not None

    @property
    def x_zpf(self) -> float:
        if not self.has_mass:
            raise ValueError("x_zpf needs an effective mass")
        return x_zpf(self.m_eff, self.omega_m)

    @property
    def coupling_rate(self) -> float:
        """Vacuum coupling rate g0 in rad/s, whichever branch was given."""
        if self.g0 is not None:
            return self.g0
        return self.G * self.x_zpf

    def with_mass(self, m_eff: float) -> "MechMode":
        """Same g0 expressed as (m_eff, G) for the given mass normalisation."""
        G = self.coupling_rate / x_zpf(m_eff, self.omega_m)
        return replace(self, m_eff=m_eff, G=G, g0=None)

    def without_mass(self) -> "MechMode":
        return replace(self, m_eff=None, G=None, g0=self.coupling_rate)

    def rescaled(self, alpha: float) -> "MechMode":
        """Displacement renormalised x -> alpha x, so G -> G/alpha, m -> m/alpha^2."""
        if not self.has_mass:
            return self
        return replace(self, m_eff=self.m_eff / alpha**2, G=self.G / alpha)


def x_zpf(m_eff: float, omega_m: float) -> float:
    """Zero-point displacement sqrt(hbar / (2 m_eff Omega_m)) in metres."""
    if not (m_eff > 0 and omega_m > 0):
        raise ValueError("x_zpf needs positive mass and frequency")
    return math.sqrt(HBAR / (2.0 * m_eff * omega_m))


def occupation(omega_m: float, temperature: float, exact: bool = False) -> float:
    """Thermal phonon occupation.

    The default is the high-temperature form k_B T / (hbar Omega_m); a warning
    is issued when it differs from the Bose-Einstein value by more than 1 %.
    """
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0:
        if not exact:
            warnings.warn("high-T occupation evaluated at T = 0", ApproximationWarning, stacklevel=2)
        return 0.0
    x = HBAR * omega_m / (K_B * temperature)
    bose = 1.0 / math.expm1(x)
    if exact:
        return bose
    high_t = 1.0 / x
    if abs(high_t - bose) > 0.01 * bose:
        warnings.warn(
            f"high-T occupation off by {abs(high_t / bose - 1):.1%} (hbar Omega/kT = {x:.3g})",
            ApproximationWarning,
            stacklevel=2,
        )
    return high_t


def _omega_coth(omega, temperature):
    """Omega * coth(hbar Omega / 2 k_B T) with the Omega -> 0 and T -> 0 limits."""
    omega = np.asarray(omega, dtype=float)
    if temperature == 0:
        return np.abs(omega)
    y = HBAR * omega / (2.0 * K_B * temperature)
    lim = 2.0 * K_B * temperature / HBAR
    small = np.abs(y) < 1e-6
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(small, lim * (1.0 + y**2 / 3.0), omega / np.tanh(y))
    return out


def _mass_normalised_sxx(mode: MechMode, omega, form: str):
    """m_eff * S_xx(Omega); independent of the displacement normalisation."""
    omega = np.asarray(omega, dtype=float)
    den = (omega**2 - mode.omega_m**2) ** 2 + mode.gamma_m**2 * omega**2
    if form == "high_T":
        return 2.0 * mode.gamma_m * K_B * mode.temperature / den
    if form == "exact_coth":
        return mode.gamma_m * HBAR * _omega_coth(omega, mode.temperature) / den
    raise ValueError(f"unknown form {form!r}")


def s_xx_thermal(mode: MechMode, omega, form: str = "high_T"):
    """Double-sided displacement PSD (m^2/Hz) from the fluctuation-dissipation theorem."""
    if not mode.has_mass:
        raise ValueError("S_xx needs the (m_eff, G) branch; use MechMode.with_mass")
    return _mass_normalised_sxx(mode, omega, form) / mode.m_eff


def s_ww_thermal(mode: MechMode, omega, form: str = "high_T"):
    """Double-sided cavity frequency-noise PSD (rad^2 s^-2 / Hz).

    For the mass branch this is G^2 S_xx; for the g0 branch it is written with
    G^2/m_eff = g0^2 * 2 Omega_m / hbar, so no mass is needed.
    """
    kernel = _mass_normalised_sxx(mode, omega, form)
    if mode.has_mass:
        return mode.G**2 * kernel / mode.m_eff
    return mode.g0**2 * (2.0 * mode.omega_m / HBAR) * kernel


@dataclass(frozen=True)
class VarianceIdentity:
    """Three evaluations of the cavity frequency variance <delta omega_c^2>."""

    quadrature: float
    peak_times_width: float
    occupation_form: float
    narrow: bool

    @property
    def max_rel_spread(self) -> float:
        vals = np.array([self.quadrature, self.peak_times_width, self.occupation_form])
        return float((vals.max() - vals.min()) / vals.mean())


def frequency_variance(mode: MechMode) -> VarianceIdentity:
    """Integrate S_ww over all Fourier frequencies and compare with closed forms.

    Uses the high-temperature spectrum.  The closed forms are
    S_ww(Omega_m) Gamma_m / 2 and 2 <n_m> g0^2.
    """
    narrow = mode.gamma_m < mode.omega_m / 10
    if not narrow:
        warnings.warn("frequency-variance identity assumes Gamma_m << Omega_m", RegimeWarning, stacklevel=2)
    wm, gm = mode.omega_m, mode.gamma_m
    peak = float(s_ww_thermal(mode, wm))

    # Integrate in the variable theta = arctan((Omega - Omega_m) / (Gamma_m/2)),
    # which flattens the resonance.
    def integrand(theta):
        om = wm + 0.5 * gm * math.tan(theta)
        return float(s_ww_thermal(mode, om)) * 0.5 * gm / math.cos(theta) ** 2

    lo = math.atan(-wm / (0.5 * gm))
    half, _ = integrate.quad(integrand, lo, math.pi / 2, epsabs=0.0, epsrel=1e-13, limit=400, points=[0.0])
    quad = 2.0 * half / (2.0 * math.pi)  # even in Omega; measure dOmega / 2pi
    n_m = occupation(wm, mode.temperature)
    return VarianceIdentity(
        quadrature=quad,
        peak_times_width=peak * gm / 2.0,
        occupation_form=2.0 * n_m * mode.coupling_rate**2,
        narrow=narrow,
    )
