"""Closed-form transduction functions K(Omega).

K converts a phase-noise PSD at the cavity into a detected-signal PSD and is
normalised by the optical powers: S_PP / (P_in^2 S_psipsi) for direct
detection and S_HH / (P_in P_LO S_psipsi) for balanced homodyne detection.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .physics import CavityParams, RegimeWarning

# Tolerances selecting the analytic limit of K_H at eta_c = 1/2, Delta = 0.
_ETA_HALF_TOL = 1e-9
_DELTA_ZERO_TOL = 1e-9


def k_direct(cavity: CavityParams, omega):
    """Direct-detection transduction K_D(Omega); vanishes at zero detuning."""
    w = np.asarray(omega, dtype=float)
    k, e, d = cavity.kappa, cavity.eta_c, cavity.detuning
    q = k**2 / 4
    num = 4 * e**2 * k**2 * d**2 * w**2 * (w**2 + k**2 * (1 - e) ** 2)
    den = ((w + d) ** 2 + q) * ((w - d) ** 2 + q) * (d**2 + q) ** 2
    return num / den


def k_homodyne_resonant(eta_c: float, kappa: float, omega):
    """K_H at zero detuning: 16 eta_c^2 Omega^2 / (Omega^2 + kappa^2/4)."""
    w = np.asarray(omega, dtype=float)
    return 16 * eta_c**2 * w**2 / (w**2 + kappa**2 / 4)


def k_homodyne(cavity: CavityParams, omega):
    """Balanced-homodyne transduction K_H(Omega) with a d.c.-locked LO phase."""
    k, e, d = cavity.kappa, cavity.eta_c, cavity.detuning
    if abs(e - 0.5) < _ETA_HALF_TOL and abs(d) < _DELTA_ZERO_TOL * k:
        # (1 - 2 eta_c) factors cancel only symbolically here
        return k_homodyne_resonant(e, k, omega)
    w = np.asarray(omega, dtype=float)
    q = k**2 / 4
    a = 1 - 2 * e
    num = 4 * k**2 * e**2 * w**2 * (w**2 * a**2 * q + (d**2 - a * q) ** 2)
    den = ((d - w) ** 2 + q) * ((d + w) ** 2 + q) * (d**2 + a**2 * q) * (d**2 + q)
    return num / den


def k_homodyne_rsb(cavity: CavityParams) -> float:
    """Resolved-sideband approximation of K_H at Omega = |Delta| = Omega_m.

    4 eta_c^2 (1 + kappa^2 (16 eta_c - 13) / (16 Omega_m^2)); warns unless
    Omega_m > 3 kappa.
    """
    wm = abs(cavity.detuning)
    k, e = cavity.kappa, cavity.eta_c
    if not wm > 3 * k:
        warnings.warn("resolved-sideband approximation used with Omega_m <= 3 kappa", RegimeWarning, stacklevel=2)
    return 4 * e**2 * (1 + k**2 * (16 * e - 13) / (16 * wm**2))


def rsb_residual(cavity: CavityParams) -> float:
    """(approximate - exact) / exact for the resolved-sideband K_H."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        approx = k_homodyne_rsb(cavity)
    exact = float(k_homodyne(cavity, abs(cavity.detuning)))
    return (approx - exact) / exact


class DetuningOptimum(NamedTuple):
    detuning: float  # positive branch; K_D is even in the detuning
    k_value: float  # exact K_D evaluated at that detuning
    k_closed_form: float
    branch: str  # "slope", "sideband" or "single"


def optimal_detuning_direct(kappa: float, eta_c: float, omega: float) -> list[DetuningOptimum]:
    """Detunings maximising K_D at Fourier frequency omega.

    Above Omega = sqrt(2) kappa there are two maxima (on the slope of the
    resonance and on a mechanical sideband) with equal signal; below it there
    is a single one.
    """
    if not (kappa > 0 and omega > 0):
        raise ValueError("kappa and omega must be positive")
    w, k, e = omega, kappa, eta_c
    out = []
    if w > math.sqrt(2) * k:
        root = math.sqrt(w**4 - 2 * k**2 * w**2)
        k_cf = 4 * e**2 * (1 + k**2 * (1 - e) ** 2 / w**2)
        for branch, sign in (("slope", -1.0), ("sideband", 1.0)):
            d = 0.5 * math.sqrt(2 * w**2 - k**2 + sign * 2 * root)
            k_val = float(k_direct(CavityParams(k, e, d), w))
            out.append(DetuningOptimum(d, k_val, k_cf, branch))
    else:
        d = math.sqrt(12 * w**2 + 3 * k**2) / 6
        k_cf = 27 * w**2 * e**2 * k**2 * (w**2 + k**2 * (1 - e) ** 2) / (w**2 + k**2) ** 3
        out.append(DetuningOptimum(d, float(k_direct(CavityParams(k, e, d), w)), k_cf, "single"))
    return out


@dataclass(frozen=True)
class DetectionScheme:
    """A detection scheme bound to a cavity.

    ``lo_power_ratio`` (P_LO / P_in) only matters for homodyne detection and
    only enters when detector-signal spectra are composed with powers.
    """

    kind: Literal["direct", "homodyne"]
    cavity: CavityParams
    lo_power_ratio: float = 1.0

    def __post_init__(self):
        if self.kind not in ("direct", "homodyne"):
            raise ValueError(f"unknown detection kind {self.kind!r}")
        if self.kind == "homodyne" and not self.lo_power_ratio > 0:
            raise ValueError("lo_power_ratio must be positive")

    @property
    def degenerate(self) -> bool:
        """Direct detection on resonance sees no frequency noise at all."""
        return self.kind == "direct" and self.cavity.detuning == 0

    @property
    def needs_limit(self) -> bool:
        return self.kind == "homodyne" and abs(self.cavity.eta_c - 0.5) < _ETA_HALF_TOL

    def k(self, omega):
        if self.kind == "direct":
            return k_direct(self.cavity, omega)
        return k_homodyne(self.cavity, omega)

    def power_scale(self, p_in: float = 1.0) -> float:
        """Factor turning K S_psipsi into a detector-power PSD."""
        if self.kind == "direct":
            return p_in**2
        return p_in**2 * self.lo_power_ratio
