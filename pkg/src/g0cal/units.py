"""Frequency-unit conversions.

Everything inside the package works in angular frequency (rad/s) and
frequency-noise densities in rad^2 s^-2 per Hz.  Files and the command line use
ordinary frequency (Hz) and Hz^2/Hz.  All factors of 2*pi live here.
"""

import math

TWO_PI = 2.0 * math.pi


def to_angular(f_hz):
    """Ordinary frequency (Hz) -> angular frequency (rad/s)."""
    return TWO_PI * f_hz


def to_hz(omega):
    """Angular frequency (rad/s) -> ordinary frequency (Hz)."""
    return omega / TWO_PI


def freq_noise_to_hz2(s_rad):
    """Frequency-noise PSD in rad^2 s^-2/Hz -> Hz^2/Hz (S_nu_nu)."""
    return s_rad / TWO_PI**2


def freq_noise_to_rad2(s_hz2):
    """Frequency-noise PSD in Hz^2/Hz -> rad^2 s^-2/Hz (S_omega_omega)."""
    return s_hz2 * TWO_PI**2
