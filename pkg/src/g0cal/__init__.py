"""Frequency-noise calibration of the vacuum optomechanical coupling rate g0."""

__version__ = "0.1.0"
