"""Perturbative cavity frequency shift from a displaced dielectric distribution.

    d(omega_c) / omega_c = -1/2 * int |E|^2 (eps_new - eps) dV / int |E|^2 eps dV

with eps_new(r) = eps(r - u(r)), the dielectric carried along by the
displacement field u.  Sign convention: a cavity that grows is red-shifted,
so the Fabry-Perot mirror gives G = -omega_c / L.

Grids are one-dimensional: planar (volume weight 1) or the radial coordinate
of an axisymmetric body (volume weight r).  Only analytic test fields are
provided; there is no eigenmode solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

C_LIGHT = 299_792_458.0  # m/s
BOUNDARY_FRACTION = 1e-6
LINEARITY_BAND = (1.99, 2.01)


class OpenDomainError(ValueError):
    """The mode carries non-negligible energy at the edge of the domain."""


class NonlinearityError(ValueError):
    """The probe displacement is outside the linear regime."""


@dataclass(frozen=True)
class FieldGrid:
    """Cell-centred 1-D grid with dielectric, field intensity and displacement.

    ``u`` is the displacement per unit modal amplitude (dimensionless shape,
    multiplied by the probe amplitude in metres).  Vacuum cells have eps = 1;
    metals are modelled by a negative eps.
    """

    x: np.ndarray
    eps: np.ndarray
    e_sq: np.ndarray
    u: np.ndarray
    geometry: str = "planar"
    omega_c: float | None = None
    length: float | None = None

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=float) for a in (self.x, self.eps, self.e_sq, self.u)]
        for name, a in zip(("x", "eps", "e_sq", "u"), arrays):
            object.__setattr__(self, name, a)
        if not all(a.shape == self.x.shape for a in arrays) or self.x.ndim != 1:
            raise ValueError("x, eps, e_sq and u must be congruent 1-D arrays")
        if self.x.size < 3 or np.any(np.diff(self.x) <= 0):
            raise ValueError("grid must be strictly increasing with at least three cells")
        if np.any(self.e_sq < 0):
            raise ValueError("e_sq must be non-negative")
        if self.geometry not in ("planar", "radial"):
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.geometry == "radial" and self.x[0] < 0:
            raise ValueError("radial grid needs r >= 0")

    @property
    def weight(self) -> np.ndarray:
        dx = np.gradient(self.x)
        return dx * self.x if self.geometry == "radial" else dx

    @property
    def cell(self) -> float:
        return float(np.median(np.diff(self.x)))

    def check_closed(self):
        peak = self.e_sq.max()
        edge = max(self.e_sq[0], self.e_sq[-1])
        if not peak > 0:
            raise OpenDomainError("the field vanishes everywhere")
        if edge >= BOUNDARY_FRACTION * peak:
            raise OpenDomainError(
                f"edge |E|^2 is {edge / peak:.2e} of the maximum (limit {BOUNDARY_FRACTION:g}); enlarge the domain"
            )


def _extend_into_vacuum(u, material):
    """Copy u from the nearest material cell onto vacuum cells."""
    idx = np.flatnonzero(material)
    if idx.size == 0:
        return np.zeros_like(u)
    if idx.size == 1:
        return np.full_like(u, u[idx[0]])
    j = np.arange(u.size)
    pos = np.clip(np.searchsorted(idx, j), 1, idx.size - 1)
    left, right = idx[pos - 1], idx[pos]
    nearest = np.where(np.abs(j - left) <= np.abs(right - j), left, right)
    return np.where(material, u, u[nearest])


def _ratio(num_terms, den_terms) -> float:
    # math.fsum keeps the summation order-independent and reproducible
    return -0.5 * math.fsum(num_terms) / math.fsum(den_terms)


def freq_shift(grid: FieldGrid, amplitude: float, variant: str = "advected") -> float:
    """Relative cavity shift d(omega_c)/omega_c for displacement ``amplitude * u``.

    ``advected`` samples eps(r - u) by linear interpolation between cell
    centres.  ``linearized`` moves each dielectric interface by the local u
    and weights the swept slab with |E|^2 of the cell it sweeps into.
    """
    grid.check_closed()
    w = grid.weight
    den = grid.e_sq * grid.eps * w
    if amplitude == 0 or not np.any(grid.u):
        return 0.0
    u = amplitude * grid.u
    if variant == "advected":
        eps_new = np.interp(grid.x - u, grid.x, grid.eps)
        return _ratio(grid.e_sq * (eps_new - grid.eps) * w, den)
    if variant == "linearized":
        jump = grid.eps[:-1] - grid.eps[1:]
        faces = np.flatnonzero(jump)
        u_face = 0.5 * (u[faces] + u[faces + 1])
        into = np.where(u_face > 0, faces + 1, faces)
        x_face = 0.5 * (grid.x[faces] + grid.x[faces + 1])
        vol = x_face if grid.geometry == "radial" else np.ones_like(x_face)
        return _ratio(jump[faces] * u_face * grid.e_sq[into] * vol, den)
    raise ValueError(f"unknown variant {variant!r}")


def g_from_shift(grid: FieldGrid, probe_amplitude: float, omega_c: float | None = None,
                 variant: str = "advected") -> float:
    """Optomechanical pull G = d(omega_c)/dx in rad/s per metre.

    The shift at twice the probe amplitude must be twice as large, within
    LINEARITY_BAND, otherwise NonlinearityError is raised.
    """
    omega_c = grid.omega_c if omega_c is None else omega_c
    if omega_c is None:
        raise ValueError("omega_c is needed to turn a relative shift into G")
    if not probe_amplitude > 0:
        raise ValueError("probe amplitude must be positive")
    s1 = freq_shift(grid, probe_amplitude, variant)
    s2 = freq_shift(grid, 2 * probe_amplitude, variant)
    if s1 == 0:
        if s2 != 0:
            raise NonlinearityError("shift vanishes at the probe amplitude but not at twice it")
        return 0.0
    ratio = s2 / s1
    lo, hi = LINEARITY_BAND
    if not lo <= ratio <= hi:
        raise NonlinearityError(f"shift(2a)/shift(a) = {ratio:.6f} is outside [{lo}, {hi}]")
    return omega_c * s1 / probe_amplitude


def fabry_perot_grid(n_cells: int = 32000, length: float = 10e-6, wavelength: float = 1e-6,
                     eps_mirror: float = -100.0, tail_depths: float = 20.0) -> FieldGrid:
    """Planar cavity: vacuum gap 0 < x < ``length`` between two metal mirrors.

    The left mirror is fixed, the right one carries u = 1.  Inside the metal
    (eps < 0) the field decays with kappa_d = k sqrt(|eps|), so both
    reflections add a phase atan(1/sqrt(|eps|)) and the resonance nearest the
    given wavelength has k L = q pi - 2 atan(1/sqrt(|eps|)).
    """
    if not eps_mirror < 0:
        raise ValueError("the mirror needs a negative dielectric constant")
    root = math.sqrt(-eps_mirror)
    phase = math.atan(1 / root)
    order = round(2 * length / wavelength)
    k = (order * math.pi - 2 * phase) / length
    kd = k * root
    skin = tail_depths / kd
    h = (length + 2 * skin) / n_cells
    x = -skin + (np.arange(n_cells) + 0.5) * h
    left, right = x <= 0, x >= length
    e = np.sin(k * x + phase)
    e = np.where(left, math.sin(phase) * np.exp(kd * np.minimum(x, 0)), e)
    e = np.where(right, math.sin(k * length + phase) * np.exp(-kd * np.maximum(x - length, 0)), e)
    eps = np.where(left | right, eps_mirror, 1.0)
    u = _extend_into_vacuum(np.where(right, 1.0, 0.0), left | right)
    return FieldGrid(x, eps, e**2, u, "planar", omega_c=C_LIGHT * k, length=length)


def _wgm_wavenumber(m: int, n: float, radius: float) -> float:
    """Vacuum wavenumber of the fundamental TE disk mode of azimuthal order m."""

    def match(k):
        a, b = n * k * radius, k * radius
        return n * special.jvp(m, a) * special.yv(m, b) - special.yvp(m, b) * special.jv(m, a)

    ks = np.linspace(0.95, 1.1, 20001) * m / (n * radius)
    v = match(ks)
    flips = np.flatnonzero(np.sign(v[:-1]) != np.sign(v[1:]))
    if flips.size == 0:
        raise RuntimeError("no whispering-gallery resonance in the search window")
    i = flips[0]
    return optimize.brentq(match, ks[i], ks[i + 1], xtol=1e-14 * ks[i])


def wgm_ring_grid(n_cells: int = 64000, radius: float = 50e-6, index: float = 1.44, m: int = 300,
                  inner: float = 0.85, r_span: tuple[float, float] = (0.8, 1.1)) -> FieldGrid:
    """Radial cross-section of a dielectric ring, uniformly displaced outwards.

    The field is J_m inside the ring and Y_m outside, matched at r = R; the
    ring occupies (inner*R, R).  All material moves by u = 1.
    """
    k0 = _wgm_wavenumber(m, index, radius)
    lo, hi = r_span[0] * radius, r_span[1] * radius
    h = (hi - lo) / n_cells
    r = lo + (np.arange(n_cells) + 0.5) * h
    e = np.where(
        r < radius,
        special.jv(m, index * k0 * r) / special.jv(m, index * k0 * radius),
        special.yv(m, k0 * r) / special.yv(m, k0 * radius),
    )
    material = (r > inner * radius) & (r < radius)
    eps = np.where(material, index**2, 1.0)
    u = _extend_into_vacuum(np.where(material, 1.0, 0.0), material)
    return FieldGrid(r, eps, e**2, u, "radial", omega_c=C_LIGHT * k0, length=radius)


PRESETS = {
    "fabry_perot": fabry_perot_grid,
    "wgm_ring": wgm_ring_grid,
}
# refinement ladders; the last entry is the finest preset grid
REFINEMENTS = {
    "fabry_perot": (8000, 32000, 128000),
    "wgm_ring": (4000, 16000, 64000),
}


@dataclass(frozen=True)
class ShiftResult:
    preset: str
    n_cells: int
    G: float
    G_reference: float  # -omega_c / L or -omega_c / R

    @property
    def ratio(self) -> float:
        return self.G / self.G_reference


def run_preset(name: str, n_cells: int | None = None, probe_fraction: float = 1e-3,
               variant: str = "advected") -> ShiftResult:
    """G for a named preset; the probe amplitude is a fraction of one cell."""
    if name not in PRESETS:
        raise KeyError(f"unknown modeshift preset {name!r}; choose from {sorted(PRESETS)}")
    n_cells = REFINEMENTS[name][-1] if n_cells is None else n_cells
    grid = PRESETS[name](n_cells)
    G = g_from_shift(grid, probe_fraction * grid.cell, variant=variant)
    return ShiftResult(name, n_cells, G, -grid.omega_c / grid.length)
