"""Inverse pipeline: tone measurement, Lorentzian fitting and g0 extraction.

Two estimators of the cavity frequency variance <d omega_c^2> are provided.

simple   assumes K(Omega)/Omega^2 is equal at the mechanical peak and at the
         tone, so that
             <d omega_c^2> = (phi0^2 Omega_mod^2 / 2) (S_II(Omega_m) Gamma_m / 4) / A_tone
full     divides the trace by the known shape K(Omega)/K(Omega_mod) (Omega_mod/Omega)^2,
         calibrates it with the tone into S_ww, fits there and integrates.

A_tone is the single-sided area of the tone, phi0^2 K(Omega_mod) P / 2.
Then g0 = sqrt(<d omega_c^2> / (2 <n_m>)).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import units
from .physics import RegimeWarning, occupation
from .specest import AnalyzerModel
from .spectrum import Spectrum, SpectrumUnit
from .transduction import DetectionScheme

MAD_TO_SIGMA = 1.4826
NO_PEAK_FACTOR = 3.0
WEAK_TONE_FACTOR = 3.0
TONE_HALFWIDTH_ENBW = 3.0  # integration half-width
TONE_FLANK_ENBW = 6.0  # outer edge of the background flanks
FLAT_K_OFFSET = 0.05  # |Omega_m - Omega_mod| / Omega_m above which "simple" warns
FLAT_K_WIDTH = 0.01  # Gamma_m / Omega_m above which "simple" warns
PL_EXPONENT_STARTS = (-2.0, -1.0, 1.0, 2.0)  # free power-law exponent starts


class FitError(RuntimeError):
    """Fit did not converge; ``best`` holds the best parameters found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NoPeakError(FitError):
    pass


class ToneError(ValueError):
    """Calibration tone missing, weak or off the grid."""


class MaskedBinError(ValueError):
    """K vanishes inside the fit window, so the trace cannot be converted."""


# -- Lorentzian fitting ------------------------------------------------------

_BASE = ("center", "fwhm", "height", "background")


@dataclass
class LorentzianFit:
    """h / (1 + 4 (f - f0)^2 / w^2) + b [+ A (f / f_ref)^p], all in Hz."""

    center: float
    fwhm: float
    height: float
    background: float
    pl_amplitude: float = 0.0
    pl_exponent: float = 0.0
    f_ref: float = 1.0
    names: tuple[str, ...] = _BASE
    covariance: np.ndarray | None = None
    redchi: float = float("nan")
    n_points: int = 0
    nfev: int = 0

    def evaluate(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        peak = self.height / (1.0 + 4.0 * (f - self.center) ** 2 / self.fwhm**2)
        return peak + self.background + self.pl_amplitude * (f / self.f_ref) ** self.pl_exponent

    @property
    def area(self) -> float:
        """Integral of the Lorentzian over f: pi/2 h w."""
        return 0.5 * math.pi * self.height * self.fwhm

    def stderr(self, name: str) -> float:
        if self.covariance is None or name not in self.names:
            return float("nan")
        i = self.names.index(name)
        return float(math.sqrt(max(self.covariance[i, i], 0.0)))

    def cov(self, a: str, b: str) -> float:
        if self.covariance is None:
            return float("nan")
        return float(self.covariance[self.names.index(a), self.names.index(b)])


def _half_height_width(f, excess, i_max) -> float:
    half = excess[i_max] / 2.0
    j = i_max
    while j > 0 and excess[j] > half:
        j -= 1
    k = i_max
    while k < excess.size - 1 and excess[k] > half:
        k += 1
    width = f[k] - f[j]
    return width if width > 0 else 3.0 * np.median(np.diff(f))


def auto_initial(f, y) -> LorentzianFit:
    """Initial guess from the background-subtracted maximum.

    Ties resolve to the lowest frequency (np.argmax returns the first).
    Raises NoPeakError when the excess is not above NO_PEAK_FACTOR times the
    robust spread of the trace.
    """
    base = float(np.median(y))
    excess = y - base
    spread = MAD_TO_SIGMA * float(np.median(np.abs(excess)))
    i_max = int(np.argmax(excess))
    scale = max(float(np.max(np.abs(y))), np.finfo(float).tiny)
    if excess[i_max] <= NO_PEAK_FACTOR * spread or excess[i_max] <= 1e-12 * scale:
        raise NoPeakError(
            f"no peak: maximum excess {excess[i_max]:.3g} vs background spread {spread:.3g}"
        )
    return LorentzianFit(
        center=float(f[i_max]),
        fwhm=float(_half_height_width(f, excess, i_max)),
        height=float(excess[i_max]),
        background=base,
    )


def fit_lorentzian(trace: Spectrum, window: tuple[float, float] | None = None,
                   initial: LorentzianFit | None = None, power_law: bool = False,
                   exponent: float | str = "free", exclude: tuple[tuple[float, float], ...] = (),
                   max_nfev: int | None = None, reweight_passes: int = 6) -> LorentzianFit:
    """Least-squares Lorentzian plus flat (and optional power-law) background.

    Levenberg-Marquardt on scaled parameters.  The first pass uses uniform
    weights; later passes weight each bin by the previous model, which is
    the quasi-likelihood estimator for multiplicative (Gamma) scatter.  The
    covariance is (J^T J)^-1 times the reduced chi-square.

    A free power-law exponent is nearly degenerate with the flat term over a
    narrow window, so it gets a larger evaluation budget and several starting
    exponents (the lowest final cost wins).  Prefer a fixed exponent when the
    background shape is known.
    """
    f, y = trace.freqs, trace.values
    keep = np.isfinite(y)
    if window is not None:
        keep &= (f >= window[0]) & (f <= window[1])
    for lo, hi in exclude:
        keep &= ~((f >= lo) & (f <= hi))
    f, y = f[keep], y[keep]
    if f.size < 10:
        raise ValueError(f"fit window holds {f.size} points; at least 10 are needed")
    init = initial if initial is not None else auto_initial(f, y)
    if f[-1] - f[0] < 3 * init.fwhm:
        raise ValueError("fit window spans less than three line widths")

    free_exp = power_law and exponent == "free"
    if max_nfev is None:
        max_nfev = 20000 if free_exp else 2000
    f_ref = float(0.5 * (f[0] + f[-1]))
    c0, w0 = init.center, init.fwhm
    h0 = max(init.height, np.finfo(float).tiny)
    fixed_exp = 0.0 if not power_law or free_exp else float(exponent)
    names = list(_BASE) + (["pl_amplitude"] if power_law else []) + (["pl_exponent"] if free_exp else [])
    scales = np.array([w0, w0, h0, h0] + ([h0] if power_law else []) + ([1.0] if free_exp else []))

    def unpack(theta):
        p = dict(center=c0 + theta[0] * w0, fwhm=abs(theta[1]) * w0, height=theta[2] * h0,
                 background=theta[3] * h0, pl_amplitude=0.0, pl_exponent=fixed_exp)
        if power_law:
            p["pl_amplitude"] = theta[4] * h0
        if free_exp:
            p["pl_exponent"] = theta[5]
        return p

    def model(theta):
        p = unpack(theta)
        peak = p["height"] / (1.0 + 4.0 * (f - p["center"]) ** 2 / p["fwhm"] ** 2)
        return peak + p["background"] + p["pl_amplitude"] * (f / f_ref) ** p["pl_exponent"]

    def solve(theta):
        sigma = np.full_like(y, h0)
        result = None
        for _ in range(reweight_passes):
            s = sigma
            result = optimize.least_squares(lambda t: (model(t) - y) / s, theta, method="lm",
                                            max_nfev=max_nfev, xtol=1e-13, ftol=1e-13, gtol=1e-13)
            if not result.success and result.status == 0:
                raise FitError(f"fit did not converge in {max_nfev} evaluations",
                               LorentzianFit(**unpack(result.x), f_ref=f_ref))
            moved = np.max(np.abs(result.x - theta))
            theta = result.x
            m = model(theta)
            if np.any(m <= 0):
                break  # relative weights need a positive model
            sigma = m
            if moved < 1e-12:
                break
        return theta, result

    # split the initial background between the flat and power-law terms so
    # that neither derivative starts at zero
    b_init = init.background / h0
    start = [0.0, 1.0, 1.0, 0.5 * b_init if power_law else b_init] + ([0.5 * b_init] if power_law else [])
    if not free_exp:
        theta, result = solve(np.array(start))
    else:
        # the exponent is poorly conditioned; keep the best of a few starts
        best = None
        for p0 in PL_EXPONENT_STARTS:
            try:
                cand = solve(np.array(start + [p0]))
            except FitError as exc:
                best = best or exc
                continue
            if not isinstance(best, tuple) or np.sum(cand[1].fun**2) < np.sum(best[1].fun**2):
                best = cand
        if not isinstance(best, tuple):
            raise best
        theta, result = best

    dof = max(f.size - theta.size, 1)
    chi2 = float(np.sum(result.fun**2))
    jtj = result.jac.T @ result.jac
    try:
        cov_scaled = np.linalg.inv(jtj) * (chi2 / dof)
    except np.linalg.LinAlgError:
        cov_scaled = np.full((theta.size, theta.size), np.nan)
    cov = cov_scaled * np.outer(scales, scales)
    p = unpack(theta)
    return LorentzianFit(
        **p, f_ref=f_ref, names=tuple(names), covariance=cov,
        redchi=chi2 / dof, n_points=int(f.size), nfev=int(result.nfev),
    )


# -- calibration tone ---------------------------------------------------------

@dataclass(frozen=True)
class ToneMeasurement:
    peak_height: float  # background-subtracted filter peak
    area: float  # single-sided mean square of the tone
    background: float  # local background at the tone
    area_stderr: float
    method: str  # "integrated" or "height_x_enbw"


def measure_tone(trace: Spectrum, f_mod: float, analyzer: AnalyzerModel) -> ToneMeasurement:
    """Height and area of a filter-broadened tone at ``f_mod`` (Hz).

    When the grid resolves the filter (step < ENBW/2) the area is the sum over
    +-3 ENBW minus a straight-line background fitted on the flanks between 3
    and 6 ENBW.  Otherwise it falls back to height * ENBW with a local-median
    background.
    """
    f, y = trace.freqs, trace.values
    enbw = analyzer.enbw
    if not f[0] <= f_mod <= f[-1]:
        raise ToneError(f"tone frequency {f_mod} Hz lies outside the trace")
    df = trace.step
    dist = np.abs(f - f_mod)
    core = dist <= TONE_HALFWIDTH_ENBW * enbw
    flank = (dist > TONE_HALFWIDTH_ENBW * enbw) & (dist <= TONE_FLANK_ENBW * enbw) & np.isfinite(y)

    if df < enbw / 2 and flank.sum() >= 4 and core.sum() >= 3:
        coef = np.polyfit(f[flank] - f_mod, y[flank], 1)
        line = np.polyval(coef, f - f_mod)
        rel = (y[flank] - line[flank]) / line[flank]
        rel_sigma = float(np.std(rel, ddof=2)) if flank.sum() > 2 else 0.0
        excess = y[core] - line[core]
        area = float(np.sum(excess) * df)
        peak = float(np.max(excess))
        bg = float(np.polyval(coef, 0.0))
        area_err = float(rel_sigma * math.sqrt(np.sum(y[core] ** 2)) * df)
        method = "integrated"
    else:
        near = dist <= TONE_FLANK_ENBW * max(enbw, df)
        bg = float(np.median(y[near & ~(dist <= max(enbw, df))])) if np.any(near & ~(dist <= max(enbw, df))) else 0.0
        i = int(np.argmin(dist))
        peak = float(y[i] - bg)
        area = peak * enbw
        area_err = float("nan")
        method = "height_x_enbw"

    if not peak >= WEAK_TONE_FACTOR * abs(bg) or not peak > 0:
        raise ToneError(f"tone at {f_mod} Hz is weak: height {peak:.3g} vs local background {bg:.3g}")
    return ToneMeasurement(peak, area, bg, area_err, method)


# -- g0 extraction --------------------------------------------------------------

@dataclass
class CalibrationResult:
    method: str
    g0: float  # rad/s
    g0_stderr: float
    delta_omega_sq: float  # rad^2/s^2
    n_m: float
    k_at_mod: float  # K(Omega_mod) times the optical power factor, from the tone
    tone_area: float
    omega_m: float
    gamma_m: float
    temperature: float
    phi0: float
    f_mod: float
    fit: LorentzianFit
    tone: ToneMeasurement
    assumptions: list[str] = field(default_factory=list)

    @property
    def g0_hz(self) -> float:
        return units.to_hz(self.g0)

    def report_lines(self) -> list[str]:
        rows = [
            ("method", self.method),
            ("g0_hz", f"{self.g0_hz:.10g}"),
            ("g0_stderr_hz", f"{units.to_hz(self.g0_stderr):.4g}"),
            ("delta_omega_sq_rad2_s2", f"{self.delta_omega_sq:.10g}"),
            ("delta_nu_rms_hz", f"{units.to_hz(math.sqrt(self.delta_omega_sq)):.10g}"),
            ("n_m", f"{self.n_m:.10g}"),
            ("temperature_k", f"{self.temperature:.6g}"),
            ("omega_m_hz", f"{units.to_hz(self.omega_m):.12g}"),
            ("gamma_m_hz", f"{units.to_hz(self.gamma_m):.10g}"),
            ("k_at_mod", f"{self.k_at_mod:.10g}"),
            ("tone_area", f"{self.tone_area:.10g}"),
            ("tone_method", self.tone.method),
            ("f_mod_hz", f"{self.f_mod:.12g}"),
            ("phi0_rad", f"{self.phi0:.10g}"),
            ("fit_redchi", f"{self.fit.redchi:.4g}"),
        ]
        rows += [("assumption", a) for a in self.assumptions]
        return [f"{k} = {v}" for k, v in rows]


def _default_exclusion(f_mod, analyzer):
    half = TONE_FLANK_ENBW * analyzer.enbw
    return ((f_mod - half, f_mod + half),)


def _finish(method, delta_sq, rel_var, fit, tone, phi0, f_mod, temperature, k_at_mod, assumptions):
    omega_m = units.to_angular(fit.center)
    gamma_m = units.to_angular(fit.fwhm)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        n_m = occupation(omega_m, temperature)
    for w in caught:
        assumptions.append(str(w.message))
    if not delta_sq > 0:
        raise FitError("non-positive frequency variance", fit)
    g0 = math.sqrt(delta_sq / (2.0 * n_m))
    g0_err = 0.5 * g0 * math.sqrt(rel_var) if rel_var >= 0 else float("nan")
    assumptions.insert(0, f"T = {temperature:g} K, high-temperature occupation")
    assumptions.append("tone background referenced to a linear fit of the flanks (local median when unresolved)")
    return CalibrationResult(
        method=method, g0=g0, g0_stderr=g0_err, delta_omega_sq=delta_sq, n_m=n_m,
        k_at_mod=k_at_mod, tone_area=tone.area, omega_m=omega_m, gamma_m=gamma_m,
        temperature=temperature, phi0=phi0, f_mod=f_mod, fit=fit, tone=tone,
        assumptions=assumptions,
    )


def _rel_var(fit: LorentzianFit, tone: ToneMeasurement) -> float:
    """Relative variance of h * w / A_tone to first order."""
    h, w = fit.height, fit.fwhm
    var = (fit.stderr("height") / h) ** 2 + (fit.stderr("fwhm") / w) ** 2 + 2 * fit.cov("height", "fwhm") / (h * w)
    if np.isfinite(tone.area_stderr):
        var += (tone.area_stderr / tone.area) ** 2
    return float(var)


def extract_g0_simple(trace: Spectrum, f_mod: float, phi0: float, analyzer: AnalyzerModel,
                      temperature: float = 300.0, window=None, power_law: bool = False,
                      exponent: float | str = "free") -> CalibrationResult:
    """g0 assuming K(Omega)/Omega^2 is flat between the mechanical peak and the tone."""
    if not phi0 > 0:
        raise ValueError("phi0 must be positive")
    tone = measure_tone(trace, f_mod, analyzer)
    fit = fit_lorentzian(trace, window, power_law=power_law, exponent=exponent,
                         exclude=_default_exclusion(f_mod, analyzer))
    omega_mod = units.to_angular(f_mod)
    omega_m = units.to_angular(fit.center)
    gamma_m = units.to_angular(fit.fwhm)
    assumptions = ["K(Omega)/Omega^2 taken as equal at Omega_m and Omega_mod"]
    if abs(omega_m - omega_mod) > FLAT_K_OFFSET * omega_m or gamma_m > FLAT_K_WIDTH * omega_m:
        warnings.warn("simple method used outside its flat-K regime", RegimeWarning, stacklevel=2)
        assumptions.append("warning: outside flat-K regime")
    delta_sq = 0.5 * phi0**2 * omega_mod**2 * (fit.height * gamma_m / 4.0) / tone.area
    return _finish("simple", delta_sq, _rel_var(fit, tone), fit, tone, phi0, f_mod, temperature,
                   2.0 * tone.area / phi0**2, assumptions)


def frequency_noise_view(trace: Spectrum, f_mod: float, phi0: float, tone_area: float,
                         scheme: DetectionScheme,
                         unit: SpectrumUnit = SpectrumUnit.FREQ_NOISE_RAD) -> Spectrum:
    """Tone-calibrated single-sided S_ww (or S_nu_nu) of a detector trace.

    Bins where K vanishes are NaN; their count is in meta["masked_bins"].
    """
    omega = units.to_angular(trace.freqs)
    omega_mod = units.to_angular(f_mod)
    k = np.asarray(scheme.k(omega), dtype=float)
    k_mod = float(scheme.k(omega_mod))
    if not k_mod > 0:
        raise MaskedBinError("K vanishes at the modulation frequency")
    masked = ~(k > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = np.where(masked, np.nan, omega**2 * k_mod / k) * (0.5 * phi0**2 / tone_area)
    view = trace.with_values(trace.values * gain, SpectrumUnit.FREQ_NOISE_RAD, masked_bins=int(masked.sum()))
    return view.convert(unit)


def extract_g0_full(trace: Spectrum, f_mod: float, phi0: float, analyzer: AnalyzerModel,
                    scheme: DetectionScheme, temperature: float = 300.0, window=None,
                    power_law: bool = False, exponent: float | str = "free") -> CalibrationResult:
    """g0 from the tone-calibrated frequency-noise view, using the known K(Omega)."""
    if not phi0 > 0:
        raise ValueError("phi0 must be positive")
    tone = measure_tone(trace, f_mod, analyzer)
    view = frequency_noise_view(trace, f_mod, phi0, tone.area, scheme)
    sel = np.ones(len(view), bool) if window is None else (view.freqs >= window[0]) & (view.freqs <= window[1])
    excl = _default_exclusion(f_mod, analyzer)[0]
    sel &= ~((view.freqs >= excl[0]) & (view.freqs <= excl[1]))
    if np.any(~np.isfinite(view.values[sel])):
        raise MaskedBinError("K vanishes inside the fit window")
    fit = fit_lorentzian(view, window, power_law=power_law, exponent=exponent, exclude=(excl,))
    # single-sided S_ww: <d omega^2> = (pi/2) h w_Hz
    delta_sq = fit.area
    assumptions = [f"K(Omega) from {scheme.kind} detection, kappa/2pi = {units.to_hz(scheme.cavity.kappa):.6g} Hz, "
                   f"eta_c = {scheme.cavity.eta_c:g}, Delta/2pi = {units.to_hz(scheme.cavity.detuning):.6g} Hz"]
    k_at_mod = 2.0 * tone.area / phi0**2
    return _finish("full_k", delta_sq, _rel_var(fit, tone), fit, tone, phi0, f_mod, temperature,
                   k_at_mod, assumptions)


def g0_from_variance(delta_omega_sq: float, omega_m: float, temperature: float = 300.0) -> float:
    """g0 = sqrt(<d omega_c^2> / (2 <n_m>)) with the high-temperature occupation."""
    return math.sqrt(delta_omega_sq / (2.0 * occupation(omega_m, temperature)))
