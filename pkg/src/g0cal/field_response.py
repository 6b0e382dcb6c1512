"""Three-tone sideband oracle for the transduction functions.

The cavity field is linearised around the carrier and represented by its
spectral components at 0 and +-Omega (time dependence exp(-i Omega t) for the
``upper`` tone).  Mechanical motion is prescribed, not solved, so radiation
pressure back-action is absent by construction.

All arithmetic runs in mpmath at ``DPS`` decimal digits.  Far from resonance
the detected beat is a tiny difference of order-one terms and double precision
loses up to a dozen digits there.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from .physics import CavityParams

DPS = 50
LINEARIZATION_LIMIT = 0.1


class LinearizationError(ValueError):
    """Modulation depth too large for the first-order sideband expansion."""


@dataclass(frozen=True)
class SidebandField:
    """Carrier plus first-order sidebands: c + u e^{-i W t} + l e^{+i W t}."""

    carrier: mpmath.mpc
    upper: mpmath.mpc
    lower: mpmath.mpc
    omega: float

    def as_complex(self) -> tuple[complex, complex, complex]:
        return complex(self.carrier), complex(self.upper), complex(self.lower)

    def scaled(self, factor) -> "SidebandField":
        return SidebandField(self.carrier * factor, self.upper * factor, self.lower * factor, self.omega)


def _lorentzian(cavity: CavityParams, omega) -> mpmath.mpc:
    return 1 / (-1j * (mpmath.mpf(cavity.detuning) + omega) + mpmath.mpf(cavity.kappa) / 2)


def cavity_response(cavity: CavityParams, omega: float) -> complex:
    """L(Omega) = 1 / (-i (Delta + Omega) + kappa/2)."""
    with mpmath.workdps(DPS):
        return complex(_lorentzian(cavity, mpmath.mpf(omega)))


def _check_depth(depth: float, name: str):
    if abs(depth) >= LINEARIZATION_LIMIT:
        raise LinearizationError(f"|{name}| = {abs(depth):g} is outside the linear regime (< {LINEARIZATION_LIMIT})")


def _output(field_in: SidebandField, internal: SidebandField, root_coupling) -> SidebandField:
    # input-output relation, applied tone by tone
    return SidebandField(
        field_in.carrier - root_coupling * internal.carrier,
        field_in.upper - root_coupling * internal.upper,
        field_in.lower - root_coupling * internal.lower,
        internal.omega,
    )


def sidebands_mechanical(cavity: CavityParams, psi0: float, omega_m: float, s_in=1.0):
    """Fields for prescribed motion x0 cos(Omega_m t), psi0 = x0 G / Omega_m.

    Returns (internal, output) SidebandFields.
    """
    _check_depth(psi0, "psi0")
    with mpmath.workdps(DPS):
        s = mpmath.mpc(s_in)
        w = mpmath.mpf(omega_m)
        g = mpmath.sqrt(mpmath.mpf(cavity.eta_c) * cavity.kappa)
        a0 = g * _lorentzian(cavity, 0) * s
        kick = -1j * mpmath.mpf(psi0) * w / 2
        internal = SidebandField(a0, kick * _lorentzian(cavity, w) * a0, kick * _lorentzian(cavity, -w) * a0, omega_m)
        field_in = SidebandField(s, mpmath.mpc(0), mpmath.mpc(0), omega_m)
        return internal, _output(field_in, internal, g)


def sidebands_phase_mod(cavity: CavityParams, phi0: float, omega_mod: float, s_in=1.0):
    """Fields for an input phase-modulated as exp(-i phi0 cos(Omega_mod t)).

    Returns (input, internal, output) SidebandFields.
    """
    _check_depth(phi0, "phi0")
    with mpmath.workdps(DPS):
        s = mpmath.mpc(s_in)
        w = mpmath.mpf(omega_mod)
        g = mpmath.sqrt(mpmath.mpf(cavity.eta_c) * cavity.kappa)
        side = -1j * mpmath.mpf(phi0) / 2 * s
        field_in = SidebandField(s, side, side, omega_mod)
        internal = SidebandField(
            g * _lorentzian(cavity, 0) * s,
            g * _lorentzian(cavity, w) * side,
            g * _lorentzian(cavity, -w) * side,
            omega_mod,
        )
        return field_in, internal, _output(field_in, internal, g)


def direct_power_beat(output: SidebandField):
    """|s_out(t)|^2 to first order: returns (dc, beat) with P = dc + Re(beat e^{-i W t})."""
    with mpmath.workdps(DPS):
        c, u, l = output.carrier, output.upper, output.lower
        dc = abs(c) ** 2
        beat = 2 * (mpmath.conj(c) * u + c * mpmath.conj(l))
        return dc, beat


def homodyne_beat(output: SidebandField, lo: SidebandField, phi_lo: float = 0.0):
    """Balanced difference signal i (s_LO s_out^* - s_LO^* s_out).

    ``lo`` is the local-oscillator field before the phase ``phi_lo`` is
    applied.  Returns (dc, beat) with H = dc + Re(beat e^{-i W t}).
    """
    with mpmath.workdps(DPS):
        rot = mpmath.expj(phi_lo)
        lc, lu, ll = lo.carrier * rot, lo.upper * rot, lo.lower * rot
        c, u, l = output.carrier, output.upper, output.lower
        conj = mpmath.conj
        dc = 1j * (lc * conj(c) - conj(lc) * c)
        beat = 2j * (lu * conj(c) + lc * conj(l) - conj(lc) * u - conj(ll) * c)
        return mpmath.re(dc), beat


def _lock_phase(cavity: CavityParams):
    k, e, d = (mpmath.mpf(v) for v in (cavity.kappa, cavity.eta_c, cavity.detuning))
    den = d**2 + (1 - 2 * e) * k**2 / 4
    if den == 0:
        return mpmath.mpf(0) if d == 0 else -mpmath.sign(d) * mpmath.pi / 2
    return -mpmath.atan(e * k * d / den)


def lo_phase_lock(cavity: CavityParams) -> float:
    """LO phase giving zero homodyne d.c. signal.

    -arctan(eta_c kappa Delta / (Delta^2 + (1 - 2 eta_c) kappa^2 / 4)), taking
    -sign(Delta) pi/2 where the denominator vanishes.
    """
    with mpmath.workdps(DPS):
        return float(_lock_phase(cavity))


def oracle_k(cavity: CavityParams, omega: float, kind: str, path: str = "mechanical",
             depth: float = 1e-6, lo_power_ratio: float = 1.0) -> float:
    """Transduction coefficient computed from sideband amplitudes.

    The modulation PSD carries depth^2/4 at +-Omega and the detected signal
    carries |beat|^2/4 there; K is their ratio divided by the optical powers
    (P_in = |s_in|^2 = 1 here).
    """
    with mpmath.workdps(DPS):
        if path == "mechanical":
            _, out = sidebands_mechanical(cavity, depth, omega)
            field_in = SidebandField(mpmath.mpc(1), mpmath.mpc(0), mpmath.mpc(0), omega)
        elif path == "phase":
            field_in, _, out = sidebands_phase_mod(cavity, depth, omega)
        else:
            raise ValueError(f"unknown path {path!r}")
        if kind == "direct":
            _, beat = direct_power_beat(out)
            norm = 1
        elif kind == "homodyne":
            # the LO is split off the (possibly phase-modulated) input
            lo = field_in.scaled(mpmath.sqrt(lo_power_ratio))
            _, beat = homodyne_beat(out, lo, _lock_phase(cavity))
            norm = lo_power_ratio
        else:
            raise ValueError(f"unknown detection kind {kind!r}")
        return float(abs(beat) ** 2 / (mpmath.mpf(depth) ** 2 * norm))


def oracle_sweep(n_tuples: int = 1000, seed: int = 1, decades: float = 3.0) -> dict[str, float]:
    """Maximum relative errors of the sideband oracle against the closed forms.

    Random (kappa, eta_c, Delta, Omega) with Omega and |Delta| log-uniform over
    +-``decades`` around kappa.  Keys are ``<kind>/<path>`` for oracle vs
    closed form and ``<kind>/paths`` for mechanical vs phase modulation.
    """
    from .transduction import k_direct, k_homodyne  # closed forms under test

    rng = np.random.Generator(np.random.Philox(seed))
    worst: dict[str, float] = {}

    def record(key, value):
        worst[key] = max(worst.get(key, 0.0), value)

    for _ in range(n_tuples):
        kappa = 10 ** rng.uniform(-1, 1)
        eta = rng.uniform(0.01, 0.99)
        delta = kappa * 10 ** rng.uniform(-decades, decades) * rng.choice([-1.0, 1.0])
        omega = kappa * 10 ** rng.uniform(-decades, decades)
        cav = CavityParams(kappa, eta, delta)
        for kind, closed in (("direct", k_direct), ("homodyne", k_homodyne)):
            ref = float(closed(cav, omega))
            mech = oracle_k(cav, omega, kind, "mechanical")
            phase = oracle_k(cav, omega, kind, "phase")
            record(f"{kind}/mechanical", abs(mech / ref - 1))
            record(f"{kind}/phase", abs(phase / ref - 1))
            record(f"{kind}/paths", abs(mech / phase - 1))
    return worst
