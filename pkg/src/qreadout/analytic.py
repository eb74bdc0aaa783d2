"""Closed-form reference results for the continuously monitored qubit.

These are the quantities the simulation is judged against rather than
simulated: the long-time distribution of the differential charge, the
Green's function of the measurement-induced polarization diffusion, the
stationary polarization density when noise and measurement balance, the
relaxation-rate family (including the Zeno suppression factor), and the
flux/phase-shift budget of a concrete shelving-readout design.

Dimensionless readout time is ``tau = t r theta^2`` throughout: one unit
of tau is one inverse measurement rate.  Where densities underflow at
large tau, log companions are provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants
from scipy.special import log_ndtr, ndtr

__all__ = [
    "RateSet",
    "DesignReport",
    "charge_density",
    "charge_log_density",
    "greens_function",
    "greens_log_density",
    "undecided_mass",
    "undecided_log_mass",
    "stationary_density",
    "relaxation_rates",
    "design_report",
]


def _logcosh(u):
    u = np.abs(u)
    return u + np.log1p(np.exp(-2.0 * u)) - math.log(2.0)


def _log1mexp(x):
    """log(1 - e^x) for x < 0, accurate at both ends."""
    x = np.asarray(x, dtype=float)
    out = np.where(
        x > -math.log(2.0),
        np.log(-np.expm1(np.minimum(x, -1e-300))),
        np.log1p(-np.exp(x)),
    )
    return out


def _log_phi_diff(a, b):
    """log(Phi(b) - Phi(a)) for a < b without catastrophic cancellation."""
    if not b > a:
        raise ValueError("need a < b")
    if b <= 0.0:
        # Both in the lower tail: work with cdf = sf(-x).
        lo, hi = log_ndtr(a), log_ndtr(b)
        return hi + float(_log1mexp(lo - hi))
    if a >= 0.0:
        lo, hi = log_ndtr(-b), log_ndtr(-a)
        return hi + float(_log1mexp(lo - hi))
    return math.log(float(ndtr(b) - ndtr(a)))


def _validate_open_interval(z, name):
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) >= 1.0) or not np.all(np.isfinite(z)):
        raise ValueError(f"{name} must satisfy |{name}| < 1")
    return z


# ---------------------------------------------------------------------------
# Differential-charge distribution


def charge_log_density(q, z0: float, t: float, r: float, theta: float):
    """Log of :func:`charge_density`; safe deep in the tails."""
    if t * r < 1.0:
        raise ValueError("need at least one expected photon: t * r >= 1")
    if not -1.0 <= z0 <= 1.0:
        raise ValueError(f"z0 must lie in [-1, 1], got {z0!r}")
    if theta == 0.0:
        raise ValueError("theta must be nonzero")
    q = np.asarray(q, dtype=float)
    tau = t * r * theta * theta
    log_norm = 0.5 * math.log(tau / (2.0 * math.pi))
    log_up = -0.5 * tau * (q - 1.0) ** 2
    log_down = -0.5 * tau * (q + 1.0) ** 2
    w_up = 0.5 * (1.0 + z0)
    w_down = 0.5 * (1.0 - z0)
    if w_up == 0.0:
        return log_norm + log_down
    if w_down == 0.0:
        return log_norm + log_up
    return log_norm + np.logaddexp(math.log(w_up) + log_up, math.log(w_down) + log_down)


def charge_density(q, z0: float, t: float, r: float, theta: float):
    """Long-time distribution of the differential charge ``q``.

    A mixture of two Gaussians at ``q = +-1`` with weights
    ``(1 +- z0)/2`` and common variance ``1/(t r theta^2)``: the readout
    projects onto one of the poles and shot noise blurs each by the
    inverse root of the accumulated resolving power.
    """
    return np.exp(charge_log_density(q, z0, t, r, theta))


# ---------------------------------------------------------------------------
# Green's function of the measurement diffusion


def greens_log_density(z, z0: float, tau: float):
    """Log of :func:`greens_function`."""
    z = _validate_open_interval(z, "z")
    z0 = float(_validate_open_interval(z0, "z0"))
    if not tau > 0.0:
        raise ValueError(f"tau must be > 0, got {tau!r}")
    u = np.arctanh(z)
    u0 = math.atanh(z0)
    return (
        _logcosh(u)
        - _logcosh(u0)
        - (u - u0) ** 2 / (2.0 * tau)
        - 0.5 * tau
        - 0.5 * math.log(2.0 * math.pi * tau)
        - (np.log1p(-z) + np.log1p(z))
    )


def greens_function(z, z0: float, tau: float):
    """Polarization density after measurement alone for time ``tau``.

    In ``u = arctanh(z)`` the detection record drives a Brownian motion
    with drift ``tanh(u)``, giving

        P(z) = [cosh u / cosh u0] N(u; u0, tau) e^{-tau/2} / (1 - z^2)

    with ``N`` the Gaussian density.  The density is an exact solution
    of d_tau P = (1/2) d^2/dz^2 [(1-z^2)^2 P]: normalized, martingale in
    z, and piling up ever closer to the poles as tau grows (masses
    ``(1 +- z0)/2``), though for finite tau there is never a point mass.
    """
    return np.exp(greens_log_density(z, z0, tau))


def _band_mass_terms(tau: float, upper: float, u0: float):
    """Log of the two exponential-tilt integrals over |u| < upper."""
    root = math.sqrt(tau)
    # int e^{+u} N(u; u0, tau) du over the band, times e^{-tau/2}:
    # a Gaussian of mean u0 + tau evaluated between the band edges.
    log_plus = u0 + _log_phi_diff((-upper - u0 - tau) / root, (upper - u0 - tau) / root)
    log_minus = -u0 + _log_phi_diff((-upper + u0 - tau) / root, (upper + u0 - tau) / root)
    return log_plus, log_minus


def undecided_log_mass(tau: float, epsilon: float, z0: float = 0.0) -> float:
    """Log of :func:`undecided_mass`; usable when the mass underflows."""
    if not tau > 0.0:
        raise ValueError(f"tau must be > 0, got {tau!r}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    z0 = float(_validate_open_interval(z0, "z0"))
    u0 = math.atanh(z0)
    upper = math.atanh(1.0 - epsilon)
    log_plus, log_minus = _band_mass_terms(tau, upper, u0)
    # Divide by 2 cosh(u0); log(2 cosh u0) = logcosh(u0) + log 2.
    return float(np.logaddexp(log_plus, log_minus)) - _logcosh(u0) - math.log(2.0)


def undecided_mass(tau: float, epsilon: float, z0: float = 0.0) -> float:
    """Probability that the record is still ambiguous after time ``tau``.

    Mass of :func:`greens_function` in the band ``|z| < 1 - epsilon``,
    in closed form via Gaussian tail integrals in the arctanh
    coordinate.  Falls off as ``e^{-tau/2}/sqrt(tau)``: readout error
    decreases exponentially with observation time.
    """
    return math.exp(undecided_log_mass(tau, epsilon, z0))


# ---------------------------------------------------------------------------
# Stationary density under noise + measurement


def stationary_density(z, gamma: float):
    """Balance point of polarization diffusion against transverse noise.

    ``gamma = 2 (S_x + S_y) / (r theta^2)`` compares the noise-induced
    jump rate to the measurement rate.  The density is

        P(z) = C(gamma) gamma / (gamma + 1 - z^2)^2

    with ``C`` fixed by normalization; it is symmetric, peaks at the
    poles, and for small gamma spends ~1/gamma of its time near each
    pole with a thin transit bridge across the middle.
    """
    z = _validate_open_interval(z, "z")
    if not gamma > 0.0 or not math.isfinite(gamma):
        raise ValueError(f"gamma must be finite and > 0, got {gamma!r}")
    a = math.sqrt(1.0 + gamma)
    normalizer = a**3 / (a + gamma * math.atanh(1.0 / a))
    return normalizer * gamma / (gamma + (1.0 - z * z)) ** 2


# ---------------------------------------------------------------------------
# Relaxation rates


@dataclass(frozen=True)
class RateSet:
    """Rate family of the monitored, noise-driven qubit (all 1/s except
    stark_shift in rad/s and the dimensionless zeno_factor)."""

    fermi_rate: float
    jump_rate: float
    inv_t1: float
    inv_t2: float
    stark_shift: float
    zeno_factor: float


def relaxation_rates(
    s_x: float, s_y: float, alpha: float, r: float, theta: float, omega0: float = 0.0
) -> RateSet:
    """All relaxation scales for given noise and measurement settings.

    The measurement acts twice: it dephases the transverse components at
    ``1/T2 = r theta^2 / 2`` and it interrupts the noise-driven spin
    flips, narrowing the effective noise spectrum.  The longitudinal
    rate is the noise power at the dressed splitting filtered by a
    Lorentzian of width ``alpha + r theta^2 / 2``:

        1/T1 = 2 (S_x + S_y) alpha (alpha + r theta^2/2)
               / [(alpha + r theta^2/2)^2 + (omega0 - r theta)^2]

    On resonance (``omega0 = stark_shift = r theta``) this is the Fermi
    rate ``2 (S_x + S_y)`` times the Zeno factor
    ``alpha / (alpha + r theta^2 / 2) <= 1``.
    """
    for name, value in [("s_x", s_x), ("s_y", s_y), ("alpha", alpha), ("omega0", omega0)]:
        if value < 0.0 or math.isnan(value):
            raise ValueError(f"{name} must be >= 0, got {value!r}")
    if not r * theta * theta > 0.0:
        raise ValueError("need r * theta^2 > 0")
    fermi = 2.0 * (s_x + s_y)
    half_meas = 0.5 * r * theta * theta
    stark = r * theta
    detuning = omega0 - stark
    if math.isinf(alpha):
        lorentz = 1.0
        zeno = 1.0
    else:
        width = alpha + half_meas
        lorentz = alpha * width / (width * width + detuning * detuning)
        zeno = alpha / width
    return RateSet(
        fermi_rate=fermi,
        jump_rate=s_x + s_y,
        inv_t1=fermi * lorentz,
        inv_t2=half_meas,
        stark_shift=stark,
        zeno_factor=zeno,
    )


# ---------------------------------------------------------------------------
# Design calculator


@dataclass(frozen=True)
class DesignReport:
    """Operating point implied by optical power, wavelength, duration and
    target resolving power.  stark_shift views: rad/s is primary; the Hz
    view divides by 2 pi; the cm^-1 view is the Hz value over c in cm/s."""

    photon_energy_j: float
    flux_per_s: float
    n_exp: float
    theta_required_rad: float
    stark_shift_rad_per_s: float
    stark_shift_hz: float
    stark_shift_per_cm: float
    rc_recommended_s: float


def design_report(
    optical_power_w: float,
    wavelength_m: float,
    duration_s: float,
    resolving_power: float,
) -> DesignReport:
    """Size a dispersive readout: how small a phase shift still resolves
    the qubit in the given time, and what light shift it costs.

    The detected flux is ``power / (h c / lambda)``; collecting
    ``n_exp = r t`` photons resolves the poles at
    ``theta = sqrt(resolving_power / n_exp)``, and the measurement light
    shifts the splitting by ``r theta``.  The recommended filter time
    constant is 1/32 of the trace duration.
    """
    for name, value in [
        ("optical_power_w", optical_power_w),
        ("wavelength_m", wavelength_m),
        ("duration_s", duration_s),
        ("resolving_power", resolving_power),
    ]:
        if not (math.isfinite(value) and value > 0.0):
            raise ValueError(f"{name} must be finite and > 0, got {value!r}")
    photon_energy = constants.h * constants.c / wavelength_m
    flux = optical_power_w / photon_energy
    n_exp = flux * duration_s
    theta = math.sqrt(resolving_power / n_exp)
    stark = flux * theta
    stark_hz = stark / (2.0 * math.pi)
    return DesignReport(
        photon_energy_j=photon_energy,
        flux_per_s=flux,
        n_exp=n_exp,
        theta_required_rad=theta,
        stark_shift_rad_per_s=stark,
        stark_shift_hz=stark_hz,
        stark_shift_per_cm=stark_hz / (constants.c * 100.0),
        rc_recommended_s=duration_s / 32.0,
    )
