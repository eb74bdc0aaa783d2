"""Two-outcome photon measurement of a single qubit.

A qubit sits in one arm of an interferometer and imprints a phase
``+theta`` or ``-theta`` on each transmitted photon, depending on which
``sigma_z`` eigenstate it occupies.  The interferometer is biased to the
half-fringe point, so each photon leaves through one of two output ports
(channel A or channel B) and the port choice carries partial which-state
information.  Detecting one photon applies a diagonal Kraus operator to
the qubit; a click on A nudges the polarization ``z = <sigma_z>`` up, a
click on B nudges it down.

Everything in this module is exact in ``theta``: no small-angle
expansion is used anywhere.  States are pure two-component amplitude
pairs, global phase is not tracked, and all operations are pure
functions returning fresh state objects.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DetectionChannel",
    "MeasurementSetup",
    "PureQubitState",
    "make_setup",
    "channel_probabilities",
    "apply_detection",
    "evolve_coherent",
    "sequence_probability",
    "sequence_log_probability",
    "fidelity",
]


class DetectionChannel(enum.IntEnum):
    """Output port of the interferometer.  A favors z = +1, B favors z = -1."""

    A = 0
    B = 1


@dataclass(frozen=True)
class MeasurementSetup:
    """Fixed parameters of the photon-qubit coupling.

    Attributes
    ----------
    theta : float
        Differential phase shift per photon, radians.  Must satisfy
        ``|theta| < pi/2``.
    rate : float
        Mean photon arrival rate ``r`` (photons per second).
    omega0 : float
        Bare qubit level splitting in the rotating frame, rad/s.
    asymmetry : float
        Channel imbalance ``s = sin(theta) cos(theta)``.  A qubit fully
        polarized at ``z = +/-1`` sends photons to channel A with
        probability ``(1 +/- s) / 2``.
    a_up, a_down : complex
        Eigenvalues of the channel-A Kraus operator on the ``z = +1``
        and ``z = -1`` eigenstates.
    b_up, b_down : complex
        Same for channel B.
    """

    theta: float
    rate: float
    omega0: float
    asymmetry: float
    a_up: complex
    a_down: complex
    b_up: complex
    b_down: complex


def make_setup(theta: float, rate: float, omega0: float = 0.0) -> MeasurementSetup:
    """Build a :class:`MeasurementSetup` from the per-photon phase shift.

    The two Kraus operators are diagonal in the ``sigma_z`` basis with
    eigenvalues

    ``a_up/down = ((cos(theta) +/- sin(theta)) - i) / 2``
    ``b_up/down = ((cos(theta) -/+ sin(theta)) + i) / 2``

    which satisfy ``|a_up|^2 + |b_up|^2 = 1`` exactly (the two channels
    exhaust each photon) and give channel probabilities
    ``p_A = (1 + s z) / 2`` with ``s = sin(theta) cos(theta)``.  The
    relative phase between the eigenvalues advances the qubit's
    transverse component by ``-arctan(sin(theta)/cos^2(theta))`` per
    photon regardless of the channel, i.e. the measurement light shifts
    the effective precession frequency from ``omega0`` down to
    approximately ``omega0 - r theta``.
    """
    if not math.isfinite(theta) or abs(theta) >= math.pi / 2:
        raise ValueError(f"theta must satisfy |theta| < pi/2, got {theta!r}")
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate!r}")
    ct = math.cos(theta)
    st = math.sin(theta)
    return MeasurementSetup(
        theta=theta,
        rate=rate,
        omega0=omega0,
        asymmetry=st * ct,
        a_up=complex(0.5 * (ct + st), -0.5),
        a_down=complex(0.5 * (ct - st), -0.5),
        b_up=complex(0.5 * (ct - st), 0.5),
        b_down=complex(0.5 * (ct + st), 0.5),
    )


@dataclass(frozen=True)
class PureQubitState:
    """Normalized amplitude pair ``(c_up, c_down)`` in the sigma_z basis."""

    c_up: complex
    c_down: complex

    @classmethod
    def from_amplitudes(cls, c_up: complex, c_down: complex) -> "PureQubitState":
        """Normalize an arbitrary nonzero amplitude pair."""
        norm = math.sqrt(abs(c_up) ** 2 + abs(c_down) ** 2)
        if norm == 0.0 or not math.isfinite(norm):
            raise ValueError("amplitude pair must be nonzero and finite")
        return cls(c_up / norm, c_down / norm)

    @classmethod
    def from_polarization(cls, z: float, azimuth: float = 0.0) -> "PureQubitState":
        """Pure state with ``<sigma_z> = z`` and transverse angle ``azimuth``.

        ``z = 0, azimuth = 0`` gives the ``+x`` state ``u = (1, 0, 0)``.
        """
        if not -1.0 <= z <= 1.0:
            raise ValueError(f"z must lie in [-1, 1], got {z!r}")
        c_up = math.sqrt(0.5 * (1.0 + z))
        c_down = math.sqrt(0.5 * (1.0 - z)) * complex(math.cos(azimuth), math.sin(azimuth))
        return cls(c_up, c_down)

    @property
    def polarization(self) -> float:
        """``<sigma_z> = |c_up|^2 - |c_down|^2``."""
        return abs(self.c_up) ** 2 - abs(self.c_down) ** 2

    @property
    def bloch_vector(self) -> tuple[float, float, float]:
        """Pauli expectation values ``(u_x, u_y, u_z)``.

        ``u_x + i u_y = 2 conj(c_up) c_down``, so free evolution under a
        positive level splitting precesses ``u_x`` into ``u_y``.
        """
        v = self.c_up.conjugate() * self.c_down
        return (2.0 * v.real, 2.0 * v.imag, self.polarization)

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.c_up) ** 2 + abs(self.c_down) ** 2)


def channel_probabilities(state: PureQubitState, setup: MeasurementSetup) -> tuple[float, float]:
    """Probabilities ``(p_A, p_B)`` for the next photon.

    ``p_A = (1 + s z) / 2`` and ``p_B = 1 - p_A`` with
    ``s = setup.asymmetry``; both are clamped only by the arithmetic,
    never post-hoc, and sum to 1 exactly.
    """
    z = state.polarization
    p_a = 0.5 * (1.0 + setup.asymmetry * z)
    return (p_a, 1.0 - p_a)


def apply_detection(
    state: PureQubitState, channel: DetectionChannel, setup: MeasurementSetup
) -> PureQubitState:
    """Collapse the state after one photon lands on ``channel``.

    The amplitudes are multiplied by the channel's Kraus eigenvalues and
    renormalized.  The polarization obeys the exact Mobius update
    ``z' = (z + s) / (1 + z s)`` for channel A and
    ``z' = (z - s) / (1 - z s)`` for channel B.
    """
    if channel == DetectionChannel.A:
        c_up = setup.a_up * state.c_up
        c_down = setup.a_down * state.c_down
    else:
        c_up = setup.b_up * state.c_up
        c_down = setup.b_down * state.c_down
    norm = math.sqrt(abs(c_up) ** 2 + abs(c_down) ** 2)
    if norm == 0.0:
        raise ValueError("detection annihilated the state; amplitudes were not normalized")
    return PureQubitState(c_up / norm, c_down / norm)


def evolve_coherent(
    state: PureQubitState,
    fields: tuple[float, float, float],
    omega0: float,
    dt: float,
) -> PureQubitState:
    """Exact unitary rotation over one inter-photon interval.

    The Hamiltonian (units of angular frequency) is
    ``H = (omega0/2) sigma_z + h_x sigma_x + h_y sigma_y + h_z sigma_z``,
    so the Bloch vector rotates right-handedly about
    ``n = (h_x, h_y, h_z + omega0/2)`` by angle ``2 |n| dt``.  The matrix
    exponential is evaluated in closed form; no step-size restriction.
    """
    h_x, h_y, h_z = fields
    n_x, n_y, n_z = h_x, h_y, h_z + 0.5 * omega0
    mag = math.sqrt(n_x * n_x + n_y * n_y + n_z * n_z)
    if mag == 0.0 or dt == 0.0:
        return state
    half_angle = mag * dt
    c = math.cos(half_angle)
    s = math.sin(half_angle) / mag
    # U = cos(|n| dt) I - i sin(|n| dt) (n.sigma)/|n|
    u00 = complex(c, -s * n_z)
    u01 = complex(-s * n_y, -s * n_x)
    u10 = complex(s * n_y, -s * n_x)
    u11 = complex(c, s * n_z)
    return PureQubitState(
        u00 * state.c_up + u01 * state.c_down,
        u10 * state.c_up + u11 * state.c_down,
    )


def sequence_log_probability(
    z0: float, n_a: int, n_b: int, setup: MeasurementSetup
) -> float:
    """Log probability of any one detection record with counts ``(n_a, n_b)``.

    The probability depends on the record only through the counts:
    the Kraus operators commute, so every ordering of the same counts is
    equally likely.  Starting from polarization ``z0``,

    ``P = w+ pa^n_a pb^n_b + w- pb^n_a pa^n_b``

    with ``w+- = (1 +/- z0)/2``, ``pa = (1+s)/2``, ``pb = (1-s)/2``.
    Evaluated with ``logaddexp`` so that photon counts of 10^6 or more
    neither overflow nor underflow.
    """
    if n_a < 0 or n_b < 0:
        raise ValueError("photon counts must be non-negative")
    if not -1.0 <= z0 <= 1.0:
        raise ValueError(f"z0 must lie in [-1, 1], got {z0!r}")
    s = setup.asymmetry
    log_pa = math.log1p(s) - math.log(2.0)
    log_pb = math.log1p(-s) - math.log(2.0)
    term_up = n_a * log_pa + n_b * log_pb
    term_down = n_a * log_pb + n_b * log_pa
    w_up = 0.5 * (1.0 + z0)
    w_down = 0.5 * (1.0 - z0)
    if w_up == 0.0:
        return math.log(w_down) + term_down
    if w_down == 0.0:
        return math.log(w_up) + term_up
    return float(np.logaddexp(math.log(w_up) + term_up, math.log(w_down) + term_down))


def sequence_probability(z0: float, n_a: int, n_b: int, setup: MeasurementSetup) -> float:
    """Probability of one detection record with counts ``(n_a, n_b)``; see
    :func:`sequence_log_probability`."""
    return math.exp(sequence_log_probability(z0, n_a, n_b, setup))


def fidelity(first: PureQubitState, second: PureQubitState) -> float:
    """Squared overlap ``|<first|second>|^2`` (global phase irrelevant)."""
    ov = first.c_up.conjugate() * second.c_up + first.c_down.conjugate() * second.c_down
    return abs(ov) ** 2
