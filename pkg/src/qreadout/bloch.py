"""Ensemble-level Bloch dynamics of the monitored qubit.

The ensemble mean polarization obeys linear relaxation equations: the
transverse components decay at 1/T2 while precessing at the detuning
(the bare splitting minus the measurement-induced Stark shift), and the
longitudinal component decays at 1/T1, either toward 0 (stimulated
transitions, symmetric noise) or toward -1 (spontaneous decay).

Rate coefficients come from :func:`qreadout.analytic.relaxation_rates`
via :func:`params_from_rates`, so the rate formulas live in one place.
Integration is fixed-step classical Runge-Kutta: deliberately not
adaptive, so identical inputs give bit-identical curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .analytic import RateSet

__all__ = [
    "RelaxationMode",
    "BlochState",
    "BlochParams",
    "BlochTrajectory",
    "SteadyState",
    "params_from_rates",
    "integrate",
    "steady_state",
]

# dt * max(rate, |detuning|) above this is rejected at entry
STEP_SAFETY_LIMIT = 0.1


class RelaxationMode(Enum):
    STIMULATED = "stimulated"
    SPONTANEOUS = "spontaneous"


@dataclass(frozen=True)
class BlochState:
    u_x: float
    u_y: float
    u_z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u_x, self.u_y, self.u_z])

    def norm(self) -> float:
        return math.sqrt(self.u_x**2 + self.u_y**2 + self.u_z**2)


@dataclass(frozen=True)
class BlochParams:
    """Relaxation rates plus the Stark-shifted precession frequency."""

    inv_t1: float
    inv_t2: float
    detuning: float
    mode: RelaxationMode = RelaxationMode.STIMULATED

    def __post_init__(self):
        for name in ("inv_t1", "inv_t2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if not math.isfinite(self.detuning):
            raise ValueError(f"detuning must be finite, got {self.detuning!r}")

    @property
    def stiffest_rate(self) -> float:
        return max(self.inv_t1, self.inv_t2, abs(self.detuning))


def params_from_rates(
    rates: RateSet,
    omega0: float,
    mode: RelaxationMode = RelaxationMode.STIMULATED,
) -> BlochParams:
    """Bind Bloch coefficients to a computed rate set.

    ``omega0`` must be the same bare splitting the rate set was computed
    with; the detuning is omega0 minus the Stark shift.
    """
    return BlochParams(
        inv_t1=rates.inv_t1,
        inv_t2=rates.inv_t2,
        detuning=omega0 - rates.stark_shift,
        mode=mode,
    )


@dataclass
class BlochTrajectory:
    """Integration output: row k of ``states`` is the state at ``times[k]``."""

    times: np.ndarray
    states: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, k: int) -> BlochState:
        return BlochState(*self.states[k])

    @property
    def final(self) -> BlochState:
        return BlochState(*self.states[-1])

    def transverse_power(self) -> np.ndarray:
        """u_x^2 + u_y^2 along the curve."""
        return self.states[:, 0] ** 2 + self.states[:, 1] ** 2


class SteadyState(tuple):
    """(state, degenerate_line) pair from :func:`steady_state`."""

    __slots__ = ()

    def __new__(cls, state: BlochState, degenerate_line: bool):
        return super().__new__(cls, (state, degenerate_line))

    @property
    def state(self) -> BlochState:
        return self[0]

    @property
    def degenerate_line(self) -> bool:
        return self[1]


def _derivative(u: np.ndarray, params: BlochParams) -> np.ndarray:
    du = np.empty(3)
    du[0] = -params.inv_t2 * u[0] - params.detuning * u[1]
    du[1] = -params.inv_t2 * u[1] + params.detuning * u[0]
    if params.mode is RelaxationMode.SPONTANEOUS:
        du[2] = -params.inv_t1 * (1.0 + u[2])
    else:
        du[2] = -params.inv_t1 * u[2]
    return du


def integrate(
    u0: BlochState, params: BlochParams, t_end: float, dt: float
) -> BlochTrajectory:
    """Fixed-step RK4 from t=0 to t_end inclusive.

    The step must satisfy dt * max(1/T1, 1/T2, |detuning|) <= 0.1; a
    violating dt is rejected up front with a suggested replacement.  The
    final step is shortened to land on t_end exactly.
    """
    if not t_end > 0.0:
        raise ValueError(f"t_end must be > 0, got {t_end!r}")
    if not dt > 0.0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    stiff = params.stiffest_rate
    if dt * stiff > STEP_SAFETY_LIMIT * (1.0 + 1e-12):
        suggested = STEP_SAFETY_LIMIT / stiff
        raise ValueError(
            f"dt={dt!r} too coarse for rates (dt*rate={dt * stiff:.3g} > "
            f"{STEP_SAFETY_LIMIT}); use dt <= {suggested:.6g}"
        )
    if u0.norm() > 1.0 + 1e-9:
        raise ValueError(f"initial state norm {u0.norm()!r} exceeds 1")

    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    times = np.minimum(np.arange(n_steps + 1) * dt, t_end)
    states = np.empty((n_steps + 1, 3))
    states[0] = u0.as_array()
    u = states[0].copy()
    for k in range(n_steps):
        h = times[k + 1] - times[k]
        k1 = _derivative(u, params)
        k2 = _derivative(u + 0.5 * h * k1, params)
        k3 = _derivative(u + 0.5 * h * k2, params)
        k4 = _derivative(u + h * k3, params)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k + 1] = u
    return BlochTrajectory(times=times, states=states)


def steady_state(params: BlochParams, u_z0: float = 0.0) -> SteadyState:
    """Fixed point of the relaxation equations.

    When a component has no restoring dynamics (1/T1 = 0 leaves u_z
    frozen; 1/T2 = 0 with zero detuning leaves the transverse plane
    frozen) the fixed points form a line or plane; the returned state
    uses ``u_z0`` for the frozen longitudinal component and the result
    is flagged ``degenerate_line``.  With every rate and the detuning
    zero there is nothing to single out and a ValueError is raised.
    """
    z_frozen = params.inv_t1 == 0.0
    transverse_frozen = params.inv_t2 == 0.0 and params.detuning == 0.0
    if z_frozen and transverse_frozen:
        raise ValueError("all rates zero: every state is steady")
    if z_frozen:
        u_z = u_z0
    elif params.mode is RelaxationMode.SPONTANEOUS:
        u_z = -1.0
    else:
        u_z = 0.0
    return SteadyState(BlochState(0.0, 0.0, u_z), z_frozen or transverse_frozen)
