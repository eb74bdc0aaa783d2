"""Colored Langevin fields driving the qubit between photon arrivals.

Each Cartesian component ``h_i`` of the classical noise field follows an
independent stationary Ornstein-Uhlenbeck process with

    <h_i(t) h_j(t + tau)> = delta_ij * S_i * (alpha / 2) * exp(-alpha tau)

so ``S_i`` is the zero-frequency spectral weight (the integral of the
autocovariance over all lags) and ``1/alpha`` the correlation time.  The
update rule uses the exact discrete-time solution of the OU equation, so
any step size is statistically exact; there is no Euler error to control.

The normalization of ``S_i`` is pinned by the fast-noise limit: a spin
ensemble exposed to transverse components ``S_x`` and ``S_y`` must
depolarize at ``d<z>/dt = -2 (S_x + S_y) <z>``.  The dedicated white
mode (``white=True``) realizes that limit directly by redrawing
``h_i ~ N(0, S_i / dt)`` every step instead of integrating the OU
recursion, which sidesteps the stiff ``alpha -> inf`` regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

__all__ = [
    "LangevinConfig",
    "LangevinState",
    "init_stationary",
    "ou_step",
    "ou_decay",
    "ou_kick_std",
    "white_field_std",
    "stationary_std",
    "theoretical_autocorrelation",
    "sample_path",
]

_AXES = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}


@dataclass(frozen=True)
class LangevinConfig:
    """Noise strengths ``S_i`` (rad^2/s), decorrelation rate ``alpha`` (1/s).

    ``white=True`` switches every stepper to the delta-correlated mode;
    ``alpha`` is then irrelevant to the dynamics but must stay positive.
    """

    s_x: float
    s_y: float
    s_z: float
    alpha: float
    white: bool = False

    def __post_init__(self):
        for name in ("s_x", "s_y", "s_z"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValueError(f"alpha must be finite and > 0, got {self.alpha!r}")

    @property
    def psd(self) -> np.ndarray:
        return np.array([self.s_x, self.s_y, self.s_z])


@dataclass
class LangevinState:
    """Current field triple plus the generator that drives it (single owner)."""

    h: np.ndarray
    rng: np.random.Generator = field(repr=False)


def stationary_std(config: LangevinConfig) -> np.ndarray:
    """Marginal standard deviation ``sqrt(S_i alpha / 2)`` per axis.

    The white mode has no dt-independent marginal; all zeros are
    returned and the fields appear only through :func:`ou_step`.
    """
    if config.white:
        return np.zeros(3)
    return np.sqrt(config.psd * (0.5 * config.alpha))


def ou_decay(alpha: float, dt: float) -> float:
    """Deterministic memory factor ``exp(-alpha dt)`` of one step."""
    return math.exp(-alpha * dt)


def ou_kick_std(config: LangevinConfig, dt: float) -> np.ndarray:
    """Innovation standard deviation per axis for one exact OU step.

    ``sqrt((S_i alpha / 2) (1 - exp(-2 alpha dt)))``; together with
    :func:`ou_decay` this reproduces the stationary variance for every
    ``dt`` and composes exactly over split steps.
    """
    spread = -math.expm1(-2.0 * config.alpha * dt)
    return np.sqrt(config.psd * (0.5 * config.alpha * spread))


def white_field_std(config: LangevinConfig, dt: float) -> np.ndarray:
    """Per-step field scale ``sqrt(S_i / dt)`` of the delta-correlated mode."""
    return np.sqrt(config.psd / dt)


def init_stationary(config: LangevinConfig, rng: np.random.Generator) -> LangevinState:
    """Draw the field triple from its stationary Gaussian marginal."""
    h = stationary_std(config) * rng.standard_normal(3)
    return LangevinState(h=h, rng=rng)


def ou_step(state: LangevinState, config: LangevinConfig, dt: float) -> LangevinState:
    """Advance the fields by ``dt`` (exact for any step size).

    Colored mode: ``h' = h e^{-alpha dt} + xi * kick_std(dt)``.  White
    mode: ``h'`` is an independent fresh draw of scale ``sqrt(S_i/dt)``.
    ``dt = 0`` is a no-op that consumes no randomness.
    """
    if dt < 0.0:
        raise ValueError(f"dt must be >= 0, got {dt!r}")
    if dt == 0.0:
        return state
    xi = state.rng.standard_normal(3)
    if config.white:
        h = white_field_std(config, dt) * xi
    else:
        h = state.h * ou_decay(config.alpha, dt) + ou_kick_std(config, dt) * xi
    return LangevinState(h=h, rng=state.rng)


def theoretical_autocorrelation(config: LangevinConfig, axis, tau: float) -> float:
    """Stationary autocovariance ``S_i (alpha/2) exp(-alpha tau)`` at lag tau."""
    if tau < 0.0:
        raise ValueError(f"tau must be >= 0, got {tau!r}")
    s_i = config.psd[_AXES[axis]]
    return s_i * 0.5 * config.alpha * math.exp(-config.alpha * tau)


def sample_path(
    config: LangevinConfig,
    axis,
    n_steps: int,
    dt: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Stationary path of one field component sampled every ``dt``.

    Returns ``n_steps`` values.  Colored mode runs the exact AR(1)
    recursion from a stationary initial draw (evaluated as a linear
    filter, so long paths are cheap); white mode returns independent
    draws of scale ``sqrt(S_i/dt)``.
    """
    if n_steps < 0:
        raise ValueError(f"n_steps must be >= 0, got {n_steps!r}")
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    s_i = config.psd[_AXES[axis]]
    if config.white:
        return math.sqrt(s_i / dt) * rng.standard_normal(n_steps)
    sigma = math.sqrt(s_i * 0.5 * config.alpha)
    h0 = sigma * rng.standard_normal()
    decay = ou_decay(config.alpha, dt)
    kicks = math.sqrt(s_i * 0.5 * config.alpha * -math.expm1(-2.0 * config.alpha * dt))
    innovations = kicks * rng.standard_normal(n_steps)
    path, _ = signal.lfilter([1.0], [1.0, -decay], innovations, zi=[decay * h0])
    return path
