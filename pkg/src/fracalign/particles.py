"""
Cucker-Smale agents on the 2 pi-periodic circle with a regularized,
periodized power-law kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .oracle import image_tail

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ParticleConfig:
    n_agents: int = 64
    alpha: float = 0.5
    epsilon: float = 1e-3
    k_images: int = 64
    t_end: float = 10.0
    dt: float | None = None
    seed: int = 0
    v_amplitude: float = 0.5
    output_stride: int = 10

    def __post_init__(self):
        if self.n_agents < 2:
            raise ValueError(f"n_agents must be >= 2, got {self.n_agents}")
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.k_images < 8:
            raise ValueError(f"k_images must be >= 8, got {self.k_images}")
        if self.t_end < 0.0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if self.dt is not None and not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.v_amplitude > 0.0:
            raise ValueError(f"v_amplitude must be positive, got {self.v_amplitude}")
        if self.output_stride < 1:
            raise ValueError(f"output_stride must be >= 1, got {self.output_stride}")

    @property
    def step(self) -> float:
        """Fixed RK4 step: ``1e-3 / v_amplitude`` unless set explicitly."""
        return self.dt if self.dt is not None else 1e-3 / self.v_amplitude


@dataclass(frozen=True, eq=False)
class ParticleState:
    positions: np.ndarray
    velocities: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        x = np.mod(np.asarray(self.positions, dtype=float), TWO_PI)
        v = np.asarray(self.velocities, dtype=float)
        if x.ndim != 1 or x.shape != v.shape:
            raise ValueError("positions and velocities must be 1-D arrays of equal length")
        if x.size < 2:
            raise ValueError("need at least two agents")
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "velocities", v)


def torus_distance(a, b):
    # |a - b| first so the result is bitwise symmetric in (a, b).
    d = np.mod(np.abs(np.asarray(a) - np.asarray(b)), TWO_PI)
    return np.minimum(d, TWO_PI - d)


def kernel_periodized(r, alpha: float, epsilon: float, images: int = 64):
    """Regularized periodized kernel ``sum_{|k|<=K} (|r + 2 pi k|^2 + eps^2)^{-(1+alpha)/2}`` plus tail.

    ``r`` is reduced to the torus distance first, so the result is exactly
    symmetric under ``r -> 2 pi - r``.
    """
    d = torus_distance(np.asarray(r, dtype=float), 0.0)
    k = np.arange(-images, images + 1, dtype=float)
    sq = (d[..., None] + TWO_PI * k) ** 2 + epsilon**2
    return (sq ** (-0.5 * (1.0 + alpha))).sum(axis=-1) + image_tail(d, alpha, images)


@lru_cache(maxsize=16)
def _far_images(alpha: float, epsilon: float, images: int):
    """Chebyshev interpolant of the ``k != 0`` image sum on ``[0, pi]``.

    The far images are analytic there (nearest singularity sits a distance
    ``pi`` outside the interval), so degree 60 is accurate to roundoff.
    """
    def far(d):
        return kernel_periodized(d, alpha, epsilon, images) - (d**2 + epsilon**2) ** (-0.5 * (1.0 + alpha))

    return np.polynomial.Chebyshev.interpolate(far, 60, domain=[0.0, np.pi])


def pair_weights(positions: np.ndarray, alpha: float, epsilon: float, images: int) -> np.ndarray:
    d = torus_distance(positions[:, None], positions[None, :])
    w = (d**2 + epsilon**2) ** (-0.5 * (1.0 + alpha)) + _far_images(alpha, epsilon, images)(d)
    np.fill_diagonal(w, 0.0)
    return w


def particle_rhs(state: ParticleState, config: ParticleConfig) -> tuple[np.ndarray, np.ndarray]:
    v = state.velocities
    w = pair_weights(state.positions, config.alpha, config.epsilon, config.k_images)
    # Pair forces are exactly antisymmetric; correctly rounded row sums keep
    # sum(dv) at roundoff even when near-coincident agents exert huge forces.
    forces = w * (v[None, :] - v[:, None])
    dv = np.array([math.fsum(row) for row in forces.tolist()]) / v.size
    return v.copy(), dv


def _rk4(state: ParticleState, dt: float, config: ParticleConfig) -> ParticleState:
    x, v = state.positions, state.velocities

    def f(xx, vv):
        return particle_rhs(ParticleState(xx, vv, state.t), config)

    k1x, k1v = f(x, v)
    k2x, k2v = f(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v)
    k3x, k3v = f(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v)
    k4x, k4v = f(x + dt * k3x, v + dt * k3v)
    x_new = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    v_new = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(v_new))):
        raise FloatingPointError(f"non-finite particle state at t={state.t + dt:.17g}")
    return ParticleState(x_new, v_new, state.t + dt)


def initial_particles(config: ParticleConfig) -> ParticleState:
    rng = np.random.default_rng(config.seed)
    x = rng.uniform(0.0, TWO_PI, config.n_agents)
    v = rng.uniform(-config.v_amplitude, config.v_amplitude, config.n_agents)
    return ParticleState(x, v, 0.0)


def position_diameter(positions: np.ndarray) -> float:
    """Length of the shortest arc containing every agent."""
    x = np.sort(np.mod(positions, TWO_PI))
    gaps = np.diff(np.concatenate([x, [x[0] + TWO_PI]]))
    return float(TWO_PI - gaps.max())


@dataclass(frozen=True)
class ParticleRecord:
    t: float
    velocity_diameter: float
    position_diameter: float
    mean_velocity: float


def observe(state: ParticleState) -> ParticleRecord:
    v = state.velocities
    return ParticleRecord(state.t, float(v.max() - v.min()),
                          position_diameter(state.positions), float(v.mean()))


def run_particles(config: ParticleConfig, state: ParticleState | None = None):
    """Fixed-step RK4 integration; returns ``(final_state, records)``."""
    state = initial_particles(config) if state is None else state
    records = [observe(state)]
    dt = config.step
    steps = int(round(config.t_end / dt))
    for i in range(1, steps + 1):
        state = _rk4(state, dt, config)
        state = ParticleState(state.positions, state.velocities, i * dt)
        if i % config.output_stride == 0 or i == steps:
            records.append(observe(state))
    return state, records
