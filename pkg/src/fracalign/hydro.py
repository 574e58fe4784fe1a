"""
Pseudo-spectral solver for the 1D Euler alignment system

    rho_t + (rho u)_x = 0,
    u_t + u u_x = T(rho, u),

with the fractional commutator forcing of :func:`fracalign.spectral.commutator_force`.
Time stepping is explicit three-stage SSP Runge-Kutta with an adaptive
transport/diffusion step bound.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .spectral import (
    RealField,
    TorusGrid,
    commutator_force,
    dealias,
    dealias_product,
    derivative,
    frac_constant,
    fractional_laplacian,
    make_grid,
)

logger = logging.getLogger(__name__)

VACUUM_FLOOR = 1e-8
DT_CAP = 1e-2
VELOCITY_EPS = 1e-12


class SolverAbort(RuntimeError):
    """A run stopped early; ``t`` is the time of the last valid state."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t={t:.17g}")
        self.t = t


class VacuumBreach(SolverAbort):
    pass


class NonFiniteState(SolverAbort):
    pass


@dataclass(frozen=True, eq=False)
class HydroState:
    rho: RealField
    u: RealField
    t: float = 0.0

    def __post_init__(self):
        if self.rho.grid != self.u.grid:
            raise ValueError("rho and u must share one grid")
        if not (np.all(np.isfinite(self.rho.samples)) and np.all(np.isfinite(self.u.samples))):
            raise NonFiniteState("non-finite field values", self.t)
        if np.min(self.rho.samples) <= 0.0:
            raise VacuumBreach("density is not positive", self.t)

    @property
    def grid(self) -> TorusGrid:
        return self.rho.grid


# Presets: name -> (defaults, builder(grid, **params) -> (rho0, u0)).
def _paper_like(x, rho_amplitude=0.5, u_amplitude=0.2):
    return 1.0 + rho_amplitude * np.cos(x), u_amplitude * np.sin(x)


def _sharp(x, rho_amplitude=0.9, u_amplitude=0.2):
    return 1.0 + rho_amplitude * np.cos(x), u_amplitude * np.sin(x)


def _multiwave(x, rho_amplitude=0.3, u_amplitude=0.2, u_drift=0.0):
    u = u_drift + u_amplitude * (np.sin(x) + 0.5 * np.cos(2 * x) + 0.25 * np.sin(3 * x + 0.3))
    return 1.0 + rho_amplitude * np.cos(x), u


PRESETS: dict[str, Callable] = {
    "paper-like": _paper_like,
    "sharp": _sharp,
    "multiwave": _multiwave,
}

PRESET_PARAMS: dict[str, tuple[str, ...]] = {
    "paper-like": ("rho_amplitude", "u_amplitude"),
    "sharp": ("rho_amplitude", "u_amplitude"),
    "multiwave": ("rho_amplitude", "u_amplitude", "u_drift"),
}


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.5
    n: int = 512
    t_end: float = 20.0
    cfl_safety: float = 0.5
    output_stride: int = 20
    preset: str = "paper-like"
    preset_params: dict = field(default_factory=dict)
    snapshot_stride: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.t_end < 0.0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.output_stride < 1:
            raise ValueError(f"output_stride must be >= 1, got {self.output_stride}")
        if self.snapshot_stride < 0:
            raise ValueError(f"snapshot_stride must be >= 0, got {self.snapshot_stride}")
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        unknown = set(self.preset_params) - set(PRESET_PARAMS[self.preset])
        if unknown:
            raise ValueError(f"unknown parameters for preset {self.preset!r}: {sorted(unknown)}")
        make_grid(self.n)


def initial_state(config: SolverConfig) -> HydroState:
    grid = make_grid(config.n)
    rho, u = PRESETS[config.preset](grid.nodes, **config.preset_params)
    return HydroState(RealField(rho, grid), RealField(u, grid), 0.0)


def rhs(state: HydroState, alpha: float) -> tuple[RealField, RealField]:
    rho, u = state.rho, state.u
    drho = derivative(dealias_product(rho, u), 1)
    advect = dealias_product(u, derivative(u, 1))
    force = commutator_force(rho, u, alpha)
    return (RealField(-drho.samples, rho.grid),
            RealField(force.samples - advect.samples, rho.grid))


def e_quantity(state: HydroState, alpha: float) -> RealField:
    """``e = u_x - Lambda^alpha rho``."""
    ux = derivative(state.u, 1)
    return RealField(ux.samples - fractional_laplacian(state.rho, alpha).samples, state.grid)


def cfl_dt(state: HydroState, alpha: float, safety: float, dt_cap: float = DT_CAP) -> float:
    dx = state.grid.dx
    transport = dx / (VELOCITY_EPS + np.max(np.abs(state.u.samples)))
    diffusion = dx**alpha / (frac_constant(alpha) * np.max(state.rho.samples))
    return float(safety * min(transport, diffusion, dt_cap))


def _stage(rho: np.ndarray, u: np.ndarray, grid: TorusGrid, t: float) -> HydroState:
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(u))):
        raise NonFiniteState("non-finite field values", t)
    if np.min(rho) <= VACUUM_FLOOR:
        raise VacuumBreach(f"vacuum breach (min rho = {np.min(rho):.3e})", t)
    # Keep the state inside the dealiased band: the filtered products never
    # damp modes above n/3, so roundoff parked there would otherwise persist.
    return HydroState(dealias(RealField(rho, grid)), dealias(RealField(u, grid)), t)


def step_ssprk3(state: HydroState, dt: float, alpha: float) -> HydroState:
    """One Shu-Osher SSP-RK3 step."""
    if not dt > 0.0:
        raise ValueError(f"time step must be positive, got {dt}")
    grid, t = state.grid, state.t
    r0, u0 = state.rho.samples, state.u.samples

    dr, du = rhs(state, alpha)
    s1 = _stage(r0 + dt * dr.samples, u0 + dt * du.samples, grid, t)

    dr, du = rhs(s1, alpha)
    s2 = _stage(0.75 * r0 + 0.25 * (s1.rho.samples + dt * dr.samples),
                0.75 * u0 + 0.25 * (s1.u.samples + dt * du.samples), grid, t)

    dr, du = rhs(s2, alpha)
    return _stage(r0 / 3.0 + 2.0 / 3.0 * (s2.rho.samples + dt * dr.samples),
                  u0 / 3.0 + 2.0 / 3.0 * (s2.u.samples + dt * du.samples), grid, t + dt)


def run(config: SolverConfig, on_snapshot=None):
    """Integrate the configured preset to ``t_end``.

    Records diagnostics at step 0, every ``output_stride`` steps and at the
    final step. ``on_snapshot(state)`` is called every ``snapshot_stride``
    steps (and at both ends) when the stride is positive.

    Returns ``(final_state, records)``.
    """
    from .diagnostics import FrameTracker

    alpha = config.alpha
    state = initial_state(config)
    tracker = FrameTracker(state, alpha)
    records = [tracker.record(state)]
    snap = config.snapshot_stride
    if snap and on_snapshot is not None:
        on_snapshot(state)

    t_end = config.t_end
    steps = 0
    while t_end - state.t > 1e-12 * max(1.0, t_end):
        dt = min(cfl_dt(state, alpha, config.cfl_safety), t_end - state.t)
        try:
            state = step_ssprk3(state, dt, alpha)
        except SolverAbort as exc:
            logger.error("run aborted: %s", exc)
            raise
        steps += 1
        last = t_end - state.t <= 1e-12 * max(1.0, t_end)
        if steps % config.output_stride == 0 or last:
            records.append(tracker.record(state))
        if snap and on_snapshot is not None and (steps % snap == 0 or last):
            on_snapshot(state)
    logger.info("run finished: %d steps, t=%.6g", steps, state.t)
    return state, records
