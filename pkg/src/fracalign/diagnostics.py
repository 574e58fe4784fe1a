"""
Observables monitored along hydrodynamic runs, decay-rate fits and the
moving-frame flocking residual.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields

import numpy as np

from .hydro import HydroState, e_quantity
from .spectral import (
    RealField,
    derivative,
    dissipation_functional,
    refined_extremum,
    shift,
)

TRUNCATION_FLOOR = 1e-14


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    M: float
    P: float
    e_mass: float
    V: float
    sup_ux: float
    sup_uxx: float
    sup_rhox: float
    rho_min: float
    rho_max: float
    er_min: float
    er_max: float
    q_min: float
    q_max: float
    flock_residual: float

    def __post_init__(self):
        values = astuple(self)
        if not all(np.isfinite(values)):
            raise ValueError(f"non-finite diagnostic at t={self.t}")
        if self.rho_min > self.rho_max or self.er_min > self.er_max or self.q_min > self.q_max:
            raise ValueError(f"inverted extrema at t={self.t}")

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    prefactor: float
    r_squared: float
    window: tuple[float, float]
    points: int

    def as_dict(self) -> dict:
        return {
            "delta": self.rate,
            "C": self.prefactor,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "points": self.points,
        }


def extrema(f: RealField, subgrid: bool = True) -> tuple[float, float]:
    """``(min, max)`` of a field; ``subgrid`` polishes grid-scan extrema on the interpolant."""
    if not subgrid:
        return float(np.min(f.samples)), float(np.max(f.samples))
    return refined_extremum(f, "min")[1], refined_extremum(f, "max")[1]


def sup_norm(f: RealField, subgrid: bool = True) -> float:
    lo, hi = extrema(f, subgrid)
    return max(abs(lo), abs(hi))


def record(state: HydroState, alpha: float, previous_frame: RealField | None = None,
           ubar: float = 0.0, subgrid: bool = True) -> DiagnosticsRecord:
    """Evaluate every monitored quantity on ``state``.

    ``previous_frame`` is the moving-frame density of an earlier record;
    ``flock_residual`` is the sup-norm gap to it (0 when absent).
    """
    rho, u, grid = state.rho, state.u, state.grid
    e = e_quantity(state, alpha)
    ratio = RealField(e.samples / rho.samples, grid)
    q = RealField(derivative(ratio, 1).samples / rho.samples, grid)
    ux = derivative(u, 1)

    u_lo, u_hi = extrema(u, subgrid)
    rho_lo, rho_hi = extrema(rho, subgrid)
    er_lo, er_hi = extrema(ratio, subgrid)
    q_lo, q_hi = extrema(q, subgrid)

    residual = 0.0
    if previous_frame is not None:
        frame = moving_frame_density(state, ubar)
        residual = flock_residual(previous_frame, frame, subgrid)

    return DiagnosticsRecord(
        t=state.t,
        M=rho.integral(),
        P=RealField(rho.samples * u.samples, grid).integral(),
        e_mass=e.integral(),
        V=u_hi - u_lo,
        sup_ux=sup_norm(ux, subgrid),
        sup_uxx=sup_norm(derivative(u, 2), subgrid),
        sup_rhox=sup_norm(derivative(rho, 1), subgrid),
        rho_min=rho_lo,
        rho_max=rho_hi,
        er_min=er_lo,
        er_max=er_hi,
        q_min=q_lo,
        q_max=q_hi,
        flock_residual=residual,
    )


def mean_velocity(records) -> float:
    """Limiting flock velocity ``P(0) / M(0)``."""
    if not records:
        raise ValueError("no records")
    first = records[0]
    if first.M == 0.0:
        raise ValueError("zero initial mass")
    return first.P / first.M


def moving_frame_density(state: HydroState, ubar: float) -> RealField:
    """Density seen from the frame moving with ``ubar``: ``rho(x + t ubar, t)``."""
    offset = state.t * ubar
    if offset == 0.0:
        return state.rho
    return shift(state.rho, offset)


def flock_residual(early: RealField, late: RealField, subgrid: bool = True) -> float:
    if early.grid != late.grid:
        raise ValueError(f"grid mismatch: n={early.grid.n} vs n={late.grid.n}")
    return sup_norm(RealField(late.samples - early.samples, late.grid), subgrid)


class FrameTracker:
    """Records a run, carrying the mean velocity and previous moving-frame density between calls."""

    def __init__(self, initial: HydroState, alpha: float, subgrid: bool = True):
        self.alpha = alpha
        self.subgrid = subgrid
        mass = initial.rho.integral()
        momentum = RealField(initial.rho.samples * initial.u.samples, initial.grid).integral()
        self.ubar = momentum / mass
        self._previous: RealField | None = None

    def record(self, state: HydroState) -> DiagnosticsRecord:
        rec = record(state, self.alpha, self._previous, self.ubar, self.subgrid)
        self._previous = moving_frame_density(state, self.ubar)
        return rec


def fit_decay_rate(series, window=None) -> DecayFit:
    """Least-squares fit of ``log value = log C - delta t``.

    ``series`` is a sequence of ``(t, value)`` pairs (or a 2xN array). Within
    ``window = (t0, t1)`` the fit stops at the first value below 1e-14.
    """
    data = np.asarray(series, dtype=float)
    if data.ndim != 2:
        raise ValueError("series must be (t, value) pairs")
    if data.shape[1] != 2 and data.shape[0] == 2:
        data = data.T
    t, v = data[:, 0], data[:, 1]
    t0, t1 = (-np.inf, np.inf) if window is None else window
    inside = (t >= t0) & (t <= t1)
    t, v = t[inside], v[inside]
    order = np.argsort(t, kind="stable")
    t, v = t[order], v[order]
    small = np.nonzero(~(v >= TRUNCATION_FLOOR))[0]
    if small.size:
        t, v = t[: small[0]], v[: small[0]]
    if t.size < 4:
        raise ValueError(f"need at least 4 points in the fit window, got {t.size}")

    y = np.log(v)
    A = np.column_stack([np.ones_like(t), t])
    (intercept, slope), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (intercept + slope * t)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot <= 1e-300:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return DecayFit(rate=float(-slope), prefactor=float(np.exp(intercept)),
                    r_squared=r2, window=(float(t[0]), float(t[-1])), points=int(t.size))


def max_principle_ratio(state: HydroState, alpha: float, x_index: int | None = None, **rule) -> float:
    """``D_alpha u'(x+) V^alpha / |u'(x+)|^{2+alpha}`` at the grid argmax ``x+`` of ``|u'|``."""
    u = state.u
    ux = derivative(u, 1)
    V = float(np.max(u.samples) - np.min(u.samples))
    if x_index is None:
        x_index = int(np.argmax(np.abs(ux.samples)))
    slope = abs(float(ux.samples[x_index]))
    if V <= 0.0 or slope == 0.0:
        raise ValueError("degenerate velocity: amplitude or slope vanishes")
    dissipation = dissipation_functional(ux, alpha, x_index, **rule)
    return dissipation * V**alpha / slope ** (2.0 + alpha)
