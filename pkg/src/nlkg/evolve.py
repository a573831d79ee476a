"""Method-of-lines time stepping for  u_tt + 2 alpha u_t - u_xx + u = |u|^{p-1} u.

Classical RK4 on the first-order system (u, u_t); second-order central
Laplacian with homogeneous Dirichlet walls at +-L.  The dissipation
integral 2 alpha ∫ ||u_t||^2 dt is accumulated per step so that every
sample carries the discrete energy-balance residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import CentersTooClose, NonFinite
from .field import FieldState, Functionals, functionals, h_norm_sq

__all__ = ["EvolveConfig", "Trajectory", "TrajectorySample", "BlowupRecord",
           "step", "evolve", "localized_runs", "cutoff_mask"]


@dataclass
class EvolveConfig:
    p: float
    alpha: float
    dt: float
    t_max: float
    sample_every: int = 25
    blowup_norm_factor: float = 10.0
    blowup_norm_ref: float = 2.3094  # ||(Q, 0)||_H for N=1, p=3 unless overridden
    boundary: str = "dirichlet"
    linear: bool = False

    def validate(self, dx: float):
        if self.dt > 0.5 * dx + 1e-15:
            raise ValueError(f"CFL violated: dt={self.dt} > 0.5*dx={0.5 * dx}")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")


@dataclass
class TrajectorySample:
    time: float
    funcs: Functionals
    balance_residual: float
    extra: dict = dc_field(default_factory=dict)


@dataclass
class BlowupRecord:
    time: float
    reason: str
    last_h_norm: float


@dataclass
class Trajectory:
    samples: list
    events: list
    final_state: FieldState | None = None
    blowup: BlowupRecord | None = None

    @property
    def terminal_event(self):
        return self.events[-1] if self.events else None

    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.samples])

    def series(self, key: str) -> np.ndarray:
        if key in ("energy", "nehari", "p_func", "h_norm_sq"):
            return np.array([getattr(s.funcs, key) for s in self.samples])
        return np.array([s.extra.get(key, np.nan) for s in self.samples])


def _rhs(u, v, du, dv, dx2, p, alpha, linear):
    du[:] = v
    dv[1:-1] = u[2:]
    dv[1:-1] += u[:-2]
    dv[1:-1] -= 2.0 * u[1:-1]
    dv[0] = u[1] - 2.0 * u[0]
    dv[-1] = u[-2] - 2.0 * u[-1]
    dv /= dx2
    dv -= u
    dv -= 2.0 * alpha * v
    if not linear:
        dv += np.abs(u) ** (p - 1.0) * u


def step(state: FieldState, dt: float, p: float, alpha: float,
         linear: bool = False) -> FieldState:
    """One RK4 step; raises NonFinite if the update produces NaN/Inf."""
    out = state.copy()
    _step_inplace(out, dt, p, alpha, linear, _Buffers(state.grid.n))
    if not out.is_finite():
        raise NonFinite(f"non-finite state at t={out.time}")
    return out


class _Buffers:
    def __init__(self, n):
        self.k = [(np.empty(n), np.empty(n)) for _ in range(4)]
        self.tmp_u = np.empty(n)
        self.tmp_v = np.empty(n)


def _step_inplace(state: FieldState, dt: float, p: float, alpha: float,
                  linear: bool, buf: _Buffers):
    u, v = state.u, state.udot
    dx2 = state.grid.dx ** 2
    (k1u, k1v), (k2u, k2v), (k3u, k3v), (k4u, k4v) = buf.k
    tu, tv = buf.tmp_u, buf.tmp_v
    _rhs(u, v, k1u, k1v, dx2, p, alpha, linear)
    np.multiply(k1u, 0.5 * dt, out=tu); tu += u
    np.multiply(k1v, 0.5 * dt, out=tv); tv += v
    _rhs(tu, tv, k2u, k2v, dx2, p, alpha, linear)
    np.multiply(k2u, 0.5 * dt, out=tu); tu += u
    np.multiply(k2v, 0.5 * dt, out=tv); tv += v
    _rhs(tu, tv, k3u, k3v, dx2, p, alpha, linear)
    np.multiply(k3u, dt, out=tu); tu += u
    np.multiply(k3v, dt, out=tv); tv += v
    _rhs(tu, tv, k4u, k4v, dx2, p, alpha, linear)
    u += (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    v += (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    state.time += dt


def evolve(state: FieldState, cfg: EvolveConfig, observers=()) -> Trajectory:
    """Advance until t_max, blow-up, or an observer-issued stop.

    Observers are called at every sample as obs(state, funcs, extra) and may
    return a string "stop:<reason>" to terminate; anything they put into the
    ``extra`` dict lands in the sample record.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        return _evolve_impl(state, cfg, observers)


def _evolve_impl(state: FieldState, cfg: EvolveConfig, observers) -> Trajectory:
    cfg.validate(state.grid.dx)
    state = state.copy()
    buf = _Buffers(state.grid.n)
    dx = state.grid.dx
    traj = Trajectory(samples=[], events=[])
    norm_cap_sq = (cfg.blowup_norm_factor * cfg.blowup_norm_ref) ** 2

    diss = 0.0  # 2 alpha ∫ ||u_t||^2 dt, trapezoid in time per step
    e0 = None
    vsq_prev = float(np.trapezoid(state.udot ** 2, dx=dx))
    n_steps = int(round(cfg.t_max / cfg.dt))

    def take_sample():
        nonlocal e0
        funcs = functionals(state, cfg.p, cfg.alpha)
        if e0 is None:
            e0 = funcs.energy
        residual = funcs.energy - e0 + diss
        extra = {}
        commands = [obs(state, funcs, extra) for obs in observers]
        traj.samples.append(TrajectorySample(state.time, funcs, residual, extra))
        if funcs.h_norm_sq >= norm_cap_sq:
            traj.events.append((state.time, "blowup"))
            traj.blowup = BlowupRecord(state.time, "norm", math.sqrt(funcs.h_norm_sq))
            return False
        for c in commands:
            if isinstance(c, str) and c.startswith("stop:"):
                traj.events.append((state.time, c[5:]))
                return False
        return True

    if not take_sample():
        traj.final_state = state
        return traj

    for i in range(1, n_steps + 1):
        _step_inplace(state, cfg.dt, cfg.p, cfg.alpha, cfg.linear, buf)
        if not np.isfinite(state.u[::7]).all() or not state.is_finite():
            traj.events.append((state.time, "blowup"))
            traj.blowup = BlowupRecord(state.time, "nonfinite", float("inf"))
            traj.final_state = None
            return traj
        vsq = float(np.trapezoid(state.udot ** 2, dx=dx))
        diss += cfg.alpha * cfg.dt * (vsq_prev + vsq)
        vsq_prev = vsq
        if i % cfg.sample_every == 0 or i == n_steps:
            if not take_sample():
                traj.final_state = state
                return traj

    traj.events.append((state.time, "tmax"))
    traj.final_state = state
    return traj


def cutoff_mask(x: np.ndarray, center: float, radius: float) -> np.ndarray:
    """Smooth cutoff chi(|x - center| - radius): 1 up to +1/3, 0 beyond +2/3."""
    s = np.abs(x - center) - radius
    t = np.clip(3.0 * s - 1.0, 0.0, 1.0)
    return 1.0 - t * t * (3.0 - 2.0 * t)


def localized_runs(state: FieldState, z, gs, cfg: EvolveConfig, observers_for=None):
    """Evolve the K+1 cut-off pieces of a state around centers z independently.

    Returns (pieces, background, t_star) where pieces[k] is the trajectory of
    chi_k * state around z[k], background that of the complement piece, and
    t_star = D_z/6 - 1/2 is the horizon on which the pieces tile the original
    solution.  Requires pairwise center distance >= 15.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if len(z) > 1:
        dz = min(abs(z[i] - z[j]) for i in range(len(z)) for j in range(i + 1, len(z)))
    else:
        dz = 2.0 * (state.grid.L - abs(z[0]))
    if dz < 15.0:
        raise CentersTooClose(f"D_z={dz} < 15")

    x = state.grid.x
    pieces = []
    inner = np.zeros_like(x)
    for k, zk in enumerate(z):
        mask = cutoff_mask(x, zk, 2.0 * dz / 3.0)
        inner += cutoff_mask(x, zk, dz / 3.0)
        piece = FieldState(state.grid, mask * state.u, mask * state.udot, state.time)
        obs = observers_for(k) if observers_for else ()
        pieces.append(evolve(piece, cfg, obs))
    bg_state = FieldState(state.grid, (1.0 - inner) * state.u,
                          (1.0 - inner) * state.udot, state.time)
    background = evolve(bg_state, cfg)
    return pieces, background, dz / 6.0 - 0.5
