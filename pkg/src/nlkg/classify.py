"""Trajectory classification into the five global behaviors.

An evolution is driven with a soliton-frame tracker attached; certificates
(blow-up functional, sub-ground-state dichotomy, soliton-hold windows)
terminate the run as soon as one of them fires.  Soliton loss is handled
by re-fitting over sub-configurations, so a 2-soliton run that collapses
one bump continues as a tracked 1-soliton run.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import CentersTooClose, NewtonDiverged
from .evolve import EvolveConfig, Trajectory, evolve, localized_runs
from .field import (Dichotomy, FieldState, blowup_criterion, functionals,
                    h_norm_sq, subcritical_dichotomy)
from .modulation import SolitonBasis, SolitonFrame, fit_centers

__all__ = ["Outcome", "ClassifyConfig", "StageTimes", "CollapseStatus",
           "TubeTracker", "classify_trajectory", "stage_times", "collapse_status",
           "ejection_signs"]


@dataclass
class ClassifyConfig:
    p: float = 3.0
    alpha: float = 0.5
    dt: float = 0.025
    t_max: float = 150.0
    sample_every: int = 10
    delta_cert: float = 1e-3
    eps_dec: float = 0.02
    eps_sol: float = 0.02
    t_hold: float = 50.0
    tube_exit: float = 0.3
    tube_enter: float = 0.25
    delta1: float = 0.02
    delta2: float = 0.1
    b1: float | None = None        # None -> 2 * calibrated m
    delta_r: float | None = None   # None -> 1 / B1
    eps_hold: float = 0.1
    eps_dec_loc: float = 0.05
    p_bup_loc: float | None = None   # absolute P cap; None -> certificate only
    blowup_norm_factor: float = 10.0

    def evolve_config(self, basis: SolitonBasis) -> EvolveConfig:
        return EvolveConfig(p=self.p, alpha=self.alpha, dt=self.dt,
                            t_max=self.t_max, sample_every=self.sample_every,
                            blowup_norm_factor=self.blowup_norm_factor,
                            blowup_norm_ref=math.sqrt(basis.gs.h1_sq))

    def resolved_b1(self, basis: SolitonBasis) -> float:
        return 2.0 * basis.m_const if self.b1 is None else self.b1

    def resolved_delta_r(self, basis: SolitonBasis) -> float:
        return 1.0 / self.resolved_b1(basis) if self.delta_r is None else self.delta_r


@dataclass
class StageTimes:
    t1: float | None = None
    t2: float | None = None
    t3: float | None = None
    ts: float | None = None

    def as_tuple(self):
        return self.t1, self.t2, self.t3, self.ts


@dataclass
class Outcome:
    kind: str                     # Decay | Blowup | OneSoliton | TwoSoliton | Undetermined
    sign: int | None = None       # sign of the surviving soliton for OneSoliton
    stage_times: StageTimes = dc_field(default_factory=StageTimes)
    evidence: list = dc_field(default_factory=list)
    final_centers: list | None = None
    hold_time: float = 0.0        # total time spent inside a 1-soliton tube

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "sign": self.sign,
                "stage_times": {"T1": self.stage_times.t1, "T2": self.stage_times.t2,
                                "T3": self.stage_times.t3, "Ts": self.stage_times.ts},
                "evidence": self.evidence, "final_centers": self.final_centers,
                "hold_time": self.hold_time}


class CollapseStatus(enum.Enum):
    HOLDING = "Holding"
    DECAYED = "Decayed"
    BLOWING_UP = "BlowingUp"
    UNRESOLVED = "Unresolved"


class TubeTracker:
    """Maintains the current soliton-frame hypothesis along a run."""

    def __init__(self, basis: SolitonBasis, signs=None, z0=None,
                 tube_exit: float = 0.3, tube_enter: float = 0.25):
        self.basis = basis
        self.signs = np.atleast_1d(np.asarray(signs, dtype=float)) if signs is not None else np.array([])
        self.z = np.atleast_1d(np.asarray(z0, dtype=float)) if z0 is not None else np.array([])
        self.tube_exit = tube_exit
        self.tube_enter = tube_enter
        self.frames: list[SolitonFrame] = []
        self.events: list = []
        self.ejections: dict = {}  # soliton index in the ORIGINAL config -> tau sign
        self.index_map = list(range(len(self.z)))

    def sqrt_n0(self, frame: SolitonFrame) -> float:
        eta = self.basis.kernel.eta(frame.dz) if frame.k > 1 else 0.0
        return math.sqrt(frame.v_norm ** 2 + eta)

    def _try_fit(self, state, signs, z):
        try:
            frame = fit_centers(self.basis, state, signs, z)
        except NewtonDiverged:
            return None, math.inf
        return frame, self.sqrt_n0(frame)

    def _acquire_peak(self, state):
        gs = self.basis.gs
        i = int(np.argmax(np.abs(state.u)))
        amp = abs(state.u[i])
        if not (0.5 * gs.q0 <= amp <= 1.7 * gs.q0):
            return None, math.inf
        sign = 1.0 if state.u[i] > 0 else -1.0
        if abs(state.grid.x[i]) > state.grid.L - 10.0:
            return None, math.inf
        frame, n0 = self._try_fit(state, np.array([sign]), np.array([state.grid.x[i]]))
        if frame is not None and n0 <= self.tube_enter:
            return frame, n0
        return None, math.inf

    def observe(self, state: FieldState) -> SolitonFrame | None:
        if len(self.z) > 0:
            frame, n0 = self._try_fit(state, self.signs, self.z)
            if frame is not None and n0 <= self.tube_exit:
                self.z = frame.z
                self.frames.append(frame)
                return frame
            hit = self._drop_to_subconfig(state)
            if hit is not None:
                return hit
            self.events.append((state.time, "tube-lost"))
            self.lost = (self.signs, self.z, self.index_map)
            self.z = np.array([])
            self.signs = np.array([])
            self.index_map = []
        if getattr(self, "lost", None) is not None:
            # retry sub-configurations of the last known frame; transients can
            # blind the fit for a few samples after a soliton collapses
            signs, z, imap = self.lost
            best = (None, math.inf, None)
            from itertools import combinations
            for size in range(len(z), 0, -1):
                for sub in combinations(range(len(z)), size):
                    idx = list(sub)
                    frame, n0 = self._try_fit(state, signs[idx], z[idx])
                    if frame is not None and n0 <= self.tube_enter and n0 < best[1]:
                        best = (frame, n0, idx)
            frame, _, idx = best
            if frame is not None:
                self.events.append((state.time, "tube-reacquired"))
                self.signs = signs[idx]
                self.z = frame.z
                self.index_map = [imap[j] for j in idx]
                self.frames.append(frame)
                self.lost = None
                return frame
        frame, n0 = self._acquire_peak(state)
        if frame is not None:
            self.events.append((state.time, "tube-acquired"))
            self.signs = frame.signs
            self.z = frame.z
            self.index_map = [-1]  # emergent soliton, not one of the originals
            self.frames.append(frame)
            return frame
        return None

    def _drop_to_subconfig(self, state):
        k = len(self.z)
        if k <= 1:
            return None
        best = (None, math.inf, None)
        subsets = []
        for size in range(k - 1, 0, -1):
            from itertools import combinations
            subsets.extend(combinations(range(k), size))
        for sub in subsets:
            idx = list(sub)
            frame, n0 = self._try_fit(state, self.signs[idx], self.z[idx])
            if frame is not None and n0 <= self.tube_enter and n0 < best[1]:
                best = (frame, n0, idx)
        frame, _, idx = best
        if frame is None:
            return None
        dropped = [self.index_map[j] for j in range(k) if j not in idx]
        self.events.append((state.time, f"soliton-lost:{dropped}"))
        self.signs = self.signs[idx]
        self.z = frame.z
        self.index_map = [self.index_map[j] for j in idx]
        self.frames.append(frame)
        return frame

    def record_crossings(self, frame: SolitonFrame, delta2: float):
        for j, a in enumerate(frame.a_plus):
            orig = self.index_map[j]
            if orig >= 0 and orig not in self.ejections and abs(a) >= delta2:
                self.ejections[orig] = int(math.copysign(1.0, frame.signs[j] * a))


def classify_trajectory(basis: SolitonBasis, init: FieldState, signs=None,
                        z0=None, cfg: ClassifyConfig | None = None):
    """Evolve with modulation observers and certify one of the five outcomes.

    Returns (Outcome, Trajectory).  Undetermined is a value, not an error:
    it means t_max was reached with no certificate.
    """
    cfg = cfg or ClassifyConfig()
    tracker = TubeTracker(basis, signs, z0, cfg.tube_exit, cfg.tube_enter)
    e_ground = basis.gs.energy
    evidence = []
    if signs is not None and z0 is not None and len(np.atleast_1d(signs)) > 1:
        order = np.argsort(np.atleast_1d(np.asarray(z0, dtype=float)))
        s_sorted = np.atleast_1d(np.asarray(signs, dtype=float))[order]
        if np.any(s_sorted[:-1] * s_sorted[1:] > 0):
            evidence.append({"t": 0.0, "criterion": "non-repulsive-configuration",
                             "value": [int(s) for s in s_sorted]})
    hold: list = []        # (time, k, sqrtN0, max|a+|) inside the current tube
    hold_total = [0.0, None]  # accumulated 1-soliton tube time, last sample time
    terminal = {}

    def observer(state, funcs, extra):
        frame = tracker.observe(state)
        if frame is not None:
            tracker.record_crossings(frame, cfg.delta2)
            n0 = tracker.sqrt_n0(frame)
            extra.update(frame.summary())
            extra["sqrtN0"] = n0
            if frame.k == 1:
                if hold_total[1] is not None:
                    hold_total[0] += state.time - hold_total[1]
                hold_total[1] = state.time
            else:
                hold_total[1] = None
            hold.append((state.time, frame.k, n0, float(np.max(np.abs(frame.a_plus)))))
        else:
            hold_total[1] = None
            hold.append((state.time, 0, math.inf, math.inf))

        if blowup_criterion(funcs, cfg.p, cfg.alpha):
            evidence.append({"t": state.time, "criterion": "blowup-functional",
                             "value": funcs.p_func})
            terminal["kind"] = "Blowup"
            return "stop:blowup-cert"
        d = subcritical_dichotomy(funcs, e_ground, cfg.delta_cert)
        if d is Dichotomy.BLOWUP_SIDE:
            evidence.append({"t": state.time, "criterion": "subcritical-blowup",
                             "value": funcs.nehari})
            terminal["kind"] = "Blowup"
            return "stop:blowup-side"
        if d is Dichotomy.DECAY_CERTIFIED:
            evidence.append({"t": state.time, "criterion": "subcritical-decay",
                             "value": funcs.energy})
            terminal["kind"] = "Decay"
            return "stop:decay-cert"
        if (math.sqrt(funcs.h_norm_sq) <= cfg.eps_dec
                and funcs.energy < e_ground - cfg.delta_cert):
            evidence.append({"t": state.time, "criterion": "small-norm-decay",
                             "value": math.sqrt(funcs.h_norm_sq)})
            terminal["kind"] = "Decay"
            return "stop:decay-small"

        if frame is not None and state.time >= cfg.t_hold:
            t0 = state.time - cfg.t_hold
            window = [h for h in hold if h[0] >= t0]
            ks = {h[1] for h in window}
            if (len(ks) == 1 and frame.k in ks
                    and all(h[2] <= cfg.eps_sol and h[3] <= cfg.eps_sol for h in window)):
                kind = "OneSoliton" if frame.k == 1 else "TwoSoliton"
                evidence.append({"t": state.time, "criterion": "soliton-hold",
                                 "value": cfg.t_hold})
                terminal["kind"] = kind
                terminal["sign"] = int(frame.signs[0]) if frame.k == 1 else None
                return "stop:soliton-hold"
        return None

    traj = evolve(init, cfg.evolve_config(basis), observers=(observer,))

    ev_kind = traj.terminal_event[1] if traj.terminal_event else "tmax"
    if ev_kind == "blowup":
        evidence.append({"t": traj.events[-1][0], "criterion": "blowup-event",
                         "value": traj.blowup.reason if traj.blowup else "norm"})
        kind, sign = "Blowup", None
    elif "kind" in terminal:
        kind, sign = terminal["kind"], terminal.get("sign")
    else:
        kind, sign = "Undetermined", None

    frames0 = [f for f in tracker.frames
               if signs is not None and f.k == len(np.atleast_1d(signs))]
    st = stage_times(frames0, cfg, basis) if frames0 else StageTimes()
    last = tracker.frames[-1] if tracker.frames else None
    out = Outcome(kind=kind, sign=sign, stage_times=st, evidence=evidence,
                  final_centers=[float(c) for c in last.z] if last is not None else None,
                  hold_time=hold_total[0])
    return out, traj


def tracked_run(basis: SolitonBasis, init: FieldState, signs, z0,
                cfg: ClassifyConfig | None = None, stop_aplus: float | None = None):
    """Evolve with the frame tracker only (no certificate stops).

    Used for stage-time and growth-rate measurements where the run must
    continue past the point where an outcome certificate would already fire.
    Returns (frames, trajectory).
    """
    cfg = cfg or ClassifyConfig()
    tracker = TubeTracker(basis, signs, z0, cfg.tube_exit, cfg.tube_enter)

    def observer(state, funcs, extra):
        frame = tracker.observe(state)
        if frame is not None:
            tracker.record_crossings(frame, cfg.delta2)
            extra.update(frame.summary())
            if stop_aplus is not None and np.max(np.abs(frame.a_plus)) >= stop_aplus:
                return "stop:aplus-cap"
        return None

    traj = evolve(init, cfg.evolve_config(basis), observers=(observer,))
    return tracker.frames, traj


def stage_times(frames, cfg: ClassifyConfig, basis: SolitonBasis) -> StageTimes:
    """Stage boundaries from a frame sequence of fixed soliton count.

    T2 is the first sample with N <= B1 |a+|^2; T1 the first sample with
    N <= delta1 |a+| but never later than T2 (membership in a later region
    implies the earlier stages are complete); T3 the first |a+| >= delta2;
    Ts the first eta0(D_z) >= delta_r sqrt(N) (for K=1, Ts = T2).
    """
    if not frames:
        return StageTimes()
    b1 = cfg.resolved_b1(basis)
    d_r = cfg.resolved_delta_r(basis)
    t = np.array([f.time for f in frames])
    n = np.clip(np.array([f.n_energy for f in frames]), 0.0, None)
    a = np.array([float(np.linalg.norm(f.a_plus)) for f in frames])
    k = frames[0].k

    def first(mask):
        idx = np.nonzero(mask)[0]
        return float(t[idx[0]]) if len(idx) else None

    t2 = first(n <= b1 * a * a)
    t1 = first(n <= cfg.delta1 * a)
    if t2 is not None and (t1 is None or t1 > t2):
        t1 = t2
    t3 = first(a >= cfg.delta2)
    if k == 1:
        ts = t2
    else:
        eta = np.array([basis.kernel.eta(f.dz) for f in frames])
        ts = first(eta >= d_r * np.sqrt(n))
    return StageTimes(t1=t1, t2=t2, t3=t3, ts=ts)


def collapse_status(basis: SolitonBasis, state: FieldState, signs, z,
                    cfg: ClassifyConfig | None = None, t_loc: float | None = None):
    """Classify each localized piece of a state as Holding/Decayed/BlowingUp.

    Runs the cut-off companion evolutions around the given centers and applies
    the small-norm / blow-up-functional exits; a piece that stays in its
    1-soliton tube is Holding.  Requires pairwise distance >= 15.
    """
    cfg = cfg or ClassifyConfig()
    z = np.atleast_1d(np.asarray(z, dtype=float))
    signs = np.atleast_1d(np.asarray(signs, dtype=float))
    if len(z) > 1:
        dz = min(abs(z[i] - z[j]) for i in range(len(z)) for j in range(i + 1, len(z)))
        if dz < 15.0:
            raise CentersTooClose(f"D_z={dz} < 15")
    ecfg = cfg.evolve_config(basis)
    if t_loc is not None:
        ecfg.t_max = t_loc
    pieces, background, t_star = localized_runs(state, z, basis.gs, ecfg)

    statuses = []
    for k, traj in enumerate(pieces):
        statuses.append(_piece_status(basis, traj, signs[k], z[k], cfg))
    return statuses, background, t_star


def _piece_status(basis, traj: Trajectory, sign, center, cfg: ClassifyConfig):
    """Lemma-style trichotomy for one localized piece.

    Certificates decide first (they hold from the sample where they fire
    regardless of the horizon); otherwise the final state is fitted against
    the soliton it was cut around.  Note the cut itself seeds the
    instability at the e^{-2 D_z/3} level, so Holding is meaningful only on
    horizons short of the corresponding ejection time.
    """
    if traj.blowup is not None:
        return CollapseStatus.BLOWING_UP
    for s in traj.samples:
        if blowup_criterion(s.funcs, cfg.p, cfg.alpha):
            return CollapseStatus.BLOWING_UP
        if cfg.p_bup_loc is not None and s.funcs.p_func >= cfg.p_bup_loc:
            return CollapseStatus.BLOWING_UP
    e_ground = basis.gs.energy
    for s in traj.samples:
        if subcritical_dichotomy(s.funcs, e_ground, cfg.delta_cert) \
                is Dichotomy.DECAY_CERTIFIED:
            return CollapseStatus.DECAYED
    if math.sqrt(traj.samples[-1].funcs.h_norm_sq) <= cfg.eps_dec_loc:
        return CollapseStatus.DECAYED
    if traj.final_state is not None:
        try:
            frame = fit_centers(basis, traj.final_state, np.array([sign]),
                                np.array([center]))
            if frame.v_norm <= cfg.eps_hold:
                return CollapseStatus.HOLDING
        except NewtonDiverged:
            pass
    return CollapseStatus.UNRESOLVED


def ejection_signs(basis: SolitonBasis, init: FieldState, signs, z0,
                   cfg: ClassifyConfig | None = None):
    """Per-soliton quadrant labels tau_k = sigma_k sign(a+_k) at ejection.

    The run is tracked until every original soliton has crossed |a+| >= delta2
    or terminated; solitons whose crossing is cut off by a global blow-up are
    re-classified from their localized piece.  Unresolved labels stay None.
    """
    cfg = cfg or ClassifyConfig()
    signs = np.atleast_1d(np.asarray(signs, dtype=float))
    z0 = np.atleast_1d(np.asarray(z0, dtype=float))
    k = len(z0)
    tracker = TubeTracker(basis, signs, z0, cfg.tube_exit, cfg.tube_enter)

    def observer(state, funcs, extra):
        frame = tracker.observe(state)
        if frame is not None:
            tracker.record_crossings(frame, cfg.delta2)
        if all(tracker.ejections.get(j) is not None for j in range(k)):
            return "stop:all-ejected"
        return None

    evolve(init, cfg.evolve_config(basis), observers=(observer,))
    tau = [tracker.ejections.get(j) for j in range(k)]

    if any(t is None for t in tau) and k > 1:
        # finish unresolved solitons on their localized pieces
        for j in range(k):
            if tau[j] is not None:
                continue
            tau[j] = _localized_ejection(basis, init, signs, z0, j, cfg)
    return tau


def _localized_ejection(basis, init, signs, z0, j, cfg: ClassifyConfig):
    from .evolve import cutoff_mask
    dz = min(abs(z0[i] - z0[l]) for i in range(len(z0)) for l in range(i + 1, len(z0)))
    mask = cutoff_mask(init.grid.x, z0[j], 2.0 * dz / 3.0)
    piece = FieldState(init.grid, mask * init.u, mask * init.udot, init.time)
    tracker = TubeTracker(basis, signs[j:j + 1], z0[j:j + 1],
                          cfg.tube_exit, cfg.tube_enter)

    def observer(state, funcs, extra):
        frame = tracker.observe(state)
        if frame is not None:
            tracker.record_crossings(frame, cfg.delta2)
        if tracker.ejections.get(0) is not None:
            return "stop:ejected"
        return None

    evolve(piece, cfg.evolve_config(basis), observers=(observer,))
    return tracker.ejections.get(0)
