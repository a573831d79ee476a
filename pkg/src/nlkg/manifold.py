"""Threshold search along perturbation segments and quadrant bisection.

The separating manifolds are located pointwise: 1D bisection on the
unstable-mode amplitude of one soliton with certified Decay/Blowup
endpoints, 2D quadrant bisection for the joint point where both solitons
sit on their thresholds, and brute-force classification maps.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .classify import ClassifyConfig, Outcome, classify_trajectory, ejection_signs
from .errors import QuadrantInconsistent, SameOutcomeAtEndpoints, UndeterminedDominates
from .field import superpose
from .modulation import SolitonBasis

__all__ = ["ThresholdResult", "PhaseMap", "find_threshold", "find_2sol_point",
           "phase_map", "lipschitz_probe"]

_SIDED = ("Decay", "Blowup")


@dataclass
class ThresholdResult:
    segment: dict
    h_star: float
    bracket_width: float
    left_outcome: str
    right_outcome: str
    near_threshold_trace: dict
    probes: list = dc_field(default_factory=list)


@dataclass
class PhaseMap:
    h1_values: np.ndarray
    h2_values: np.ndarray
    kinds: np.ndarray       # dtype=object, shape (n1, n2)
    t3: np.ndarray
    dz_final: np.ndarray
    metadata: dict

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("h1,h2,kind,T3_or_blank,Dz_final\n")
            for i, h1 in enumerate(self.h1_values):
                for j, h2 in enumerate(self.h2_values):
                    t3 = self.t3[i, j]
                    dz = self.dz_final[i, j]
                    fh.write(f"{h1:.10g},{h2:.10g},{self.kinds[i, j]},"
                             f"{'' if not np.isfinite(t3) else f'{t3:.10g}'},"
                             f"{'' if not np.isfinite(dz) else f'{dz:.10g}'}\n")


def _probe(basis: SolitonBasis, signs, z, h_vec, phi, cfg: ClassifyConfig):
    """Classify one initial datum; double the horizon once on Undetermined."""
    init = superpose(basis.gs, basis.spec, signs, z, h_vec, basis.grid, extra=phi)
    out, _ = classify_trajectory(basis, init, signs, z, cfg)
    if out.kind == "Undetermined":
        out, _ = classify_trajectory(basis, init, signs, z,
                                     _with_tmax(cfg, 2.0 * cfg.t_max))
    return out


def _with_tmax(cfg: ClassifyConfig, t_max: float) -> ClassifyConfig:
    out = copy.copy(cfg)
    out.t_max = t_max
    return out


def find_threshold(basis: SolitonBasis, signs, z, h_fixed: float | None,
                   fixed_slot: int | None, h_range, phi=None, tol: float = 1e-6,
                   cfg: ClassifyConfig | None = None,
                   max_steps: int = 60) -> ThresholdResult:
    """Bisect the varying unstable amplitude to the Decay/Blowup boundary.

    ``fixed_slot`` (0-based) holds ``h_fixed`` while the other slot sweeps
    ``h_range``; pass fixed_slot=None for a single soliton.  Endpoints must
    classify as distinct members of {Decay, Blowup}.
    """
    cfg = cfg or ClassifyConfig()
    signs = np.atleast_1d(np.asarray(signs, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    k = len(signs)

    def h_vec(h):
        out = np.zeros(k)
        if fixed_slot is not None:
            out[fixed_slot] = h_fixed
            out[1 - fixed_slot if k == 2 else 0] = h
        else:
            out[0] = h
        return out

    probes = []

    def classify_h(h):
        out = _probe(basis, signs, z, h_vec(h), phi, cfg)
        probes.append({"h": h, "kind": out.kind, "hold": out.hold_time})
        return out

    lo, hi = float(h_range[0]), float(h_range[1])
    out_lo = classify_h(lo)
    out_hi = classify_h(hi)
    if out_lo.kind not in _SIDED or out_hi.kind not in _SIDED \
            or out_lo.kind == out_hi.kind:
        raise SameOutcomeAtEndpoints(
            f"endpoints classify as {out_lo.kind}/{out_hi.kind}")

    undecided = 0
    offsets = (0.5, 0.55, 0.45, 0.6, 0.4)
    steps = 0
    while hi - lo > tol and steps < max_steps:
        placed = False
        for frac in offsets:
            mid = lo + frac * (hi - lo)
            out_mid = classify_h(mid)
            steps += 1
            if out_mid.kind in _SIDED:
                undecided = 0
                if out_mid.kind == out_lo.kind:
                    lo = mid
                else:
                    hi = mid
                placed = True
                break
            undecided += 1
            if undecided >= 3:
                raise UndeterminedDominates(
                    "3 consecutive bisection probes were inconclusive")
        if not placed:
            break

    h_star = 0.5 * (lo + hi)
    near, _ = classify_trajectory(
        basis, superpose(basis.gs, basis.spec, signs, z, h_vec(h_star),
                         basis.grid, extra=phi), signs, z, cfg)
    trace = {"kind": near.kind, "hold_time": near.hold_time,
             "sign": near.sign, "stage_T3": near.stage_times.t3,
             "final_centers": near.final_centers}
    return ThresholdResult(
        segment={"signs": signs.tolist(), "z": z.tolist(),
                 "fixed_slot": fixed_slot, "h_fixed": h_fixed,
                 "range": [float(h_range[0]), float(h_range[1])]},
        h_star=h_star, bracket_width=hi - lo,
        left_outcome=out_lo.kind, right_outcome=out_hi.kind,
        near_threshold_trace=trace, probes=probes)


def find_2sol_point(basis: SolitonBasis, signs, z, phi=None, tol: float = 1e-5,
                    cfg: ClassifyConfig | None = None, half_width: float = 0.02,
                    check_corners: bool = True, max_steps: int = 60):
    """Quadrant bisection for the joint threshold point (h1*, h2*).

    Each probe is labeled by the per-soliton ejection signs tau_k =
    sigma_k sign(a+_k), which equal sign(h_k - h_k*); the rectangle shrinks
    toward the four-quadrant meeting point until its diagonal is <= tol.
    """
    cfg = cfg or ClassifyConfig()
    signs = np.atleast_1d(np.asarray(signs, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if len(signs) != 2 or signs[0] * signs[1] != -1.0:
        raise ValueError("find_2sol_point needs K=2 with opposite signs")
    if min(abs(z[0] - z[1]), math.inf) < 14.0:
        raise ValueError("D_z >= 14 required")

    def labels(h1, h2):
        init = superpose(basis.gs, basis.spec, signs, z, [h1, h2],
                         basis.grid, extra=phi)
        tau = ejection_signs(basis, init, signs, z, cfg)
        if any(t is None for t in tau):
            tau2 = ejection_signs(basis, init, signs, z, _with_tmax(cfg, 2 * cfg.t_max))
            tau = [a if a is not None else b for a, b in zip(tau, tau2)]
        return tau

    lo = np.array([-half_width, -half_width])
    hi = np.array([half_width, half_width])

    if check_corners:
        seen = {}
        for c1 in (lo[0], hi[0]):
            for c2 in (lo[1], hi[1]):
                tau = labels(c1, c2)
                if None in tau:
                    raise QuadrantInconsistent(
                        f"corner ({c1}, {c2}) has unresolved ejection {tau}")
                seen[(c1, c2)] = tuple(tau)
        expect = {(lo[0], lo[1]): (-1, -1), (lo[0], hi[1]): (-1, 1),
                  (hi[0], lo[1]): (1, -1), (hi[0], hi[1]): (1, 1)}
        for corner, want in expect.items():
            if seen[corner] != want:
                raise QuadrantInconsistent(
                    f"corner {corner} labeled {seen[corner]}, expected {want}; "
                    "widen the search box or increase D_z")

    steps = 0
    while float(np.hypot(*(hi - lo))) > tol and steps < max_steps:
        c = 0.5 * (lo + hi)
        tau = labels(c[0], c[1])
        steps += 1
        for ax in range(2):
            if tau[ax] is None:
                w = hi[ax] - lo[ax]
                lo[ax] = c[ax] - 0.25 * w
                hi[ax] = c[ax] + 0.25 * w
            elif tau[ax] > 0:
                hi[ax] = c[ax]
            else:
                lo[ax] = c[ax]
    return float(0.5 * (lo[0] + hi[0])), float(0.5 * (lo[1] + hi[1]))


_POOL_STATE = {}


def _init_pool(basis, signs, z, phi, cfg):
    _POOL_STATE["args"] = (basis, signs, z, phi, cfg)


def _phase_cell(hpair):
    basis, signs, z, phi, cfg = _POOL_STATE["args"]
    out = _probe(basis, signs, z, np.asarray(hpair), phi, cfg)
    t3 = out.stage_times.t3
    dz = (out.final_centers and len(out.final_centers) == 2
          and abs(out.final_centers[0] - out.final_centers[1])) or math.nan
    return out.kind, (math.nan if t3 is None else t3), dz


def phase_map(basis: SolitonBasis, signs, z, phi, h1_values, h2_values,
              cfg: ClassifyConfig | None = None, workers: int = 1) -> PhaseMap:
    """Classify every grid cell of unstable amplitudes; edge-connectivity of
    the Decay and Blowup regions is recorded in the metadata."""
    cfg = cfg or ClassifyConfig()
    h1_values = np.asarray(h1_values, dtype=float)
    h2_values = np.asarray(h2_values, dtype=float)
    if len(h1_values) * len(h2_values) > 64 * 64:
        raise ValueError("resolution capped at 64x64")
    cells = [(float(a), float(b)) for a in h1_values for b in h2_values]

    _init_pool(basis, signs, z, phi, cfg)
    if workers > 1:
        import multiprocessing as mp
        with mp.Pool(workers, initializer=_init_pool,
                     initargs=(basis, signs, z, phi, cfg)) as pool:
            results = pool.map(_phase_cell, cells)
    else:
        results = [_phase_cell(c) for c in cells]

    n1, n2 = len(h1_values), len(h2_values)
    kinds = np.empty((n1, n2), dtype=object)
    t3 = np.full((n1, n2), math.nan)
    dzf = np.full((n1, n2), math.nan)
    for idx, (kind, t3v, dzv) in enumerate(results):
        i, j = divmod(idx, n2)
        kinds[i, j] = kind
        t3[i, j] = t3v
        dzf[i, j] = dzv

    meta = {"signs": np.atleast_1d(signs).tolist(),
            "z": np.atleast_1d(z).tolist(),
            "decay_components": _components(kinds, "Decay"),
            "blowup_components": _components(kinds, "Blowup")}
    meta["connected"] = (meta["decay_components"] <= 1
                         and meta["blowup_components"] <= 1)
    return PhaseMap(h1_values, h2_values, kinds, t3, dzf, meta)


def _components(kinds: np.ndarray, kind: str) -> int:
    n1, n2 = kinds.shape
    seen = np.zeros((n1, n2), dtype=bool)
    comps = 0
    for i in range(n1):
        for j in range(n2):
            if kinds[i, j] != kind or seen[i, j]:
                continue
            comps += 1
            stack = [(i, j)]
            seen[i, j] = True
            while stack:
                a, b = stack.pop()
                for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    na, nb = a + da, b + db
                    if 0 <= na < n1 and 0 <= nb < n2 and not seen[na, nb] \
                            and kinds[na, nb] == kind:
                        seen[na, nb] = True
                        stack.append((na, nb))
    return comps


def lipschitz_probe(basis: SolitonBasis, signs, z, phi_base, directions,
                    step: float, h_range, tol: float = 1e-6,
                    cfg: ClassifyConfig | None = None,
                    h_fixed: float | None = None, fixed_slot: int | None = None):
    """Finite-difference threshold sensitivity |dh*| / ||d phi||_H per direction.

    Returns (table, max_ratio); rows carry the per-direction shift and ratio.
    Directions with zero norm report ratio 0.
    """
    from .field import h_norm_sq_pair
    cfg = cfg or ClassifyConfig()
    base = find_threshold(basis, signs, z, h_fixed, fixed_slot, h_range,
                          phi=phi_base, tol=tol, cfg=cfg)
    table = []
    for d in directions:
        nrm = math.sqrt(h_norm_sq_pair(d, basis.grid.dx))
        if nrm == 0.0:
            table.append({"dphi_norm": 0.0, "shift": 0.0, "ratio": 0.0})
            continue
        pert = (None if phi_base is None else phi_base)
        p1 = (d[0] * step, d[1] * step) if pert is None else \
            (pert[0] + d[0] * step, pert[1] + d[1] * step)
        res = find_threshold(basis, signs, z, h_fixed, fixed_slot,
                             (base.h_star - max(50 * tol, 0.02),
                              base.h_star + max(50 * tol, 0.02)),
                             phi=p1, tol=tol, cfg=cfg)
        shift = res.h_star - base.h_star
        table.append({"dphi_norm": nrm * step, "shift": shift,
                      "ratio": abs(shift) / (nrm * step)})
    max_ratio = max((row["ratio"] for row in table), default=0.0)
    return table, max_ratio, base
