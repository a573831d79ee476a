"""Experiment presets, TOML configuration, and deterministic artifact output.

Every run resolves its configuration, writes it (with the package version
and seed) into ``manifest.json`` inside a content-addressed directory, and
emits NDJSON trajectory streams, JSON outcome objects, and CSV maps.
Re-running the same config reproduces the artifacts byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from . import __version__
from .classify import ClassifyConfig, classify_trajectory, tracked_run
from .errors import NlkgError, ParseError, ValidationError
from .evolve import EvolveConfig, evolve
from .field import FieldState, Grid1D, discrete_soliton, superpose
from .groundstate import solve_ground_state
from .manifold import find_2sol_point, find_threshold, phase_map
from .modulation import SolitonBasis, reduced_gradient_flow, toy_unstable_ode
from .spectrum import assemble_eigenmodes, solve_internal_mode

log = logging.getLogger("nlkg")

SCENARIOS = ("dichotomy", "single_soliton", "two_soliton_map", "threshold",
             "g0", "merger", "reduced_flow", "toy_ode")

_DEFAULTS = {
    "physics": {"p": 3.0, "alpha": 0.5},
    "grid": {"L": 60.0, "dx": 0.05},
    "time": {"dt": 0.025, "t_max": 150.0, "sample_every": 10},
    "output": {"directory": "runs", "formats": ["ndjson", "json", "csv"]},
    "thresholds": {},
    "scenario": {},
}

_SCENARIO_KEYS = {
    "dichotomy": (),
    "single_soliton": ("signs", "z", "h"),
    "two_soliton_map": ("z", "h_min", "h_max", "resolution"),
    "threshold": ("z", "h_fixed", "fixed_slot", "h_lo", "h_hi", "tol"),
    "g0": ("z", "tol"),
    "merger": ("r",),
    "reduced_flow": ("signs", "z", "t_max"),
    "toy_ode": ("eps", "t_max"),
}


class ExperimentConfig:
    def __init__(self, data: dict):
        self.data = data

    def __getitem__(self, key):
        return self.data[key]

    @property
    def scenario(self) -> str:
        return self.data["scenario"]["name"]

    def resolved(self) -> dict:
        return self.data


def parse_config(path) -> ExperimentConfig:
    """Load and validate a TOML experiment config.

    All constraint violations are collected and reported at once via
    ValidationError; malformed TOML raises ParseError.
    """
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ParseError(f"{path}: {exc}")

    data = {}
    for section, defaults in _DEFAULTS.items():
        merged = dict(defaults)
        merged.update(raw.get(section, {}))
        data[section] = merged

    violations = []
    p = data["physics"].get("p", 3.0)
    alpha = data["physics"].get("alpha", 0.5)
    if not p > 2.0:
        violations.append(f"physics.p={p} violates p > 2")
    if not alpha > 0.0:
        violations.append(f"physics.alpha={alpha} violates alpha > 0")
    dt = data["time"]["dt"]
    dx = data["grid"]["dx"]
    if dt > 0.5 * dx + 1e-15:
        violations.append(f"time.dt={dt} violates the CFL bound dt <= 0.5*dx={0.5 * dx}")
    if data["time"]["t_max"] <= 0:
        violations.append("time.t_max must be positive")
    name = data["scenario"].get("name")
    if name not in SCENARIOS:
        violations.append(f"scenario.name={name!r} not one of {SCENARIOS}")
    else:
        for key in _SCENARIO_KEYS[name]:
            if key not in data["scenario"]:
                violations.append(f"scenario.{key} required for {name}")
    if violations:
        raise ValidationError(violations)
    return ExperimentConfig(data)


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _run_dir(cfg: ExperimentConfig, out_root: str) -> str:
    digest = hashlib.sha256(_canonical_json(cfg.resolved()).encode()).hexdigest()[:12]
    return os.path.join(out_root, f"{cfg.scenario}-{digest}")


def _build_lab(cfg: ExperimentConfig):
    phys = cfg["physics"]
    gs = solve_ground_state(1, phys["p"])
    nu0, phi = solve_internal_mode(gs)
    spec = assemble_eigenmodes(nu0, phi, gs, phys["alpha"])
    grid = Grid1D.make(cfg["grid"]["L"], cfg["grid"]["dx"])
    basis = SolitonBasis(gs, spec, grid)
    return gs, spec, grid, basis


def _classify_config(cfg: ExperimentConfig) -> ClassifyConfig:
    t = cfg["time"]
    c = ClassifyConfig(p=cfg["physics"]["p"], alpha=cfg["physics"]["alpha"],
                       dt=t["dt"], t_max=t["t_max"], sample_every=t["sample_every"])
    for key, val in cfg["thresholds"].items():
        if hasattr(c, key):
            setattr(c, key, val)
    return c


class NdjsonObserver:
    """Streams one JSON record per sample; caller writes the terminal record."""

    def __init__(self, fh):
        self.fh = fh

    def __call__(self, state, funcs, extra):
        rec = {"t": state.time, "E": funcs.energy, "K0": funcs.nehari,
               "P": funcs.p_func, "Hnorm": math.sqrt(funcs.h_norm_sq)}
        rec.update(extra)
        self.fh.write(_canonical_json(rec) + "\n")
        return None


def _write_trajectory(traj, path):
    with open(path, "w") as fh:
        for s in traj.samples:
            rec = {"t": s.time, "E": s.funcs.energy, "K0": s.funcs.nehari,
                   "P": s.funcs.p_func, "Hnorm": math.sqrt(s.funcs.h_norm_sq),
                   "balance": s.balance_residual}
            rec.update(s.extra)
            fh.write(_canonical_json(rec) + "\n")
        if traj.events:
            fh.write(_canonical_json({"event": traj.events[-1][1],
                                      "t": traj.events[-1][0]}) + "\n")


def run_experiment(cfg: ExperimentConfig, workers: int = 1, seed: int = 0,
                   out_root: str | None = None) -> str:
    """Execute one scenario; returns the artifact directory."""
    out_root = out_root or cfg["output"]["directory"]
    run_dir = _run_dir(cfg, out_root)
    os.makedirs(run_dir, exist_ok=True)
    manifest = {"config": cfg.resolved(), "version": __version__, "seed": seed,
                "workers": workers}
    with open(os.path.join(run_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)

    handler = _SCENARIO_RUNNERS[cfg.scenario]
    handler(cfg, run_dir, workers=workers, seed=seed)
    return run_dir


def _scenario_dichotomy(cfg, run_dir, **kw):
    gs, spec, grid, basis = _build_lab(cfg)
    ccfg = _classify_config(cfg)
    lam_values = cfg["scenario"].get("lambdas", [0.5, 0.9, 1.1, 2.0])
    profile = discrete_soliton(gs, grid, 0.0)
    outcomes = []
    for lam in lam_values:
        state = FieldState(grid, lam * profile, np.zeros(grid.n))
        out, traj = classify_trajectory(basis, state, None, None, ccfg)
        outcomes.append({"lambda": lam, "outcome": out.to_json_dict()})
        _write_trajectory(traj, os.path.join(run_dir, f"traj-lam{lam}.ndjson"))
    with open(os.path.join(run_dir, "outcomes.json"), "w") as fh:
        json.dump(outcomes, fh, sort_keys=True, indent=1)


def _scenario_single(cfg, run_dir, **kw):
    gs, spec, grid, basis = _build_lab(cfg)
    sc = cfg["scenario"]
    ccfg = _classify_config(cfg)
    state = superpose(gs, spec, sc["signs"], sc["z"], sc["h"], grid)
    out, traj = classify_trajectory(basis, state, sc["signs"], sc["z"], ccfg)
    with open(os.path.join(run_dir, "outcome.json"), "w") as fh:
        json.dump(out.to_json_dict(), fh, sort_keys=True, indent=1)
    _write_trajectory(traj, os.path.join(run_dir, "trajectory.ndjson"))


def _scenario_map(cfg, run_dir, workers=1, **kw):
    gs, spec, grid, basis = _build_lab(cfg)
    sc = cfg["scenario"]
    ccfg = _classify_config(cfg)
    hs = np.linspace(sc["h_min"], sc["h_max"], sc["resolution"])
    signs = sc.get("signs", [1, -1])
    pm = phase_map(basis, signs, sc["z"], None, hs, hs, ccfg, workers=workers)
    pm.to_csv(os.path.join(run_dir, "map.csv"))
    with open(os.path.join(run_dir, "map.json"), "w") as fh:
        json.dump(pm.metadata, fh, sort_keys=True, indent=1)


def _scenario_threshold(cfg, run_dir, **kw):
    gs, spec, grid, basis = _build_lab(cfg)
    sc = cfg["scenario"]
    ccfg = _classify_config(cfg)
    signs = sc.get("signs", [1, -1])
    fixed_slot = sc["fixed_slot"] if len(np.atleast_1d(sc["z"])) > 1 else None
    res = find_threshold(basis, signs, sc["z"], sc.get("h_fixed"), fixed_slot,
                         (sc["h_lo"], sc["h_hi"]), tol=sc["tol"], cfg=ccfg)
    payload = {"segment": res.segment, "h_star": res.h_star,
               "bracket_width": res.bracket_width,
               "left_outcome": res.left_outcome, "right_outcome": res.right_outcome,
               "near_threshold_trace": res.near_threshold_trace,
               "probes": res.probes}
    with open(os.path.join(run_dir, "threshold.json"), "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)


def _scenario_g0(cfg, run_dir, **kw):
    gs, spec, grid, basis = _build_lab(cfg)
    sc = cfg["scenario"]
    ccfg = _classify_config(cfg)
    h1, h2 = find_2sol_point(basis, sc.get("signs", [1, -1]), sc["z"], None,
                             tol=sc["tol"], cfg=ccfg,
                             half_width=sc.get("half_width", 0.02),
                             check_corners=sc.get("check_corners", True))
    with open(os.path.join(run_dir, "g0.json"), "w") as fh:
        json.dump({"h1_star": h1, "h2_star": h2, "tol": sc["tol"]}, fh,
                  sort_keys=True, indent=1)


def _scenario_merger(cfg, run_dir, **kw):
    """Three alternating solitons; the outer pair is pushed off its tubes
    and the middle amplitude is bisected to the surviving-soliton threshold.

    The streamed near-threshold run shows the asserted event sequence: the
    outer solitons leave their tubes, after which the trailing window holds
    a single soliton near x = 0.  The final run is capped inside the hold
    horizon that the bisection depth can resolve.
    """
    gs, spec, grid, basis = _build_lab(cfg)
    sc = cfg["scenario"]
    ccfg = _classify_config(cfg)
    r = sc["r"]
    outer = sc.get("outer_kick", -0.04)
    signs = [1.0, -1.0, 1.0]
    z = [-r, 0.0, r]

    def initial(depth):
        return superpose(gs, spec, signs, z, [outer, depth, outer], grid)

    lo, hi = sc.get("depth_lo", -0.02), sc.get("depth_hi", 0.02)
    out_lo, _ = classify_trajectory(basis, initial(lo), signs, z, ccfg)
    out_hi, _ = classify_trajectory(basis, initial(hi), signs, z, ccfg)
    tol = sc.get("tol", 1e-12)
    kinds = {out_lo.kind, out_hi.kind}
    if kinds != {"Decay", "Blowup"}:
        raise NlkgError(f"merger endpoints classify as {kinds}; widen depth range")
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        out_mid, _ = classify_trajectory(basis, initial(mid), signs, z, ccfg)
        if out_mid.kind == out_lo.kind:
            a = mid
        elif out_mid.kind == out_hi.kind:
            b = mid
        else:
            break
    depth_star = 0.5 * (a + b)
    final_cfg = _classify_config(cfg)
    final_cfg.t_max = sc.get("t_final", 16.0)
    out, traj = classify_trajectory(basis, initial(depth_star), signs, z, final_cfg)
    _write_trajectory(traj, os.path.join(run_dir, "trajectory.ndjson"))
    with open(os.path.join(run_dir, "merger.json"), "w") as fh:
        json.dump({"middle_depth_star": depth_star, "outer_kick": outer, "r": r,
                   "outcome": out.to_json_dict()}, fh, sort_keys=True, indent=1)


def _scenario_reduced(cfg, run_dir, **kw):
    gs, spec, grid, basis = _build_lab(cfg)
    sc = cfg["scenario"]
    flow = reduced_gradient_flow(gs, spec, sc["signs"], sc["z"], sc["t_max"],
                                 dt=sc.get("dt", 0.05), kernel=basis.kernel)
    with open(os.path.join(run_dir, "reduced.csv"), "w") as fh:
        k = flow.z.shape[1]
        fh.write("t," + ",".join(f"z{i + 1}" for i in range(k)) + ",eta0_dz\n")
        for i, t in enumerate(flow.t):
            zs = ",".join(f"{v:.12g}" for v in flow.z[i])
            fh.write(f"{t:.12g},{zs},{flow.eta_min[i]:.12g}\n")
    inv = 1.0 / flow.eta_min
    coef = np.polyfit(flow.t, inv, 1)
    corr = np.corrcoef(flow.t, inv)[0, 1]
    with open(os.path.join(run_dir, "reduced.json"), "w") as fh:
        json.dump({"slope": coef[0], "intercept": coef[1],
                   "correlation": corr}, fh, sort_keys=True, indent=1)


def _scenario_toy(cfg, run_dir, **kw):
    sc = cfg["scenario"]
    traj = toy_unstable_ode(sc["eps"], sc.get("h0", [1.0, 0.0]), sc["t_max"],
                            nu_plus=sc.get("nu_plus", 1.0))
    with open(os.path.join(run_dir, "toy.csv"), "w") as fh:
        fh.write("t,dir1,dir2,log_norm\n")
        for i, t in enumerate(traj.t):
            fh.write(f"{t:.12g},{traj.direction[i, 0]:.12g},"
                     f"{traj.direction[i, 1]:.12g},{traj.log_norm[i]:.12g}\n")
    axis = 0 if abs(sc.get("h0", [1.0, 0.0])[0]) >= abs(sc.get("h0", [1.0, 0.0])[1]) else 1
    cross = traj.crossing_time(10.0, axis)
    with open(os.path.join(run_dir, "toy.json"), "w") as fh:
        json.dump({"crossing_time_ratio10": cross}, fh, sort_keys=True, indent=1)


_SCENARIO_RUNNERS = {
    "dichotomy": _scenario_dichotomy,
    "single_soliton": _scenario_single,
    "two_soliton_map": _scenario_map,
    "threshold": _scenario_threshold,
    "g0": _scenario_g0,
    "merger": _scenario_merger,
    "reduced_flow": _scenario_reduced,
    "toy_ode": _scenario_toy,
}


def _cmd_groundstate(args) -> int:
    gs = solve_ground_state(args.dim, args.power, r_max=args.rmax, tol=args.tol)
    header = (f"dim={gs.dimension} p={gs.power} q0={gs.q0!r} "
              f"l2_sq={gs.l2_sq!r} h1_sq={gs.h1_sq!r} lp1={gs.lp1!r} "
              f"grad_sq={gs.grad_sq!r} energy={gs.energy!r} tail_c0={gs.tail_c0!r}")
    data = np.column_stack([gs.r, gs.Q])
    if args.out:
        np.savetxt(args.out, data, header=header)
    else:
        print(header)
        for row in data[:: max(1, len(data) // 40)]:
            print(f"{row[0]:.6f} {row[1]:.10e}")
    return 0


def _cmd_spectrum(args) -> int:
    gs = solve_ground_state(args.dim, args.power)
    nu0, phi = solve_internal_mode(gs)
    spec = assemble_eigenmodes(nu0, phi, gs, args.alpha)
    print(f"nu0_sq: {nu0 ** 2!r}")
    print(f"nu_plus: {spec.nu_plus!r}")
    print(f"nu_minus: {spec.nu_minus!r}")
    print(f"c_omega_plus: {spec.c_omega_plus!r}")
    print(f"c_omega_minus: {spec.c_omega_minus!r}")
    print(f"c_omega_1: {spec.c_omega_1!r}")
    return 0


def _cmd_scenario(args) -> int:
    cfg = parse_config(args.config)
    if args.scenario_name and cfg.scenario != args.scenario_name:
        raise ValidationError(
            [f"config scenario {cfg.scenario!r} does not match subcommand "
             f"{args.scenario_name!r}"])
    run_dir = run_experiment(cfg, workers=args.workers, seed=args.seed,
                             out_root=args.out)
    outcome_path = os.path.join(run_dir, "outcome.json")
    if os.path.exists(outcome_path):
        with open(outcome_path) as fh:
            print(fh.read())
    else:
        print(run_dir)
    return 0


def _cmd_evolve(args) -> int:
    cfg = parse_config(args.config)
    gs, spec, grid, basis = _build_lab(cfg)
    sc = cfg["scenario"]
    state = superpose(gs, spec, sc.get("signs", [1]), sc.get("z", [0.0]),
                      sc.get("h", [0.0]), grid)
    t = cfg["time"]
    ecfg = EvolveConfig(p=cfg["physics"]["p"], alpha=cfg["physics"]["alpha"],
                        dt=t["dt"], t_max=t["t_max"],
                        sample_every=t["sample_every"],
                        blowup_norm_ref=math.sqrt(gs.h1_sq))
    traj = evolve(state, ecfg, observers=(NdjsonObserver(sys.stdout),))
    if traj.events:
        print(_canonical_json({"event": traj.events[-1][1], "t": traj.events[-1][0]}))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nlkg",
        description="Soliton dynamics laboratory for the damped Klein-Gordon "
                    "equation on the line")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default=None)
    parser.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("groundstate", help="shoot the radial ground state")
    g.add_argument("--dim", type=int, default=1)
    g.add_argument("--power", type=float, default=3.0)
    g.add_argument("--rmax", type=float, default=30.0)
    g.add_argument("--tol", type=float, default=1e-12)
    g.add_argument("--out", dest="out", default=None)
    g.set_defaults(func=_cmd_groundstate)

    s = sub.add_parser("spectrum", help="internal mode and pairing constants")
    s.add_argument("--dim", type=int, default=1)
    s.add_argument("--power", type=float, default=3.0)
    s.add_argument("--alpha", type=float, default=0.5)
    s.set_defaults(func=_cmd_spectrum)

    e = sub.add_parser("evolve", help="stream one evolution as NDJSON")
    e.add_argument("--config", required=True)
    e.set_defaults(func=_cmd_evolve)

    for name, scen in (("classify", "single_soliton"), ("threshold", "threshold"),
                       ("g0", "g0"), ("phasemap", "two_soliton_map"),
                       ("merger", "merger"), ("reduced", "reduced_flow"),
                       ("toyode", "toy_ode"), ("run", None)):
        c = sub.add_parser(name)
        c.add_argument("--config", required=True)
        c.set_defaults(func=_cmd_scenario, scenario_name=scen)

    args = parser.parse_args(argv)
    logging.basicConfig(level=os.environ.get("NLKG_LOG", "WARNING").upper())
    try:
        return args.func(args)
    except (ParseError, ValidationError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NlkgError as exc:
        print(_canonical_json({"error": type(exc).__name__, "detail": str(exc)}),
              file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
