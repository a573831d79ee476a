import math

import numpy as np
import pytest

from nlkg.classify import (ClassifyConfig, CollapseStatus, classify_trajectory,
                           collapse_status, ejection_signs, stage_times,
                           tracked_run)
from nlkg.errors import CentersTooClose
from nlkg.field import FieldState, discrete_soliton, superpose


def _cfg(alpha=0.5, t_max=100.0, **kw):
    kw.setdefault("sample_every", 10)
    return ClassifyConfig(p=3.0, alpha=alpha, dt=0.025, t_max=t_max, **kw)


def test_lambda_battery(basis05, gs1, grid05):
    profile = discrete_soliton(gs1, grid05, 0.0)
    expected = {0.5: "Decay", 0.9: "Decay", 1.1: "Blowup", 2.0: "Blowup"}
    for lam, kind in expected.items():
        st = FieldState(grid05, lam * profile, np.zeros(grid05.n))
        out, _ = classify_trajectory(basis05, st, None, None, _cfg())
        assert out.kind == kind, f"lambda={lam}"
        assert out.evidence


def test_single_soliton_sign_rule(basis05, gs1, spec05, grid05):
    # blow-up iff the unstable amplitude h is positive, for either sign
    # of the soliton (sigma_k a+_k = h_k)
    for sgn in (1, -1):
        for h in (0.01, 0.05, 0.1):
            st = superpose(gs1, spec05, [sgn], [0.0], [h], grid05)
            out, _ = classify_trajectory(basis05, st, [sgn], [0.0], _cfg())
            assert out.kind == "Blowup", (sgn, h)
            st = superpose(gs1, spec05, [sgn], [0.0], [-h], grid05)
            out, _ = classify_trajectory(basis05, st, [sgn], [0.0], _cfg())
            assert out.kind == "Decay", (sgn, h)


def test_two_soliton_hold_at_strong_damping(gs1, make_spec, make_basis):
    basis = make_basis(20.0)
    spec = basis.spec
    st = superpose(gs1, spec, [1, -1], [-10.0, 10.0], [0, 0], basis.grid)
    out, traj = classify_trajectory(basis, st, [1, -1], [-10.0, 10.0],
                                    _cfg(alpha=20.0, t_max=80.0, t_hold=50.0))
    assert out.kind == "TwoSoliton"
    assert out.final_centers is not None
    d0, d1 = abs(out.final_centers[0] - out.final_centers[1]), 20.0
    assert d0 >= d1 - 1e-6  # repulsion never shrinks the separation


def test_plain_superposition_decays_at_moderate_damping(basis05, gs1, spec05, grid05):
    # the interaction seed ejects both solitons decay-side well before any
    # hold window at alpha = 0.5
    st = superpose(gs1, spec05, [1, -1], [-8.0, 8.0], [0, 0], grid05)
    out, _ = classify_trajectory(basis05, st, [1, -1], [-8.0, 8.0], _cfg(t_max=150.0))
    assert out.kind == "Decay"


def test_stage_times_ordered_and_slope(basis05, gs1, spec05, grid05):
    st = superpose(gs1, spec05, [1], [0.0], [0.05], grid05)
    cfg = _cfg(sample_every=4)
    frames, _ = tracked_run(basis05, st, [1], [0.0], cfg, stop_aplus=0.2)
    stt = stage_times(frames, cfg, basis05)
    assert stt.t1 is not None and stt.t2 is not None and stt.t3 is not None
    assert stt.t1 <= stt.t2 <= stt.t3
    assert stt.ts == stt.t2  # K=1 convention
    ts = np.array([f.time for f in frames])
    a = np.array([abs(f.a_plus[0]) for f in frames])
    sel = (ts >= stt.t2) & (ts <= stt.t3)
    slope = np.polyfit(ts[sel], np.log(a[sel]), 1)[0]
    assert abs(slope - basis05.spec.nu_plus) <= 0.1 * basis05.spec.nu_plus


def test_stage_times_absent_for_decaying_run(basis05, grid05):
    cfg = _cfg()
    st = FieldState(grid05, 0.01 * np.exp(-grid05.x ** 2), np.zeros(grid05.n))
    assert stage_times([], cfg, basis05).as_tuple() == (None, None, None, None)


def test_collapse_status_pure_pair(gs1, make_basis):
    basis = make_basis(20.0)
    st = superpose(gs1, basis.spec, [1, -1], [-10.0, 10.0], [0, 0], basis.grid)
    cfg = _cfg(alpha=20.0)
    statuses, background, t_star = collapse_status(basis, st, [1, -1],
                                                   [-10.0, 10.0], cfg, t_loc=20.0)
    assert statuses == [CollapseStatus.HOLDING, CollapseStatus.HOLDING]
    late = [s for s in background.samples if s.time >= 10.0]
    assert all(math.sqrt(s.funcs.h_norm_sq) <= 0.1 for s in late)


def test_collapse_status_mixed(basis05, gs1, spec05, grid05):
    # replace one soliton with a sub-ground / super-ground profile; the
    # horizon stays short of the ejection the cut itself seeds
    prof = discrete_soliton(gs1, grid05, 10.0)
    for fac, expect in ((0.5, CollapseStatus.DECAYED),
                        (2.0, CollapseStatus.BLOWING_UP)):
        st = superpose(gs1, spec05, [1], [-10.0], [0.0], grid05)
        st = FieldState(grid05, st.u + fac * prof, st.udot)
        statuses, _, t_star = collapse_status(basis05, st, [1, 1],
                                              [-10.0, 10.0], _cfg(), t_loc=6.0)
        assert statuses[0] is CollapseStatus.HOLDING
        assert statuses[1] is expect, fac


def test_collapse_status_distance_guard(basis05, gs1, spec05, grid05):
    st = superpose(gs1, spec05, [1, -1], [-5.0, 5.0], [0, 0], grid05)
    with pytest.raises(CentersTooClose):
        collapse_status(basis05, st, [1, -1], [-5.0, 5.0], _cfg())


def test_ejection_signs_quadrant_labels(basis05, gs1, spec05, grid05):
    st = superpose(gs1, spec05, [1, -1], [-8.0, 8.0], [0.02, -0.02], grid05)
    tau = ejection_signs(basis05, st, [1, -1], [-8.0, 8.0], _cfg())
    assert tau == [1, -1]
    st2 = superpose(gs1, spec05, [1, -1], [-8.0, 8.0], [-0.02, 0.02], grid05)
    tau2 = ejection_signs(basis05, st2, [1, -1], [-8.0, 8.0], _cfg())
    assert tau2 == [-1, 1]


def test_outcome_stability_under_refinement(gs1, make_basis):
    presets = [([1], [0.0], [0.04]), ([1], [0.0], [-0.04]),
               ([1, -1], [-8.0, 8.0], [0.03, 0.03]),
               ([1, -1], [-8.0, 8.0], [-0.03, -0.03])]
    kinds = {}
    for dx in (0.05, 0.025):
        basis = make_basis(0.5, dx=dx)
        cfg = ClassifyConfig(p=3.0, alpha=0.5, dt=0.4 * dx, t_max=100.0,
                             sample_every=10)
        for i, (signs, z, h) in enumerate(presets):
            st = superpose(gs1, basis.spec, signs, z, h, basis.grid)
            out, _ = classify_trajectory(basis, st, signs, z, cfg)
            kinds.setdefault(i, []).append(out.kind)
    for i, pair in kinds.items():
        assert pair[0] == pair[1], f"preset {i}: {pair}"


def test_outcome_json_roundtrip(basis05, gs1, spec05, grid05):
    import json
    st = superpose(gs1, spec05, [1], [0.0], [0.05], grid05)
    out, _ = classify_trajectory(basis05, st, [1], [0.0], _cfg())
    payload = json.dumps(out.to_json_dict(), sort_keys=True)
    back = json.loads(payload)
    assert back["kind"] == "Blowup"
    assert back["evidence"]
