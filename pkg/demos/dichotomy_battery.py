"""Sub-ground-state dichotomy: the lambda Q battery with certificates.

Scaling the soliton keeps the energy below E(Q) for every lambda != 1, so
the sign of the Nehari functional decides the fate at t = 0 already; the
runs then confirm it dynamically (exponential decay on one side, the
blow-up functional crossing and staying above its line on the other).
"""

import math

import numpy as np

from nlkg.classify import ClassifyConfig, classify_trajectory
from nlkg.evolve import EvolveConfig, evolve
from nlkg.field import FieldState, Grid1D, blowup_criterion, discrete_soliton
from nlkg.groundstate import solve_ground_state
from nlkg.modulation import SolitonBasis
from nlkg.spectrum import assemble_eigenmodes, solve_internal_mode

gs = solve_ground_state(1, 3.0, tol=1e-13)
nu0, phi = solve_internal_mode(gs)
spec = assemble_eigenmodes(nu0, phi, gs, 0.5)
grid = Grid1D.make(60.0, 0.05)
basis = SolitonBasis(gs, spec, grid)
profile = discrete_soliton(gs, grid, 0.0)
cfg = ClassifyConfig(p=3.0, alpha=0.5, dt=0.025, t_max=100.0, sample_every=10)

print(f"{'lambda':>7} {'E':>10} {'K0':>10} {'outcome':>10}  evidence")
for lam in (0.5, 0.9, 1.1, 2.0):
    st = FieldState(grid, lam * profile, np.zeros(grid.n))
    out, _ = classify_trajectory(basis, st, None, None, cfg)
    e = (16.0 / 3.0) * (lam ** 2 / 2 - lam ** 4 / 4)
    k0 = (lam ** 2 - lam ** 4) * 16.0 / 3.0
    print(f"{lam:7.2f} {e:10.4f} {k0:10.4f} {out.kind:>10}  "
          f"{[ev['criterion'] for ev in out.evidence]}")

print("\nblow-up functional along the lambda = 2 run:")
ecfg = EvolveConfig(p=3.0, alpha=0.5, dt=0.025, t_max=2.0, sample_every=4,
                    blowup_norm_ref=math.sqrt(gs.h1_sq))
traj = evolve(FieldState(grid, 2.0 * profile, np.zeros(grid.n)), ecfg)
for s in traj.samples:
    line = (3.0 + 1.0) / (3.0 - 1.0) * 2.0 * s.funcs.energy
    print(f"  t={s.time:5.2f}  P={s.funcs.p_func:10.3f}  threshold={line:10.3f}  "
          f"certified={blowup_criterion(s.funcs, 3.0, 0.5)}")
print("terminal event:", traj.terminal_event)
