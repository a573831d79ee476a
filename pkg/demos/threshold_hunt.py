"""Locating the decay/blow-up boundary by certified bisection.

For a single soliton the boundary in the unstable amplitude sits exactly
at h = 0; with a second soliton present it shifts by the interaction.  The
near-threshold run lingers inside the surviving soliton's tube, which is
the dynamical signature of the separating manifold.
"""

from nlkg.classify import ClassifyConfig
from nlkg.field import Grid1D
from nlkg.groundstate import solve_ground_state
from nlkg.manifold import find_threshold
from nlkg.modulation import SolitonBasis
from nlkg.spectrum import assemble_eigenmodes, solve_internal_mode

gs = solve_ground_state(1, 3.0, tol=1e-13)
nu0, phi = solve_internal_mode(gs)
spec = assemble_eigenmodes(nu0, phi, gs, 0.5)
basis = SolitonBasis(gs, spec, Grid1D.make(60.0, 0.05))

cfg = ClassifyConfig(p=3.0, alpha=0.5, dt=0.025, t_max=60.0, sample_every=10)
res = find_threshold(basis, [1], [0.0], None, None, (-0.1, 0.1),
                     tol=1e-7, cfg=cfg)
print(f"single soliton: h* = {res.h_star:+.2e} (bracket {res.bracket_width:.1e}, "
      f"{len(res.probes)} probes)")

cfg2 = ClassifyConfig(p=3.0, alpha=0.5, dt=0.025, t_max=150.0, sample_every=4)
res2 = find_threshold(basis, [1, -1], [-8.0, 8.0], -0.05, 1,
                      (-0.05, 0.05), tol=4e-6, cfg=cfg2)
print(f"\npair, second soliton suppressed (h2 = -0.05):")
print(f"  h1* = {res2.h_star:+.6e}")
print(f"  near-threshold run: {res2.near_threshold_trace['kind']}, "
      f"1-soliton hold {res2.near_threshold_trace['hold_time']:.2f} time units")
print("  last probes:")
for p in res2.probes[-6:]:
    print(f"    h={p['h']:+.6e}  ->  {p['kind']:6s}  hold={p['hold']:.2f}")
