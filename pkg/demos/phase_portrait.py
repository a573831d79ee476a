"""Classification map over the two unstable amplitudes of a soliton pair.

Every cell classifies the initial data  Q(x+8) - Q(x-8) with amplitude
kicks (h1, h2) on the two unstable modes.  The decaying set fills the
corner where both kicks point to the decay side (h < 0), blow-up fills the
complement, and the joint threshold point sits near the origin.
"""

import numpy as np

from nlkg.classify import ClassifyConfig
from nlkg.field import Grid1D
from nlkg.groundstate import solve_ground_state
from nlkg.manifold import find_2sol_point, phase_map
from nlkg.modulation import SolitonBasis
from nlkg.spectrum import assemble_eigenmodes, solve_internal_mode

gs = solve_ground_state(1, 3.0, tol=1e-13)
nu0, phi = solve_internal_mode(gs)
spec = assemble_eigenmodes(nu0, phi, gs, 0.5)
basis = SolitonBasis(gs, spec, Grid1D.make(60.0, 0.05))
cfg = ClassifyConfig(p=3.0, alpha=0.5, dt=0.025, t_max=150.0, sample_every=10)

hs = np.linspace(-0.08, 0.08, 9)
pm = phase_map(basis, [1, -1], [-8.0, 8.0], None, hs, hs, cfg)
glyph = {"Decay": ".", "Blowup": "#", "OneSoliton": "1",
         "TwoSoliton": "2", "Undetermined": "?"}
print("phase portrait ( . decay, # blow-up ); h1 down, h2 across:")
for i in range(len(hs)):
    row = "".join(glyph.get(pm.kinds[i, j], "?") for j in range(len(hs)))
    print(f"  h1={hs[i]:+ .2f}  {row}")
print("edge-connected:", pm.metadata["connected"])
pm.to_csv("phase_portrait.csv")
print("wrote phase_portrait.csv")

h1, h2 = find_2sol_point(basis, [1, -1], [-8.0, 8.0], None, tol=1e-5,
                         cfg=cfg, half_width=0.02, check_corners=False)
print(f"joint threshold point G0 = ({h1:.3e}, {h2:.3e})")
