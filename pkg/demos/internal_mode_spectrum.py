"""The linearized spectrum at one soliton, and how damping splits it.

The scalar operator -d^2/dx^2 + 1 - p Q^{p-1} has a single negative
eigenvalue -nu0^2; with damping alpha the flow around the soliton carries
one growing rate nu+ and stable rates nu-, 0, -2 alpha.  For p = 3 the
potential is exactly solvable, so nu0^2 = 3 is a hard reference point.
"""

import numpy as np

from nlkg.groundstate import solve_ground_state
from nlkg.spectrum import (MODE_TAGS, assemble_eigenmodes, solve_internal_mode,
                           symplectic_pair)

gs = solve_ground_state(1, 3.0, tol=1e-13)
nu0, phi = solve_internal_mode(gs)
print(f"nu0^2 = {nu0 ** 2:.10f}   (exact 3 for p=3)")
print(f"phi(0) = {phi.at(0.0):.10f}   (exact sqrt(3)/2)")

print("\ndamped eigenvalues across alpha:")
print(f"{'alpha':>7} {'nu+':>12} {'nu-':>12} {'C+_omega':>12} {'C1_omega':>12}")
for alpha in (0.25, 0.5, 1.0, 2.0, 5.0, 20.0):
    s = assemble_eigenmodes(nu0, phi, gs, alpha)
    print(f"{alpha:7.2f} {s.nu_plus:12.6f} {s.nu_minus:12.6f} "
          f"{s.c_omega_plus:12.6f} {s.c_omega_1:12.6f}")

spec = assemble_eigenmodes(nu0, phi, gs, 0.5)
x = np.arange(-40.0, 40.0 + 1e-9, 0.02)
print("\nbiorthogonality of the eigenmode pairs (alpha = 0.5):")
m = np.empty((4, 4))
for i, ti in enumerate(MODE_TAGS):
    yi = spec.y_mode(ti, x)
    for j, tj in enumerate(MODE_TAGS):
        m[i, j] = symplectic_pair(yi, spec.ybar_mode(tj, x), 0.02)
with np.printoptions(precision=3, suppress=False):
    print(m)
print("largest off-diagonal:", np.max(np.abs(m - np.diag(np.diag(m)))))
