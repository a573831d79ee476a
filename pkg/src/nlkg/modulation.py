"""Soliton-frame decomposition, collective coordinates and reduced models.

A state near a K-soliton is written as  u = sum_k sigma_k Q(x - z_k) + v
with centers fixed by symplectic orthogonality of v to the translation
modes.  The remainder is split into unstable-mode coefficients, center
coefficients and radiation via the near-identity Gram system of the
translated eigenmodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import CollisionDetected, NewtonDiverged
from .field import FieldState, functionals, h_norm_sq_pair
from .groundstate import GroundState, eta0, eta0_prime
from .spectrum import SpectralData, symplectic_pair

__all__ = ["SolitonBasis", "SolitonFrame", "InteractionKernel", "project",
           "fit_centers", "soliton_potential", "n_energy", "calibrate_m",
           "modulation_rhs", "reduced_gradient_flow", "even_part_norm",
           "toy_unstable_ode", "ToyTrajectory", "eta_plus"]


def calibrate_m(spec: SpectralData, margin: float = 0.1) -> float:
    """Coefficient making the single-soliton quadratic form positive definite.

    The (a+, a-) block of the linearized energy is
        [[m/2 - alpha nu+, -nu0^2], [-nu0^2, -alpha nu-]];
    the smallest m giving both eigenvalues >= margin (and m/2 >= margin) is
    located by doubling plus bisection, then doubled for safety.
    """
    a, n2 = spec.alpha, spec.nu0 ** 2

    def ok(m):
        blk = np.array([[0.5 * m - a * spec.nu_plus, -n2],
                        [-n2, -a * spec.nu_minus]])
        return min(np.linalg.eigvalsh(blk)) >= margin and 0.5 * m >= margin

    lo, hi = 0.0, 0.25
    while not ok(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e9:
            raise RuntimeError("calibration runaway")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return 2.0 * hi


class InteractionKernel:
    """Cached spline of log eta0 for fast repeated distance evaluations."""

    def __init__(self, gs: GroundState, d_min: float = 2.0, d_max: float | None = None,
                 step: float = 0.25):
        if d_max is None:
            d_max = min(50.0, 2.0 * gs.r_max - 10.0)  # supports overlap out to 2 r_max
        d = np.arange(d_min, d_max + step, step)
        vals = np.array([eta0(gs, float(a)) for a in d])
        self._spline = CubicSpline(d, np.log(vals))
        self.d_min, self.d_max = d_min, d_max

    def eta(self, d):
        return np.exp(self._spline(np.clip(d, self.d_min, self.d_max)))

    def eta_prime(self, d):
        dc = np.clip(d, self.d_min, self.d_max)
        return np.exp(self._spline(dc)) * self._spline(dc, 1)


@dataclass
class SolitonFrame:
    """Snapshot of a state decomposed around K fitted solitons."""

    signs: np.ndarray
    z: np.ndarray
    a_plus: np.ndarray
    a_center: np.ndarray
    gamma: tuple
    v_norm: float
    gamma_h: float
    dz: float
    v_pot: float
    n_energy: float
    residual: float
    time: float = 0.0
    coeffs: np.ndarray = dc_field(default=None, repr=False)

    @property
    def k(self) -> int:
        return len(self.z)

    def summary(self, even_norm: float | None = None) -> dict:
        out = {"z": [float(c) for c in self.z],
               "aplus": [float(a) for a in self.a_plus],
               "gammaH": self.gamma_h, "V": self.v_pot,
               "Nenergy": self.n_energy, "Dz": self.dz}
        if even_norm is not None:
            out["evenNorm"] = even_norm
        return out


class SolitonBasis:
    """Ground state + spectral data bound to a concrete 1D grid."""

    def __init__(self, gs: GroundState, spec: SpectralData, grid):
        if gs.dimension != 1:
            raise ValueError("modulation machinery runs on the line (N=1)")
        self.gs = gs
        self.spec = spec
        self.grid = grid
        self.p = gs.power
        self.alpha = spec.alpha
        self.m_const = calibrate_m(spec)
        self.kernel = InteractionKernel(gs)
        # lattice-dressed soliton profile on this grid: reconstructing with it
        # instead of the continuum Q removes the static O(dx^2) component of
        # the fitted remainder, so the mode coefficients see only dynamics
        from .field import discrete_soliton
        prof = discrete_soliton(gs, grid, 0.0)
        self._profile_spline = CubicSpline(grid.x, prof)
        self._profile_limit = grid.L - 2.0 * grid.dx
        ref = FieldState(grid, prof, np.zeros(grid.n))
        self.e_ground_disc = functionals(ref, self.p, self.alpha).energy

    @property
    def error_exponents(self) -> dict:
        """Rates governing interaction remainders: p1 = min(2, p/2),
        p2 = min(2, (p+1)/2), p3 = min(p1 - 1, sqrt(1 + nu0^2) - 1)."""
        p1 = min(2.0, self.p / 2.0)
        p2 = min(2.0, (self.p + 1.0) / 2.0)
        p3 = min(p1 - 1.0, math.sqrt(1.0 + self.spec.nu0 ** 2) - 1.0)
        return {"p1": p1, "p2": p2, "p3": p3}

    def soliton_profile(self, x, center: float) -> np.ndarray:
        arg = np.asarray(x) - center
        out = self._profile_spline(np.clip(arg, -self._profile_limit,
                                           self._profile_limit))
        return np.where(np.abs(arg) <= self._profile_limit, out, 0.0)

    def q_sum(self, signs, z) -> np.ndarray:
        x = self.grid.x
        out = np.zeros(self.grid.n)
        for s, c in zip(signs, z):
            out += s * self.soliton_profile(x, c)
        return out

    def v_of(self, state: FieldState, signs, z):
        return state.u - self.q_sum(signs, z), state.udot.copy()

    def project(self, diff, xi: str, c: float) -> float:
        ybar = self.spec.ybar_mode(xi, self.grid.x, c)
        return symplectic_pair(diff, ybar, self.grid.dx) / self.spec.c_omega(xi)

    def gram(self, z, tags=("+", "1")) -> np.ndarray:
        """G[(l,eta),(k,xi)] = omega(Y^xi_k, Ybar^eta_l) / C^eta."""
        k = len(z)
        modes = [(self.spec.y_mode(t, self.grid.x, c), t, c) for c in z for t in tags]
        size = k * len(tags)
        g = np.empty((size, size))
        for row in range(size):
            _, t_row, c_row = modes[row]
            ybar = self.spec.ybar_mode(t_row, self.grid.x, c_row)
            for col in range(size):
                y, _, _ = modes[col]
                g[row, col] = (symplectic_pair(y, ybar, self.grid.dx)
                               / self.spec.c_omega(t_row))
        return g

    def decompose(self, v, z, tags=("+", "1")):
        """Lemma-style splitting v = sum_k P_k v + gamma with exact orthogonality."""
        k = len(z)
        proj = np.array([self.project(v, t, c) for c in z for t in tags])
        g = self.gram(z, tags)
        tilde = np.linalg.solve(g, proj)
        g1 = v[0].copy()
        g2 = v[1].copy()
        for idx, (c, t) in enumerate((c, t) for c in z for t in tags):
            y1, y2 = self.spec.y_mode(t, self.grid.x, c)
            g1 -= tilde[idx] * y1
            g2 -= tilde[idx] * y2
        return proj, tilde.reshape(k, len(tags)), (g1, g2)


def project(basis: SolitonBasis, diff, xi: str, c: float) -> float:
    """Symplectic coefficient of mode xi at center c of a pair field."""
    return basis.project(diff, xi, c)


def soliton_potential(gs: GroundState, signs, z, kernel: InteractionKernel | None = None):
    """Interaction energy V = -sum_{k<l} s_k s_l eta0(|z_k - z_l|) and its gradient."""
    signs = np.atleast_1d(np.asarray(signs, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    k = len(z)
    e = (lambda d: kernel.eta(d)) if kernel else (lambda d: eta0(gs, d))
    ep = (lambda d: kernel.eta_prime(d)) if kernel else (lambda d: eta0_prime(gs, d))
    v = 0.0
    grad = np.zeros(k)
    for i in range(k):
        for j in range(i + 1, k):
            d = abs(z[i] - z[j])
            v -= signs[i] * signs[j] * e(d)
            g = -signs[i] * signs[j] * ep(d)
            grad[i] += g * math.copysign(1.0, z[i] - z[j])
            grad[j] += g * math.copysign(1.0, z[j] - z[i])
    return float(v), grad


def fit_centers(basis: SolitonBasis, state: FieldState, signs, z_guess,
                tol: float = 1e-10, max_iter: int = 60) -> SolitonFrame:
    """Newton fit of centers so the remainder is orthogonal to translation modes.

    The first two iterations use a finite-difference Jacobian, after which it
    is frozen to the leading diagonal sigma_k C^1_omega.  Raises
    NewtonDiverged when the state is outside the tubular neighborhood.
    """
    signs = np.atleast_1d(np.asarray(signs, dtype=float))
    z = np.atleast_1d(np.asarray(z_guess, dtype=float)).copy()
    k = len(z)

    def residual_vec(zz):
        v = basis.v_of(state, signs, zz)
        return np.array([basis.project(v, "1", c) for c in zz])

    phi = residual_vec(z)
    for it in range(max_iter):
        if np.max(np.abs(phi)) <= tol:
            break
        if it < 2 and k > 1:
            jac = np.empty((k, k))
            eps = 1e-6
            for j in range(k):
                zp = z.copy()
                zp[j] += eps
                jac[:, j] = (residual_vec(zp) - phi) / eps
            try:
                dz_step = np.linalg.solve(jac, phi)
            except np.linalg.LinAlgError:
                raise NewtonDiverged("singular center-fit Jacobian")
        else:
            dz_step = phi / signs
        z = z - dz_step
        if not np.all(np.isfinite(z)) or np.max(np.abs(z - np.atleast_1d(z_guess))) > 2.0:
            raise NewtonDiverged("center fit left the tubular neighborhood")
        phi = residual_vec(z)
    else:
        raise NewtonDiverged(f"center fit residual {np.max(np.abs(phi)):.2e} > tol")

    v = basis.v_of(state, signs, z)
    proj, tilde, gamma = basis.decompose(v, z)
    a_plus = np.array([basis.project(v, "+", c) for c in z])
    a_center = np.array([basis.project(v, "1", c) for c in z])
    dz = min((abs(z[i] - z[j]) for i in range(k) for j in range(i + 1, k)),
             default=math.inf)
    v_pot, _ = soliton_potential(basis.gs, signs, z, basis.kernel)
    funcs = functionals(state, basis.p, basis.alpha)
    ne = (funcs.energy - k * basis.e_ground_disc
          + basis.m_const * float(np.dot(a_plus, a_plus)))
    return SolitonFrame(signs=signs, z=z, a_plus=a_plus, a_center=a_center,
                        gamma=gamma, v_norm=math.sqrt(h_norm_sq_pair(v, basis.grid.dx)),
                        gamma_h=math.sqrt(h_norm_sq_pair(gamma, basis.grid.dx)),
                        dz=dz, v_pot=v_pot, n_energy=ne,
                        residual=float(np.max(np.abs(a_center))),
                        time=state.time, coeffs=tilde)


def n_energy(basis: SolitonBasis, state: FieldState, frame: SolitonFrame,
             m_const: float | None = None) -> float:
    """Energy distance E(u) - K E(Q) + m |a+|^2 to the K-soliton family."""
    m = basis.m_const if m_const is None else m_const
    funcs = functionals(state, basis.p, basis.alpha)
    return (funcs.energy - frame.k * basis.e_ground_disc
            + m * float(np.dot(frame.a_plus, frame.a_plus)))


def modulation_rhs(basis: SolitonBasis, frame: SolitonFrame) -> np.ndarray:
    """Leading-order center velocity  zdot = -grad V / C^1_omega."""
    _, grad = soliton_potential(basis.gs, frame.signs, frame.z, basis.kernel)
    return -grad / basis.spec.c_omega_1


@dataclass
class ReducedFlowResult:
    t: np.ndarray
    z: np.ndarray        # shape (n_samples, K)
    eta_min: np.ndarray  # eta0 evaluated at the minimal pairwise distance


def reduced_gradient_flow(gs: GroundState, spec: SpectralData, signs, z0,
                          t_max: float, dt: float = 0.05,
                          store_every: int = 10,
                          kernel: InteractionKernel | None = None) -> ReducedFlowResult:
    """RK4 integration of  zdot = -grad V_sigma(z) / C^1_omega.

    Raises CollisionDetected when any pairwise distance drops below 3.
    """
    signs = np.atleast_1d(np.asarray(signs, dtype=float))
    z = np.atleast_1d(np.asarray(z0, dtype=float)).copy()
    kernel = kernel or InteractionKernel(gs)
    c1 = spec.c_omega_1

    def rhs(zz):
        _, grad = soliton_potential(gs, signs, zz, kernel)
        return -grad / c1

    def min_dist(zz):
        return min((abs(zz[i] - zz[j]) for i in range(len(zz))
                    for j in range(i + 1, len(zz))), default=math.inf)

    n = int(round(t_max / dt))
    ts, zs, etas = [0.0], [z.copy()], [kernel.eta(min_dist(z)) if len(z) > 1 else 0.0]
    for i in range(1, n + 1):
        k1 = rhs(z)
        k2 = rhs(z + 0.5 * dt * k1)
        k3 = rhs(z + 0.5 * dt * k2)
        k4 = rhs(z + dt * k3)
        z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        d = min_dist(z)
        if d < 3.0:
            raise CollisionDetected(f"pairwise distance {d:.3f} < 3 at t={i * dt:.2f}")
        if i % store_every == 0 or i == n:
            ts.append(i * dt)
            zs.append(z.copy())
            etas.append(kernel.eta(d) if len(z) > 1 else 0.0)
    return ReducedFlowResult(np.array(ts), np.array(zs), np.array(etas))


def even_part_norm(basis: SolitonBasis, state: FieldState, frame: SolitonFrame) -> float:
    """||v + Iv||_H with Iv(x) = v(-x + z1 + z2), midpoint from the frame."""
    if frame.k != 2:
        raise ValueError("even-part diagnostic is defined for K=2")
    v1, v2 = basis.v_of(state, frame.signs, frame.z)
    zbar = float(frame.z[0] + frame.z[1])
    x = basis.grid.x
    xr = zbar - x
    i1 = np.interp(xr, x, v1, left=0.0, right=0.0)
    i2 = np.interp(xr, x, v2, left=0.0, right=0.0)
    return math.sqrt(h_norm_sq_pair((v1 + i1, v2 + i2), basis.grid.dx))


def eta_plus(gs: GroundState, spec: SpectralData, a: float) -> float:
    """Diagnostic overlap <f'(Q) phi, Q(. - a)> on the line."""
    h = gs.r[1] - gs.r[0]
    x = np.arange(-gs.r_max, gs.r_max + a + h, h)
    fpq = gs.power * gs.profile(x) ** (gs.power - 1.0)
    ph = spec.phi.line_values(x)
    return float(np.trapezoid(fpq * ph * gs.profile(x - a), dx=h))


@dataclass
class ToyTrajectory:
    t: np.ndarray
    direction: np.ndarray  # unit vectors, shape (n, 2)
    log_norm: np.ndarray

    def ratio(self) -> np.ndarray:
        """h2/h1 (signed); inf where h1 vanishes."""
        with np.errstate(divide="ignore"):
            return self.direction[:, 1] / self.direction[:, 0]

    def crossing_time(self, target: float, axis: int) -> float | None:
        """First time |h_other / h_axis| >= target."""
        other = 1 - axis
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.abs(self.direction[:, other] / self.direction[:, axis])
        hit = np.nonzero(r >= target)[0]
        return float(self.t[hit[0]]) if len(hit) else None


def toy_unstable_ode(eps: float, h0, t_max: float, nu_plus: float = 1.0) -> ToyTrajectory:
    """Model of two coupled unstable modes with decaying off-diagonal forcing.

        d/dt (h1, h2) = [[nu+, eps^2 e^-t], [eps^2 e^-t, nu+ + eps/(1+t)]] h

    Integrated in the frame rescaled by e^{nu+ t} (an exact substitution)
    with RK4 and geometrically growing steps, so the slow overtaking of the
    initialized axis is reachable without overflow.
    """
    g = np.asarray(h0, dtype=float).copy()
    if np.all(g == 0.0):
        raise ValueError("h0 must be nonzero")
    t = 0.0
    log_extra = 0.0
    ts = [0.0]
    dirs = [g / np.linalg.norm(g)]
    logs = [math.log(np.linalg.norm(g))]

    def mat(tt):
        c = eps * eps * math.exp(-tt)
        return np.array([[0.0, c], [c, eps / (1.0 + tt)]])

    while t < t_max:
        dt = min(0.02 * (1.0 + t), t_max - t)
        k1 = mat(t) @ g
        k2 = mat(t + 0.5 * dt) @ (g + 0.5 * dt * k1)
        k3 = mat(t + 0.5 * dt) @ (g + 0.5 * dt * k2)
        k4 = mat(t + dt) @ (g + dt * k3)
        g = g + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
        nrm = np.linalg.norm(g)
        log_extra += math.log(nrm)
        g = g / nrm
        ts.append(t)
        dirs.append(g.copy())
        logs.append(nu_plus * t + log_extra + logs[0])
    return ToyTrajectory(np.array(ts), np.array(dirs), np.array(logs))
