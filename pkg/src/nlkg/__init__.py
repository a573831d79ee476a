"""Numerical laboratory for damped Klein-Gordon soliton dynamics on the line."""

__version__ = "0.1.0"

from .groundstate import GroundState, solve_ground_state, eta0, eta0_prime
from .spectrum import SpectralData, solve_internal_mode, assemble_eigenmodes, symplectic_pair
from .field import (Grid1D, FieldState, Functionals, superpose, functionals,
                    blowup_criterion, subcritical_dichotomy, Dichotomy)
from .evolve import EvolveConfig, Trajectory, step, evolve, localized_runs
from .modulation import (SolitonBasis, SolitonFrame, project, fit_centers,
                         soliton_potential, n_energy, calibrate_m, modulation_rhs,
                         reduced_gradient_flow, even_part_norm, toy_unstable_ode)
from .classify import Outcome, ClassifyConfig, classify_trajectory, stage_times, collapse_status
from .manifold import ThresholdResult, PhaseMap, find_threshold, find_2sol_point, phase_map, lipschitz_probe
