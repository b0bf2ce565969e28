"""Hamiltonian Boundary Value Methods with Fourier space discretization."""
from .core import (ControllerState, HbvmTableau, Integrator, InvalidParams, NoConvergence,
                   SMaxExceeded, SolverConfig, SolverMode, adaptive_step, build_tableau,
                   k_rule, rho_ratio, solve_gamma, startup_step, step)
from .harness import RunReport, RunSpec, dump_solution_grid, run, run_table
from .legendre import (QuadratureRule, gauss_legendre_rule, shifted_legendre_eval,
                       shifted_legendre_primitive)
from .problems import (KDV, NLSE, PROBLEMS, SINE_GORDON, ErrorReport, get_problem,
                       initial_state, measure_errors)
from .spectral import FourierBasis, KdVSystem, NLSSystem, WaveSystem

__version__ = "0.1.0"
