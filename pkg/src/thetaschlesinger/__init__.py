"""Theta-function solutions of 2x2 Schlesinger systems with exponents +-1/4.

Modules: ``numeric`` (quadrature, differences, root finding), ``curve``
(hyperelliptic periods and Abel map), ``theta`` (Riemann and Jacobi theta),
``schlesinger`` (residues, Hamiltonians, tau), ``monodromy`` (independent
ODE transport), ``painleve6`` (genus-one reduction), ``verification`` and
``cli``.
"""
from .curve import BranchConfiguration, PeriodData, abel_map, riemann_matrix
from .errors import *  # noqa: F401,F403
from .monodromy import verify_monodromies
from .painleve6 import (EllipticModule, PviCoefficients, PviSample, TParam, hitchin_solution,
                        okamoto_transform, picard_solution, pvi_residual, sigma_from_t,
                        tau_elliptic, y_alt, y_from_schlesinger, y_from_tau, y_theta)
from .schlesinger import monodromy_data, solve, solve_residues
from .theta import BranchSubset, Characteristic, jacobi_theta, theta_full

__version__ = "0.1.0"
