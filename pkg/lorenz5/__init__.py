__version__ = "0.1.0"

from .analytic.heteroclinic import HeteroclinicBranch, MelnikovSetup, heteroclinic, unperturbed_orbit
from .csv_generator import flatten_json, write_table
from .diagnostics.chaos import delta_f_experiment, lyapunov_mle, poincare_section
from .diagnostics.sweep import SweepGrid, sweep
from .geometry.poisson import R5, SE2R2, PoissonStructure, ScalarField, bracket
from .melnikov.melnikov import MelnikovProfile, melnikov_closed, melnikov_numeric, melnikov_profile
from .models.lorenz import ModelParams, lorenz5_rhs, transformed_rhs
from .numerics.integrators import Trajectory, integrate
