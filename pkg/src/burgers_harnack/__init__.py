"""Spectral Galerkin simulation and Monte-Carlo verification for the
stochastic Burgers equation on the one-dimensional torus."""

__version__ = "0.1.0"

from .noise import (NoiseSpec, a_minus_half_op_norm, admissible, hs_norm, q_norm,
                    sample_increment)
from .reports import CSV_HEADER, InequalityReport, MCEstimate, write_csv
from .sde import (SimConfig, SimulationDiverged, TangentPath, Trajectory, drift,
                  simulate_coupled, simulate_path, simulate_tangent, step)
from .semigroup import (TestFunction, estimate_exp_moment, estimate_gradient_bound,
                        estimate_hitting, estimate_log_harnack, estimate_Ptf,
                        exp_moment_bound, gradient_factor, log_harnack_constant,
                        wilson_interval)
from .spectral import (NormReport, SpectralField, apply_A_power, bilinear_B,
                       bilinear_B_sym, cos_field, eval_physical, inner, l2_norm,
                       project, random_field, sin_field, v_norm, zero_field)

__all__ = [name for name in dir() if not name.startswith("_")]
