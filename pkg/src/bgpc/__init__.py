"""Blind gain and phase calibration by (truncated) power iteration."""

from .core import (Dims, DimensionError, EtaVector, GroundTruth, ProblemInstance, distance, msnr, pack_eta,
                   rsnr, unpack_eta)
from .operators import CalibrationOperator, apply_B, apply_G, dense_B, estimate_beta, expected_Bs
from .projections import Hybrid, JointRows, PerColumn, project_columns, project_eta, project_rows
from .solvers import (DegenerateIterationError, SolverConfig, SolveResult, phase_informed_eta0, power_iteration,
                      truncated_power_iteration)
from .initializer import InitReport, dstar_e_row_norms, initialize
from .baselines import AdmmConfig, l1_admm, l21_admm, least_squares
from .synth import EnsembleSpec, assumption_diagnostics, gen_instance

__version__ = "0.1.0"
