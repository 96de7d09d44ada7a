"""Feature-splitting proximal point solvers for Dantzig selectors.

Solves  min ||beta||_1  s.t.  ||X^T(X beta - y)/n||_inf <= lambda
(and SCAD/MCP weighted variants) with serial and column-partitioned
parallel proximal point iterations, plus linearized ADMM baselines,
synthetic data generation, tuning, and verification utilities.
"""

from dsppa.problem import ProblemData
from dsppa.linalg import Partition, GramBlocks, gram_blocks, blocked_matvec, power_method_max_eigen
from dsppa.prox import (
    PenaltySpec,
    soft_threshold,
    weighted_soft_threshold,
    project_linf_box,
    penalty_derivative,
)
from dsppa.solvers import SolverConfig, SolveReport, ppa_solve, pppa_solve, ippa_solve, stopping_check
from dsppa.lla import LLAConfig, compute_weights, lla_solve
from dsppa.baselines import ladmm_solve, tadmm_solve
from dsppa.datagen import ScenarioSpec, gen_ar1_design, gen_sparse_beta, gen_dense_beta, gen_noise, gen_dataset

__version__ = "0.1.0"

__all__ = [
    "ProblemData",
    "Partition",
    "GramBlocks",
    "gram_blocks",
    "blocked_matvec",
    "power_method_max_eigen",
    "PenaltySpec",
    "soft_threshold",
    "weighted_soft_threshold",
    "project_linf_box",
    "penalty_derivative",
    "SolverConfig",
    "SolveReport",
    "ppa_solve",
    "pppa_solve",
    "ippa_solve",
    "stopping_check",
    "LLAConfig",
    "compute_weights",
    "lla_solve",
    "ladmm_solve",
    "tadmm_solve",
    "ScenarioSpec",
    "gen_ar1_design",
    "gen_sparse_beta",
    "gen_dense_beta",
    "gen_noise",
    "gen_dataset",
]
