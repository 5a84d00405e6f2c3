"""First-order convex optimization over simple domains.

An optimal subgradient solver whose per-iteration auxiliary problem is a
projection plus a scalar root-find, together with the projection
operators, closed-form subproblem solutions, baseline methods, and a
reproducible benchmark harness.
"""

from .baselines import run_pga, run_psga
from .core import Objective, OsgaParams, default_q0, run
from .domains import (
    Affine,
    Box,
    GroupL12Ball,
    Halfspace,
    Hyperplane,
    L1Ball,
    L2Ball,
    LInfBall,
    NonNeg,
    Simplex,
    project,
    residual,
)
from .harness import ExperimentConfig, delta_k, isnr, psnr, run_experiment
from .problems import CompositeObjective, Convolution2D, DenseMatrix, atv, itv
from .subproblem import (
    Relaxation,
    SubproblemSolution,
    solve,
    solve_closed_form,
    solve_functional_group_l12,
    solve_functional_l2,
    solve_generic,
)
from .trace import TraceRecord

__version__ = "0.1.0"
