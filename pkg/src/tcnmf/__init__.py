"""Truncated Cauchy non-negative matrix factorization.

Robust NMF by half-quadratic optimization: a bounded Cauchy loss whose
weights vanish on detected outliers, solved with alternating weighted
NNLS steps. Reweighted baselines (L2, L1, L2,1, Huber, CIM, Cauchy),
corruption generators and clustering metrics ship alongside.
"""

from . import _env  # noqa: F401  (must run before numba is imported)
from ._kernels import BACKEND
from .baselines import METHODS as BASELINE_METHODS
from .baselines import BaselineConfig, factorize_baseline
from .datagen import (CorruptionSpec, SyntheticLineSpec, corrupt, gen_clustered, gen_line,
                      gen_lowrank)
from .hq import (HqState, SolverConfig, detect_outliers, estimate_scale_nagy, factorize,
                 coef_bound_check, outlier_threshold, update_weights)
from .losses import TruncatedCauchyLoss, WeightFunction, baseline_weight, g, hq_weight
from .metrics import ClusterReport, accuracy, evaluate, kmeans, nmi, rel_error
from .wnls import WnlsProblem, solve_wnls

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BASELINE_METHODS", "BaselineConfig", "ClusterReport", "CorruptionSpec",
    "HqState", "SolverConfig", "SyntheticLineSpec", "TruncatedCauchyLoss", "WeightFunction",
    "WnlsProblem", "accuracy", "baseline_weight", "corrupt", "detect_outliers",
    "estimate_scale_nagy", "evaluate", "factorize", "factorize_baseline", "g", "gen_clustered",
    "gen_line", "gen_lowrank", "hq_weight", "kmeans", "coef_bound_check", "nmi", "outlier_threshold",
    "rel_error", "solve_wnls", "update_weights",
]
