"""Weighted two-target simultaneous Diophantine approximation toolkit.

Computes exact successive-minima trajectories of the parametric box
family attached to a pair of real targets and weighted exponents,
detects the alternating top/bottom interval structure of the recentered
triple, and checks the two-sided transfer inequality between the
first-upper and third-lower approximation constants on finite windows.
"""

from .analysis import (NormalizedTriple, PhiEstimates, StructureAnnotation,
                       detect_structure, estimate_phi, monotonicity_audit,
                       normalize, psi, synthetic_triple, triple_from_json)
from .errors import (CapExceeded, ConfigError, DependentTargets, OutOfRange,
                     PoleInput, PrecisionExhausted, WapproxError,
                     WindowTooShort, ZeroVector)
from .intervals import (Interval, Ordering, PrecisionPolicy, compare,
                        with_escalation)
from .jarnik import (JarnikReport, TransferParams, check_theorem, f_nu, g_nu,
                     residual_36, symmetric_form)
from .minima import MinimaAtQ, candidate_set, eval_L_x, successive_minima
from .model import (IntVec, NumberSpec, ProblemInstance, TargetPair, Weights,
                    dependence_check, lattice_point, make_instance)
from .oracle import OracleConfig, brute_minima
from .trajectory import (MinimaTrajectory, TrajectorySegment, build_trajectory,
                         evaluate, trajectory_to_json)

__version__ = "0.1.0"

__all__ = [
    "CapExceeded", "ConfigError", "DependentTargets", "Interval", "IntVec",
    "JarnikReport", "MinimaAtQ", "MinimaTrajectory", "NormalizedTriple",
    "NumberSpec", "Ordering", "OracleConfig", "OutOfRange", "PhiEstimates",
    "PoleInput", "PrecisionExhausted", "PrecisionPolicy", "ProblemInstance",
    "StructureAnnotation", "TargetPair", "TrajectorySegment", "TransferParams",
    "WapproxError", "Weights", "WindowTooShort", "ZeroVector",
    "brute_minima", "build_trajectory", "candidate_set", "check_theorem",
    "compare", "dependence_check", "detect_structure", "estimate_phi",
    "eval_L_x", "evaluate", "f_nu", "g_nu", "lattice_point", "make_instance",
    "monotonicity_audit", "normalize", "psi", "residual_36",
    "successive_minima", "symmetric_form", "synthetic_triple",
    "trajectory_to_json", "triple_from_json", "with_escalation",
]
