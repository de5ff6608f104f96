"""Normalized Ricci flow and Ricci-DeTurck flow of rotationally symmetric
asymptotically hyperbolic metrics on the n-ball.

Modules
-------
geometry
    Radial grids, warped-product metrics, curvature and weighted norms.
flow
    Ricci and Ricci-DeTurck flows, gauge maps and chained recovery.
spectral
    Linearized operator, spectrum, resolvent sectors, indicial roots.
experiments
    Convergence, stability, dependence and gauge-consistency experiments.
cli
    Batch command-line front end.
"""

__version__ = "0.1.0"

from .geometry import (AdmissibilityReport, BoundaryWeight, DegenerateMetricError, MetricPerturbation,
                       RadialGrid, RotSymMetric, WeightedNormParams, check_ah_admissible,
                       distance_to_hyperbolic, from_profile, hyperbolic_metric, weighted_norm)
from .flow import (CFLViolation, FlowConfig, FlowError, FlowTrajectory, GaugeFailure, GaugeMap,
                   chained_rdtf, run_flow)

__all__ = [
    "__version__", "AdmissibilityReport", "BoundaryWeight", "DegenerateMetricError",
    "MetricPerturbation", "RadialGrid", "RotSymMetric", "WeightedNormParams", "check_ah_admissible",
    "distance_to_hyperbolic", "from_profile", "hyperbolic_metric", "weighted_norm", "CFLViolation",
    "FlowConfig", "FlowError", "FlowTrajectory", "GaugeFailure", "GaugeMap", "chained_rdtf", "run_flow",
]
