"""First passage percolation on the configuration model with Exp(1) edge weights."""

from .degrees import DegreeDistribution, SizeBiasedDistribution, moments, sample_degree, sample_size_biased
from .errors import FppError
from .graph import MultiGraph, build, sample_degree_sequence
from .limits import LimitLawSamplers
from .oracle import assign_weights, shortest_path
from .stats import a_n, clt_report, distance_contrast, theory_constants
from .swg import ProcessPairing, connection_time_stats, grow_bilateral, grow_single

__all__ = [
    "DegreeDistribution",
    "SizeBiasedDistribution",
    "moments",
    "sample_degree",
    "sample_size_biased",
    "FppError",
    "MultiGraph",
    "build",
    "sample_degree_sequence",
    "LimitLawSamplers",
    "assign_weights",
    "shortest_path",
    "a_n",
    "clt_report",
    "distance_contrast",
    "theory_constants",
    "ProcessPairing",
    "connection_time_stats",
    "grow_bilateral",
    "grow_single",
]
