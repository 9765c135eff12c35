"""Quantum encodings of finite metric spaces and their persistent homology."""

from .bottleneck import bottleneck_distance, diagram_set_distance
from .encode import ENCODINGS, encode_cloud, fit_uniform_transform, utd_encode, uts_encode
from .mds import EmbeddingResult, classical_mds, qmds, stress_mds
from .metric import (distortion, euclidean_distance_matrix, gh_upper_bound, optimal_weight,
                     scale_free_distortion, strain, stress)
from .ph import PersistenceDiagram, SimplexLimitError, diagrams, vietoris_rips
from .quantum import Metric, distance_matrix, fidelity, state_distance

__all__ = [
    "ENCODINGS", "EmbeddingResult", "Metric", "PersistenceDiagram", "SimplexLimitError",
    "bottleneck_distance", "classical_mds", "diagram_set_distance", "diagrams", "distance_matrix",
    "distortion", "encode_cloud", "euclidean_distance_matrix", "fidelity", "fit_uniform_transform",
    "gh_upper_bound", "optimal_weight", "qmds", "scale_free_distortion", "state_distance", "strain",
    "stress", "stress_mds", "utd_encode", "uts_encode", "vietoris_rips",
]
