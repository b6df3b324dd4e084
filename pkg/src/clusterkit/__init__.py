"""Hierarchical, k-means and k-medoids clustering with exact accelerations."""
from .core import Clustering, Dataset, Metric, distance
from .evaluation import davies_bouldin, silhouette, simplified_silhouette, sse, variance_ratio
from .extraction import cut_by_height, cut_by_k, extract_with_noise
from .hac import (
    CondensedDistanceMatrix,
    MergeHistory,
    condensed_matrix,
    run_agnes,
    run_anderberg,
    run_minimax,
    run_nnchain,
    run_slink,
)
from .initialization import InitStrategy, initialize
from .io import parse_assignments, parse_int_range, parse_points, write_assignment
from .kmeans import KMeansConfig, KMeansResult, run_kmeans
from .kmedoids import MedoidResult, pam_build, pam_swap, run_clara, run_clarans, run_park
from .linkage import LinkageScheme, coefficients, combine
from .rng import Xoroshiro128Plus, make_rng

__version__ = "0.1.0"
