from .detect import (
    ClusterFinding,
    ClusterPair,
    TagComposition,
    cluster_composition,
    detect_hidden_strata,
    error_vector,
    select_error_cluster_pair,
)
from .kmeans import ClusterAssignment, kmeans

__all__ = [
    "ClusterAssignment",
    "ClusterFinding",
    "ClusterPair",
    "TagComposition",
    "cluster_composition",
    "detect_hidden_strata",
    "error_vector",
    "kmeans",
    "select_error_cluster_pair",
]
