"""Topological evaluation of small generative models on tabular point clouds."""

from topogen.pointcloud import PointCloud, DistanceMatrix, load_csv, pairwise_distances
from topogen.rips import FilteredComplex, Simplex, build_vietoris_rips
from topogen.persistence import PersistenceDiagram, PersistencePair, compute_persistence
from topogen.bottleneck import bottleneck_distance


__all__ = [
    "PointCloud",
    "DistanceMatrix",
    "load_csv",
    "pairwise_distances",
    "FilteredComplex",
    "Simplex",
    "build_vietoris_rips",
    "PersistenceDiagram",
    "PersistencePair",
    "compute_persistence",
    "bottleneck_distance",
]

__version__ = "0.1.0"
