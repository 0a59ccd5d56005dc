"""Discriminative subgraph mining with side-view guidance."""
from .graph import GraphCorpus, LabeledGraph, SideViewSet, contains
from .gside import build_omega, build_phi, build_theta, gside_bound, gside_score
from .gspan import DFSCode, gspan_enumerate, is_min, min_dfs_code
from .mining import MiningResult, ScoredPattern, feature_matrix, gmsv_mine, gside_laplacians

__all__ = [
    "GraphCorpus", "LabeledGraph", "SideViewSet", "contains",
    "build_omega", "build_phi", "build_theta", "gside_bound", "gside_score",
    "DFSCode", "gspan_enumerate", "is_min", "min_dfs_code",
    "MiningResult", "ScoredPattern", "feature_matrix", "gmsv_mine", "gside_laplacians",
]
