"""
树模型包，提供有限球、扰动放置与邻接矩阵组装
"""

from .ball import TreeBall, build_ball, distance, distance_matrix, nearest_in_set, nearest_in_set_all, vertex_count
from .perturbation import PerturbationKind, PerturbationSpec, perturbation_density, perturbed_vertices
from .adjacency import SparseAdjacency, assemble_adjacency

__all__ = [
    'TreeBall',
    'build_ball',
    'distance',
    'distance_matrix',
    'nearest_in_set',
    'nearest_in_set_all',
    'vertex_count',
    'PerturbationKind',
    'PerturbationSpec',
    'perturbation_density',
    'perturbed_vertices',
    'SparseAdjacency',
    'assemble_adjacency',
]
