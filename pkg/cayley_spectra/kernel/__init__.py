"""
解析核包，提供树预解式、范数、PF 向量、迹与态密度级数的闭式
"""

from .params import ContourRoots, SpectralParams, contour_roots, edge_norm, spectral_params, walk_kernel
from .norms import (
    family_lambda_star,
    fixed_point_a,
    hidden_lambda_star,
    lambda_from_a,
    min_loops_for_hidden_spectrum,
    poisson_norm,
    root_loops_a,
    t_aq_norm,
)
from .pf import pf_profile, pf_vector_ray, pf_vector_segment, pf_vector_subtree, spherical_phi_half
from .traces import (
    hardy_trace_ray,
    resolvent_entry_perturbed,
    resolvent_trace_segment,
    resolvent_trace_subtree,
    transience_limit_ray,
    transience_limit_subtree,
)
from .recursions import (
    delta_weights,
    finite_recursion_ray,
    finite_recursion_subtree,
    fixed_point_residual_subtree,
    sigma_from_lambda,
    subtree_fixed_point_sigma,
)
from .ids import IdsSeriesParams, critical_density_series, ids_k_max, ids_partition_series

__all__ = [
    'ContourRoots',
    'SpectralParams',
    'contour_roots',
    'edge_norm',
    'spectral_params',
    'walk_kernel',
    'family_lambda_star',
    'fixed_point_a',
    'hidden_lambda_star',
    'lambda_from_a',
    'min_loops_for_hidden_spectrum',
    'poisson_norm',
    'root_loops_a',
    't_aq_norm',
    'pf_profile',
    'pf_vector_ray',
    'pf_vector_segment',
    'pf_vector_subtree',
    'spherical_phi_half',
    'hardy_trace_ray',
    'resolvent_entry_perturbed',
    'resolvent_trace_segment',
    'resolvent_trace_subtree',
    'transience_limit_ray',
    'transience_limit_subtree',
    'delta_weights',
    'finite_recursion_ray',
    'finite_recursion_subtree',
    'fixed_point_residual_subtree',
    'sigma_from_lambda',
    'subtree_fixed_point_sigma',
    'IdsSeriesParams',
    'critical_density_series',
    'ids_k_max',
    'ids_partition_series',
]
