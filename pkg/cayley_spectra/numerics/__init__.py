"""
数值对照包，提供稀疏特征求解、预解式线性求解与经验态密度
"""

from .eigen import SpectralEstimate, ball_spectrum_blocks, full_spectrum, top_eigenpair
from .resolvent import (
    Recurrence,
    TraceVerdict,
    conjugate_gradient,
    converged_trace,
    path_trace,
    radial_trace,
    resolvent_solve,
    trace_extrapolate,
)
from .ids import IdsCurve, ball_eigenvalues, ids_empirical, kolmogorov_distance, partition_function, pf_deviation

__all__ = [
    'SpectralEstimate',
    'ball_spectrum_blocks',
    'full_spectrum',
    'top_eigenpair',
    'Recurrence',
    'TraceVerdict',
    'conjugate_gradient',
    'converged_trace',
    'path_trace',
    'radial_trace',
    'resolvent_solve',
    'trace_extrapolate',
    'IdsCurve',
    'ball_eigenvalues',
    'ids_empirical',
    'kolmogorov_distance',
    'partition_function',
    'pf_deviation',
]
