"""
久期方程求解包，提供闭式解、截断核上的括区间求根与可行性阈值
"""

from .functional import (
    path_kernel_top,
    radial_kernel_matrix,
    radial_kernel_top,
    secular_functional,
    secular_functional_limit,
)
from .solver import (
    NoRoot,
    SecularResult,
    SecularRoot,
    SolveMethod,
    q_threshold,
    solve_secular_bisection,
    solve_secular_closed,
    solve_secular_fixed_point,
)

__all__ = [
    'path_kernel_top',
    'radial_kernel_matrix',
    'radial_kernel_top',
    'secular_functional',
    'secular_functional_limit',
    'NoRoot',
    'SecularResult',
    'SecularRoot',
    'SolveMethod',
    'q_threshold',
    'solve_secular_bisection',
    'solve_secular_closed',
    'solve_secular_fixed_point',
]
