import math

import numpy as np
import scipy.linalg as la

from ..errors import ErrDomain, ErrInvalidParameter
from ..kernel.norms import poisson_norm, t_aq_norm
from ..kernel.params import spectral_params
from ..tree.perturbation import PerturbationKind, PerturbationSpec


def path_kernel_top(a: float, size: int) -> float:
    """距离核 [a^{|i-j|}] 在 size 个点的路径上的顶部特征值

    该矩阵的逆是三对角的：对角 (1, 1+a², ..., 1+a², 1)/(1-a²)，次对角 -a/(1-a²)，
    顶部特征值即逆矩阵最小特征值的倒数。
    """
    if size < 1:
        raise ErrInvalidParameter(f"path size must be >= 1, got {size}")
    if not 0.0 <= a < 1.0:
        raise ErrDomain(f"decay rate must lie in [0, 1), got {a!r}")
    if size == 1:
        return 1.0
    diag = np.full(size, 1.0 + a * a)
    diag[0] = diag[-1] = 1.0
    off = np.full(size - 1, -a)
    low = la.eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, 0))[0]
    return (1.0 - a * a) / low


def radial_kernel_matrix(q: int, a: float, depth: int) -> np.ndarray:
    """𝔾^q_depth 上距离核 [a^{d(x,y)}] 在径向函数上的对称化约化

    按壳层 0..depth 编号，K = Ψ^{1/2} M Ψ^{-1/2}，Ψ 为壳层大小，M[i][j] 为
    深度 i 的一点到深度 j 壳层的核之和。记 ξ = a√(q-1)：
      K[0][j] = √(q/(q-1))·ξ^j
      K[i][j] = ξ^{|i-j|} + ξ^{i+j} + (q-2)/(q-1)·ξ^{|i-j|+2}(1-ξ^{2(min(i,j)-1)})/(1-ξ²)，i, j >= 1
    """
    if q < 2:
        raise ErrInvalidParameter(f"subtree order q must be >= 2, got {q}")
    xi = a * math.sqrt(q - 1)
    idx = np.arange(depth + 1, dtype=np.float64)
    i, j = idx[:, None], idx[None, :]
    low = np.minimum(i, j)
    gap = np.abs(i - j)
    if q == 2:
        branch = np.zeros_like(low)
    else:
        # Σ_{t=0}^{min-2} ξ^{2t}
        geometric = np.where(low >= 1, (1.0 - xi ** (2.0 * np.maximum(low - 1.0, 0.0))) / (1.0 - xi * xi), 0.0)
        branch = (q - 2) / (q - 1) * xi ** (gap + 2.0) * geometric
    kernel = xi ** gap + xi ** (i + j) + branch
    edge = math.sqrt(q / (q - 1)) * xi ** idx
    kernel[0, :] = edge
    kernel[:, 0] = edge
    kernel[0, 0] = 1.0
    return kernel


def radial_kernel_top(q: int, a: float, depth: int) -> float:
    """径向核的顶部特征值，即 ‖P T_{a,q} P‖ 在 𝔾^q_depth 上的值"""
    kernel = radial_kernel_matrix(q, a, depth)
    if kernel.shape[0] == 1:
        return 1.0
    n = kernel.shape[0]
    return float(la.eigvalsh(kernel, subset_by_index=[n - 1, n - 1])[0])


def secular_functional(Q: int, pert: PerturbationSpec, lam: float, trunc_n: int) -> float:
    """久期泛函 ‖P_S R_A(λ) P_S‖，S 为截断到 trunc_n 的扰动集合

    Args:
        Q: 树的度
        pert: 扰动族，RootLoops 不依赖截断
        lam: 谱参数
        trunc_n: 截断长度/深度

    Returns:
        核矩阵 [a^{d(x,y)}/μ] 的顶部特征值，RootLoops 为 k/μ

    Raises:
        ErrDomain: λ <= 2√(Q-1)
    """
    pert.check_degree(Q)
    if trunc_n < 0:
        raise ErrInvalidParameter(f"truncation must be >= 0, got {trunc_n}")
    p = spectral_params(Q, lam)
    if pert.kind is PerturbationKind.ROOT_LOOPS:
        return pert.k / p.mu
    if pert.kind is PerturbationKind.SEGMENT:
        return path_kernel_top(p.a, 2 * trunc_n + 1) / p.mu
    if pert.kind is PerturbationKind.RAY:
        return path_kernel_top(p.a, trunc_n + 1) / p.mu
    return radial_kernel_top(pert.q, p.a, trunc_n) / p.mu


def secular_functional_limit(Q: int, pert: PerturbationSpec, lam: float) -> float:
    """无限体积的久期泛函

    k/μ、(1+a)/((1-a)μ)（线段与射线相同）或 (1-a²)/((1-a√(q-1))²μ)；
    a√(q-1) >= 1 时 T_{a,q} 无界，返回 inf。
    """
    pert.check_degree(Q)
    p = spectral_params(Q, lam)
    if pert.kind is PerturbationKind.ROOT_LOOPS:
        return pert.k / p.mu
    if pert.kind in (PerturbationKind.SEGMENT, PerturbationKind.RAY):
        return poisson_norm(p.a) / p.mu
    if p.a * math.sqrt(pert.q - 1) >= 1.0:
        return math.inf
    return t_aq_norm(pert.q, p.a) / p.mu
