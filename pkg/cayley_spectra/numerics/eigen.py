import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as spla

from ..errors import ErrContractViolation, ErrConvergence, ErrInvalidParameter, ErrSize
from ..options import Options, resolve
from ..tree.adjacency import SparseAdjacency
from ..tree.ball import vertex_count

logger = logging.getLogger(__name__)

# 维数低于该值时直接做稠密分解
_DENSE_TOP_BELOW = 64


@dataclass(frozen=True)
class SpectralEstimate:
    """顶部特征对的数值结果"""

    top_eigenvalue: float
    top_eigenvector: np.ndarray  # 归一化使 v(root) = 1
    iterations: int  # 矩阵向量乘次数，稠密分解时为 0
    residual_2norm: float  # ‖Av - λv‖₂ / ‖v‖₂


def _normalize(vector: np.ndarray) -> np.ndarray:
    if vector[0] == 0.0:
        raise ErrConvergence("top eigenvector vanishes at the root")
    return vector / vector[0]


def top_eigenpair(adj: SparseAdjacency, tol: Optional[float] = None, options: Optional[Options] = None) -> SpectralEstimate:
    """对称非负矩阵的顶部特征对（有限体积的 ‖A_{Y_n}‖ 与 PF 向量）

    用 ARPACK 的隐式重启 Lanczos 求代数最大的特征值，起始向量取全 1；
    树球是二部图加对角扰动，±‖A‖ 几乎重合，只取 'LA' 端。

    Args:
        adj: 邻接矩阵
        tol: 残差容差，默认 options.eig_tol
        options: 配置

    Returns:
        SpectralEstimate 对象

    Raises:
        ErrConvergence: ARPACK 未收敛或残差超过容差
    """
    opts = resolve(options)
    tol = opts.eig_tol if tol is None else tol
    if tol <= 0.0:
        raise ErrInvalidParameter(f"tolerance must be positive, got {tol!r}")
    matrix = adj.as_float
    dim = adj.dimension

    if dim < _DENSE_TOP_BELOW:
        values, vectors = la.eigh(matrix.toarray(), subset_by_index=[dim - 1, dim - 1])
        lam, vec, iterations = float(values[0]), vectors[:, 0], 0
    else:
        count = [0]

        def matvec(x):
            count[0] += 1
            return matrix @ x

        op = spla.LinearOperator(matrix.shape, matvec=matvec, dtype=np.float64)
        try:
            values, vectors = spla.eigsh(op, k=1, which="LA", v0=np.ones(dim), tol=tol, maxiter=50 * dim)
        except spla.ArpackNoConvergence as exc:
            raise ErrConvergence(f"ARPACK did not converge on a {dim}-dimensional matrix") from exc
        lam, vec, iterations = float(values[0]), vectors[:, 0], count[0]

    vec = _normalize(vec)
    residual = float(np.linalg.norm(matrix @ vec - lam * vec) / np.linalg.norm(vec))
    if residual > 100.0 * tol * max(1.0, abs(lam)):
        raise ErrConvergence("top eigenpair residual above tolerance", last_residual=residual)
    logger.debug(f"top eigenpair dim={dim}: {lam!r} after {iterations} matvecs, residual {residual:.2e}")
    return SpectralEstimate(lam, vec, iterations, residual)


def full_spectrum(adj: SparseAdjacency, options: Optional[Options] = None) -> np.ndarray:
    """稠密对称特征值分解得到的全部特征值，升序

    Raises:
        ErrSize: 维数超过 options.dense_cap
    """
    cap = resolve(options).dense_cap
    if adj.dimension > cap:
        raise ErrSize(f"dense spectrum of dimension {adj.dimension} exceeds the cap {cap}")
    return la.eigvalsh(adj.as_float.toarray())


def _path_eigenvalues(length: int, scale: float) -> np.ndarray:
    j = np.arange(1, length + 1, dtype=np.float64)
    return scale * np.cos(j * np.pi / (length + 1))


def ball_spectrum_blocks(Q: int, n: int, options: Optional[Options] = None) -> Tuple[np.ndarray, np.ndarray]:
    """未扰动球的精确谱（带重数）

    谱分解为若干块：
      径向块：n+1 阶三对角，次对角为 √Q, √(Q-1), ..., √(Q-1)
      根的零和扇区：重数 Q-1，长度 n 的路径块
      深度 d (1..n-1) 的每个顶点：重数 Q-2，长度 n-d 的路径块
    长度 L 的路径块特征值为 2√(Q-1)cos(jπ/(L+1))。

    Returns:
        (特征值数组, 重数数组)，重数之和等于顶点数
    """
    total = vertex_count(Q, n, options)
    scale = 2.0 * np.sqrt(Q - 1)
    values = []
    weights = []
    if n == 0:
        return np.zeros(1), np.ones(1, dtype=np.int64)
    off = np.full(n, np.sqrt(Q - 1))
    off[0] = np.sqrt(Q)
    radial = la.eigvalsh_tridiagonal(np.zeros(n + 1), off)
    values.append(radial)
    weights.append(np.ones(n + 1, dtype=np.int64))
    values.append(_path_eigenvalues(n, scale))
    weights.append(np.full(n, Q - 1, dtype=np.int64))
    if Q > 2:
        for d in range(1, n):
            count = Q * (Q - 1) ** (d - 1) * (Q - 2)
            values.append(_path_eigenvalues(n - d, scale))
            weights.append(np.full(n - d, count, dtype=np.int64))
    eigs = np.concatenate(values)
    mult = np.concatenate(weights)
    order = np.argsort(eigs, kind="stable")
    eigs, mult = eigs[order], mult[order]
    if int(mult.sum()) != total:
        raise ErrContractViolation(f"block decomposition counts {int(mult.sum())} states, ball has {total}")
    return eigs, mult
