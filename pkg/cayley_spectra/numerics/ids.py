import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ErrInvalidParameter
from ..kernel.params import edge_norm
from ..options import Options, resolve
from ..tree.adjacency import assemble_adjacency
from ..tree.ball import TreeBall, build_ball, vertex_count
from ..tree.perturbation import PerturbationSpec
from .eigen import ball_spectrum_blocks, full_spectrum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IdsCurve:
    """有限体积的积分态密度 F_n 与配分函数表

    能量变量 x = ‖A_X‖ - 特征值，‖A_X‖ 为未扰动树的范数。
    """

    grid: np.ndarray  # 升序的不同 x 值
    F_values: np.ndarray  # F_n(grid)，右连续阶梯函数
    n_ball: int
    energies: np.ndarray  # 全部 x（按重数展开前）
    weights: np.ndarray  # 每个 x 的重数
    phi_table: List[Tuple[float, float]] = field(default_factory=list)  # (β, Φ_n(β))

    def F(self, x) -> np.ndarray:
        """在任意点上求 F_n"""
        idx = np.searchsorted(self.grid, np.asarray(x, dtype=np.float64), side="right")
        padded = np.concatenate([[0.0], self.F_values])
        return padded[idx]


def partition_function(eigs: np.ndarray, weights: Optional[np.ndarray], reference: float, beta: float) -> float:
    """有限体积配分函数 Φ_n(β) = (1/|V|)Σ exp(-β(reference - μ_i))

    Args:
        eigs: 特征值
        weights: 重数，None 表示都为 1
        reference: 能量零点，一般为 2√(Q-1)
        beta: 逆温度，>= 0
    """
    if beta < 0.0:
        raise ErrInvalidParameter(f"beta must be >= 0, got {beta!r}")
    eigs = np.asarray(eigs, dtype=np.float64)
    w = np.ones_like(eigs) if weights is None else np.asarray(weights, dtype=np.float64)
    return float(np.sum(w * np.exp(-beta * (reference - eigs))) / np.sum(w))


def _step_cdf(energies: np.ndarray, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    order = np.argsort(energies, kind="stable")
    x, w = energies[order], weights[order]
    grid, start = np.unique(x, return_index=True)
    sums = np.add.reduceat(w, start)
    return grid, np.cumsum(sums) / w.sum()


def kolmogorov_distance(eigs_a: np.ndarray, eigs_b: np.ndarray,
                        weights_a: Optional[np.ndarray] = None, weights_b: Optional[np.ndarray] = None) -> float:
    """两个（带权）特征值经验分布函数之间的上确界距离"""
    ea = np.asarray(eigs_a, dtype=np.float64)
    eb = np.asarray(eigs_b, dtype=np.float64)
    wa = np.ones_like(ea) if weights_a is None else np.asarray(weights_a, dtype=np.float64)
    wb = np.ones_like(eb) if weights_b is None else np.asarray(weights_b, dtype=np.float64)
    grid_a, cdf_a = _step_cdf(ea, wa)
    grid_b, cdf_b = _step_cdf(eb, wb)
    points = np.union1d(grid_a, grid_b)
    fa = np.concatenate([[0.0], cdf_a])[np.searchsorted(grid_a, points, side="right")]
    fb = np.concatenate([[0.0], cdf_b])[np.searchsorted(grid_b, points, side="right")]
    return float(np.max(np.abs(fa - fb)))


def ball_eigenvalues(Q: int, n: int, pert: Optional[PerturbationSpec] = None,
                     options: Optional[Options] = None) -> Tuple[np.ndarray, np.ndarray]:
    """球的全部特征值及重数

    未扰动且超过稠密上限时用分块精确谱，否则做稠密分解。
    """
    opts = resolve(options)
    if pert is None and vertex_count(Q, n, opts) > opts.dense_cap:
        return ball_spectrum_blocks(Q, n, opts)
    eigs = full_spectrum(assemble_adjacency(build_ball(Q, n, opts), pert), opts)
    return eigs, np.ones(eigs.size, dtype=np.int64)


def ids_empirical(
    Q: int,
    n: int,
    pert: Optional[PerturbationSpec] = None,
    betas: Sequence[float] = (0.0, 0.5, 1.0, 2.0),
    options: Optional[Options] = None,
) -> IdsCurve:
    """有限球上的经验积分态密度

    F_n(x) = #{μ_i : ‖A_X‖ - μ_i <= x}/|V X_n|，Φ_n(β) 为其 Laplace 变换。

    Args:
        Q: 树的度
        n: 球半径
        pert: 扰动，None 表示未扰动
        betas: 需要列表的 β

    Returns:
        IdsCurve 对象

    Raises:
        ErrSize: 扰动球超过稠密上限
    """
    eigs, mult = ball_eigenvalues(Q, n, pert, options)
    reference = edge_norm(Q)
    energies = reference - eigs
    grid, F_values = _step_cdf(energies, mult.astype(np.float64))
    table = [(float(b), partition_function(eigs, mult, reference, float(b))) for b in betas]
    logger.debug(f"empirical IDS Q={Q} n={n} pert={pert.label if pert else None}: {grid.size} distinct levels")
    return IdsCurve(grid=grid, F_values=F_values, n_ball=n, energies=energies, weights=mult, phi_table=table)


def pf_deviation(ball: TreeBall, vector: np.ndarray, profile: np.ndarray, max_depth: int) -> float:
    """深度不超过 max_depth 的顶点上 |v_n(x) - v(x)| 的最大值"""
    if max_depth < 0:
        raise ErrInvalidParameter(f"max_depth must be >= 0, got {max_depth}")
    if vector.shape != profile.shape or vector.size != ball.vertex_count:
        raise ErrInvalidParameter("vector and profile must both live on the ball")
    window = ball.depth <= max_depth
    return float(np.max(np.abs(vector[window] - profile[window])))
