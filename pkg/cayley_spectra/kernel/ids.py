import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ErrConvergence, ErrInvalidParameter, ErrUnsupportedOperation
from ..options import Options, resolve

logger = logging.getLogger(__name__)

# critical_density_series 的 Laplace 级数最多项数
_MAX_LAPLACE_TERMS = 200000


def _check_degree(q: int) -> None:
    if q == 2:
        raise ErrUnsupportedOperation("the partition-function series needs q >= 3 (the prefactor vanishes at q = 2)")
    if q < 2:
        raise ErrInvalidParameter(f"tree degree q must be >= 3, got {q}")


def _tail_bound(q: int, K: int) -> float:
    # ((q-2)²/(q-1))·Σ_{k>K} k x^k，x = 1/(q-1)
    x = 1.0 / (q - 1)
    tail = x ** (K + 1) * ((K + 1) - K * x) / (1.0 - x) ** 2
    return (q - 2) ** 2 / (q - 1) * tail


def ids_k_max(q: int, tol: float = 1e-10) -> int:
    """由尾项估计选取级数截断 K，使被丢弃部分小于 tol"""
    _check_degree(q)
    if not tol > 0.0:
        raise ErrInvalidParameter(f"tolerance must be positive, got {tol!r}")
    K = 1
    while _tail_bound(q, K) >= tol:
        K += 1
    return K


@dataclass(frozen=True)
class IdsSeriesParams:
    """未扰动态密度配分函数 Φ(β) 的级数参数"""

    q: int
    beta: float
    k_max: Optional[int] = None  # None 表示按尾项估计选取

    def __post_init__(self):
        _check_degree(self.q)
        if not self.beta >= 0.0:
            raise ErrInvalidParameter(f"beta must be >= 0, got {self.beta!r}")
        if self.k_max is not None and self.k_max < 1:
            raise ErrInvalidParameter(f"k_max must be >= 1, got {self.k_max}")

    def resolved_k_max(self, options: Optional[Options] = None) -> int:
        if self.k_max is not None:
            return self.k_max
        return ids_k_max(self.q, resolve(options).ids_tail_tol)


def _series_terms(q: int, k_max: int):
    """级数的指数 E_{k,n} = 4√(q-1)sin²(nπ/(2(k+1))) 与权重 (q-1)^{-k}"""
    k = np.arange(1, k_max + 1, dtype=np.float64)[:, None]
    n = np.arange(1, k_max + 1, dtype=np.float64)[None, :]
    mask = n <= k
    exponent = 4.0 * math.sqrt(q - 1) * np.sin(n * np.pi / (2.0 * (k + 1.0))) ** 2
    weight = np.broadcast_to(np.power(float(q - 1), -k), mask.shape)
    return exponent[mask], weight[mask]


def ids_partition_series(params: IdsSeriesParams, options: Optional[Options] = None) -> float:
    """截断的配分函数 Φ(β)

    Φ(β) = ((q-2)²/(q-1))·Σ_{k=1}^{K} Σ_{n=1}^{k} (q-1)^{-k} exp(-4β√(q-1) sin²(nπ/(2(k+1))))

    Args:
        params: 级数参数
        options: 配置，未指定 k_max 时用 ids_tail_tol

    Returns:
        Φ(β) 的部分和
    """
    q = params.q
    exponent, weight = _series_terms(q, params.resolved_k_max(options))
    prefactor = (q - 2) ** 2 / (q - 1)
    return float(prefactor * np.sum(weight * np.exp(-params.beta * exponent)))


def critical_density_series(q: int, beta: float, delta: float, options: Optional[Options] = None) -> float:
    """临界密度 ρ_c(β) = ∫ dF(x)/(e^{β(x+δ)} - 1) 的 Laplace 级数

    展开 1/(e^y - 1) = Σ_{m>=1} e^{-my}，得 ρ_c = Σ_{m>=1} e^{-mβδ}·Φ(mβ)。
    Φ <= 1，故 m > M 的尾项不超过 e^{-(M+1)βδ}/(1 - e^{-βδ})。

    Args:
        q: 树的度
        beta: 逆温度，> 0
        delta: 隐藏谱宽度，> 0

    Returns:
        临界密度

    Raises:
        ErrUnsupportedOperation: δ = 0，有限性无法由级数判定
        ErrConvergence: 需要的项数超过上限
    """
    _check_degree(q)
    if not beta > 0.0:
        raise ErrInvalidParameter(f"beta must be positive, got {beta!r}")
    if delta == 0.0:
        raise ErrUnsupportedOperation("delta = 0: divergence at x -> 0 is not decided by a finite sum")
    if delta < 0.0:
        raise ErrInvalidParameter(f"hidden-spectrum width must be >= 0, got {delta!r}")
    opts = resolve(options)
    tol = opts.ids_tail_tol
    step = beta * delta
    M = max(1, math.ceil(-math.log(tol * (1.0 - math.exp(-step))) / step))
    if M > _MAX_LAPLACE_TERMS:
        raise ErrConvergence(f"critical density needs {M} Laplace terms (beta*delta={step!r} too small)")
    exponent, weight = _series_terms(q, ids_k_max(q, tol))
    prefactor = (q - 2) ** 2 / (q - 1)
    total = 0.0
    for start in range(1, M + 1, 256):
        m = np.arange(start, min(M, start + 255) + 1, dtype=np.float64)[:, None]
        phi = prefactor * np.exp(-m * beta * exponent[None, :]) @ weight
        total += float(np.sum(np.exp(-m[:, 0] * step) * phi))
    logger.debug(f"critical density q={q} beta={beta} delta={delta}: {M} Laplace terms")
    return total
