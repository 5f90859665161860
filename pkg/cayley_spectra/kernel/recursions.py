"""
PF 向量的三角递推

两个递推都是前向递推，逼近的是衰减解，双精度下误差按 a^{-k} 放大。
需要很深的 k 时传入 mpmath.mpf，计算在当前 mp 上下文的精度下进行。
"""

import math
from typing import List, Union

import mpmath
import numpy as np

from ..errors import ErrDomain, ErrInvalidParameter
from .params import spectral_params

Number = Union[float, mpmath.mpf]


def _decay_rate(Q: int, lam: Number) -> Number:
    if isinstance(lam, mpmath.mpf):
        disc = lam * lam - 4 * (Q - 1)
        if lam <= 0 or disc <= 0:
            raise ErrDomain(f"lambda={lam} must exceed the spectral edge")
        return 2 / (lam + mpmath.sqrt(disc))
    return spectral_params(Q, lam).a


def _pack(values: List[Number]) -> Union[np.ndarray, List[mpmath.mpf]]:
    if values and isinstance(values[0], mpmath.mpf):
        return values
    return np.asarray(values, dtype=np.float64)


def finite_recursion_ray(Q: int, lam_n: Number, Lambda_n: Number, n: int):
    """射线截断 N_n 上 PF 向量的递推

    σ(k) = 1 + (1/Λ)·Σ_{l<k} (a^{2(k-l)} - 1)·σ(l)，a = a(λ_n)。
    σ(k) = a^k·w_n(k)，w_n 为核矩阵 [a^{|k-l|}] 的 PF 向量，w_n(0) = 1。

    Args:
        Q: 树的度
        lam_n: 截断后的范数 λ_n
        Lambda_n: 核矩阵的顶部特征值 Λ_n
        n: 截断长度

    Returns:
        σ(0..n)，浮点输入返回 numpy 数组，mpf 输入返回列表
    """
    if n < 0:
        raise ErrInvalidParameter(f"length n must be >= 0, got {n}")
    if not Lambda_n > 0:
        raise ErrInvalidParameter(f"Lambda must be positive, got {Lambda_n}")
    a = _decay_rate(Q, lam_n)
    a2 = a * a
    powers = [a2 ** j for j in range(n + 1)]
    sigma = [a2 ** 0]
    for k in range(1, n + 1):
        acc = sum((powers[k - l] - 1) * sigma[l] for l in range(k))
        sigma.append(1 + acc / Lambda_n)
    return _pack(sigma)


def delta_weights(q: int, a: Number, n: int) -> List[Number]:
    """δ_0..δ_n：δ_0 = 1，δ_m = 1 + (q-2)Σ_{l=1}^{m-1}(q-1)^{l-1}a^{2l} + (q-1)^m a^{2m}"""
    if q < 2:
        raise ErrInvalidParameter(f"subtree order q must be >= 2, got {q}")
    a2 = a * a
    weights = [a2 ** 0]
    partial = a2 * 0
    for m in range(1, n + 1):
        if m >= 2:
            partial += (q - 1) ** (m - 2) * a2 ** (m - 1)
        weights.append(1 + (q - 2) * partial + (q - 1) ** m * a2 ** m)
    return weights


def sigma_from_lambda(q: int, Lambda: Number) -> Number:
    """根所在行给出的 Σ = ((q-1)Λ + 1)/q"""
    return ((q - 1) * Lambda + 1) / q


def finite_recursion_subtree(q: int, a: Number, Lambda: Number, Sigma: Number, n: int):
    """子树截断 𝔾^q_n 上径向 PF 向量的递推

    σ(0) = 1；对 n >= 1，
    σ(n) = (1/Λ)·{Σ_{m<n} [(q-1)^{n-m} a^{2(n-m)} δ_m - δ_n]·σ(m) + δ_n·Σ}。
    σ(n) = (q-1)^n a^n w(n)，w 为径向核的 PF 向量，w(0) = 1。

    Args:
        q: 子树的度
        a: 衰减率 a(λ_N)
        Lambda: 径向核的顶部特征值
        Sigma: 一般取 sigma_from_lambda(q, Lambda)
        n: 截断深度

    Returns:
        σ(0..n)
    """
    if n < 0:
        raise ErrInvalidParameter(f"depth n must be >= 0, got {n}")
    if not Lambda > 0:
        raise ErrInvalidParameter(f"Lambda must be positive, got {Lambda}")
    deltas = delta_weights(q, a, n)
    a2 = a * a
    sigma = [a2 ** 0]
    for k in range(1, n + 1):
        acc = sum(
            ((q - 1) ** (k - m) * a2 ** (k - m) * deltas[m] - deltas[k]) * sigma[m]
            for m in range(k)
        )
        sigma.append((acc + deltas[k] * Sigma) / Lambda)
    return _pack(sigma)


def subtree_fixed_point_sigma(q: int, a: float, n: int) -> np.ndarray:
    """不动点处的 σ(k) = (q-1)^k a^k φ_{1/2}(k) = ξ^k (1 + (q-2)k/q)，ξ = a√(q-1)"""
    xi = a * math.sqrt(q - 1)
    k = np.arange(n + 1, dtype=np.float64)
    return np.power(xi, k) * (1.0 + (q - 2) / q * k)


def fixed_point_residual_subtree(q: int, a: float, n_max: int) -> float:
    """差分后的不动点恒等式 Λ(σ(n+1) - ξ²σ(n)) = (1-a²)(Σ - R_n) 的最大残差

    Λ、Σ、R_n 都用闭式，R_n 为 σ 的部分和。

    Args:
        q: 子树的度
        a: 衰减率，要求 a√(q-1) < 1
        n_max: 检查 n = 0..n_max

    Returns:
        max_n |左边 - 右边|
    """
    if n_max < 0:
        raise ErrInvalidParameter(f"n_max must be >= 0, got {n_max}")
    xi = a * math.sqrt(q - 1)
    if not 0.0 < xi < 1.0:
        raise ErrDomain(f"need 0 < a*sqrt(q-1) < 1, got {xi!r}")
    Lambda = (1.0 - a * a) / (1.0 - xi) ** 2
    Sigma = (q - 1) * (1.0 - a * a) / (q * (1.0 - xi) ** 2) + 1.0 / q
    n = np.arange(n_max + 1, dtype=np.float64)
    R = (1.0 - xi ** (n + 1)) / (1.0 - xi) + xi * (q - 2) * (
        1.0 - xi ** (n + 1) - (n + 1) * xi ** n * (1.0 - xi)
    ) / (q * (1.0 - xi) ** 2)
    sigma = subtree_fixed_point_sigma(q, a, n_max + 1)
    lhs = Lambda * (sigma[1:] - xi * xi * sigma[:-1])
    rhs = (1.0 - a * a) * (Sigma - R)
    return float(np.max(np.abs(lhs - rhs)))
