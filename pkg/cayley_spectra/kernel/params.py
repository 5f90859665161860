import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import ErrDomain, ErrInvalidParameter

ArrayLike = Union[int, np.ndarray]


def edge_norm(Q: int) -> float:
    """未扰动树的算子范数 2√(Q-1)"""
    if Q < 2:
        raise ErrInvalidParameter(f"degree Q must be >= 2, got {Q}")
    return 2.0 * math.sqrt(Q - 1)


@dataclass(frozen=True)
class SpectralParams:
    """谱参数 (a(λ), μ(λ))

    树的预解式矩阵元为 a^d/μ，a 为非对角衰减率，1/μ 为对角元。
    """

    Q: int
    lam: float
    s: float  # √(λ² - 4(Q-1))
    a: float
    mu: float

    @property
    def edge(self) -> float:
        return edge_norm(self.Q)

    def quadratic_residual(self) -> float:
        """(Q-1)a² - λa + 1，理论上为 0"""
        return (self.Q - 1) * self.a * self.a - self.lam * self.a + 1.0


def spectral_params(Q: int, lam: float) -> SpectralParams:
    """计算给定 λ 的谱参数

    a 取二次方程 (Q-1)a² - λa + 1 = 0 的小根，用有理化形式 2/(λ+s)；
    s 用 (λ-e)(λ+e) 的乘积计算，靠近谱边缘时不会相消。

    Args:
        Q: 树的度
        lam: 谱参数，必须大于 2√(Q-1)

    Returns:
        SpectralParams 对象

    Raises:
        ErrDomain: λ 不在谱外
    """
    edge = edge_norm(Q)
    lam = float(lam)
    if not math.isfinite(lam) or lam <= edge:
        raise ErrDomain(f"lambda={lam!r} must exceed the spectral edge 2*sqrt(Q-1)={edge!r}")
    s = math.sqrt((lam - edge) * (lam + edge))
    a = 2.0 / (lam + s)
    mu = ((Q - 2) * lam + Q * s) / (2.0 * (Q - 1))
    return SpectralParams(Q=Q, lam=lam, s=s, a=a, mu=mu)


def walk_kernel(Q: int, d: ArrayLike, lam: float):
    """树的预解式矩阵元 ⟨R(λ)δ_x, δ_y⟩，只依赖距离 d = d(x, y)

    Args:
        Q: 树的度
        d: 距离（可以是数组）
        lam: 谱参数

    Returns:
        a(λ)^d / μ(λ)
    """
    d_arr = np.asarray(d)
    if np.any(d_arr < 0):
        raise ErrInvalidParameter("distance must be non-negative")
    p = spectral_params(Q, lam)
    value = np.power(p.a, d_arr) / p.mu
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class ContourRoots:
    """围道积分分母 aμz² - [(1+a²(q-1))μ - (1-a²)]z + a(q-1)μ 的两个根"""

    q_eff: int
    delta: float
    z_minus: float
    z_plus: float


def contour_roots(Q: int, lam: float, q: int = 2) -> ContourRoots:
    """计算围道根 z± 与判别式 Δ

    Args:
        Q: 树的度
        lam: 谱参数
        q: 子树的度，线段与射线取 2

    Returns:
        ContourRoots 对象

    Raises:
        ErrDomain: Δ < 0，即 λ 低于扰动后的范数
    """
    if q < 2:
        raise ErrInvalidParameter(f"subtree order q must be >= 2, got {q}")
    p = spectral_params(Q, lam)
    a, mu = p.a, p.mu
    r = math.sqrt(q - 1)
    c = (1.0 + a * a * (q - 1)) * mu - (1.0 - a * a)
    # Δ = (c - 2μar)(c + 2μar)
    lower = c - 2.0 * mu * a * r
    if lower < 0.0:
        raise ErrDomain(f"lambda={lam!r} lies at or below the perturbed norm (discriminant < 0)")
    delta = lower * (c + 2.0 * mu * a * r)
    root = math.sqrt(delta)
    z_plus = (c + root) / (2.0 * a * mu)
    # 用韦达定理 z₊z₋ = q-1 求小根
    z_minus = (q - 1) / z_plus
    return ContourRoots(q_eff=q, delta=delta, z_minus=z_minus, z_plus=z_plus)
