import logging
import math
from typing import List, Optional

import numpy as np
import scipy.linalg as la

from ..errors import ErrConvergence, ErrDomain, ErrInvalidParameter, ErrRecurrentCase
from ..tree.ball import TreeBall, distance_matrix
from ..tree.perturbation import PerturbationSpec, perturbed_vertices
from .norms import family_lambda_star, fixed_point_a, hidden_lambda_star
from .params import contour_roots, spectral_params

logger = logging.getLogger(__name__)


def _above_lambda_star(lam: float, lam_star: float) -> None:
    if not lam > lam_star:
        raise ErrDomain(f"lambda={lam!r} must exceed the perturbed norm {lam_star!r}")


def resolvent_trace_segment(Q: int, lam: float) -> float:
    """线段扰动后根处的预解式对角元 (1-a²)/√Δ

    λ↓λ* 时以 (λ-λ*)^{-1/2} 发散（常返）。

    Raises:
        ErrNoHiddenSpectrum: Q > 7
        ErrDomain: λ <= λ*
    """
    _above_lambda_star(lam, hidden_lambda_star(Q, 2))
    p = spectral_params(Q, lam)
    roots = contour_roots(Q, lam, 2)
    return (1.0 - p.a * p.a) / math.sqrt(roots.delta)


def hardy_trace_ray(Q: int, lam: float) -> float:
    """射线扰动后根处的预解式对角元

    由 Hardy 空间上的 Toeplitz 方程解出 v(0)，各系数见函数体。

    Args:
        Q: 树的度，2 <= Q <= 7
        lam: 谱参数，λ > λ*

    Returns:
        ⟨R(λ)δ₀, δ₀⟩
    """
    _above_lambda_star(lam, hidden_lambda_star(Q, 2))
    p = spectral_params(Q, lam)
    roots = contour_roots(Q, lam, 2)
    a, mu = p.a, p.mu
    sd = math.sqrt(roots.delta)
    zm, zp = roots.z_minus, roots.z_plus
    g0 = (a / sd) * ((a + 1.0 / a) - (zm + 1.0 / zp))
    G = (a * a / (sd * (zp - a))) * ((a + 1.0 / a) - (zp + 1.0 / zp))
    h0 = (1.0 - a * a) / sd
    H = a * (1.0 - a * a) / (sd * (zp - a))
    cross = g0 * H - h0 * G
    numerator = g0 + h0 + 2.0 * cross
    denominator = 1.0 - G + H + (mu - 1.0) * (g0 + cross)
    return numerator / denominator


def transience_limit_ray(Q: int) -> float:
    """射线扰动在 λ↓λ* 时对角元的有限极限 (1-a*)/a*"""
    hidden_lambda_star(Q, 2)
    a = fixed_point_a(2)
    return (1.0 - a) / a


def resolvent_trace_subtree(Q: int, q: int, lam: float) -> float:
    """子树扰动后根处的预解式对角元

    围道 |z| = √(q-1) 内有 ±1 与 z₋ 三个极点，留数之和给出闭式；q=2 时退化为线段的迹。
    """
    _above_lambda_star(lam, hidden_lambda_star(Q, q))
    roots = contour_roots(Q, lam, q)
    zm, zp = roots.z_minus, roots.z_plus
    pole_plus = (2 - q) / (2.0 * (1.0 - zm) * (1.0 - zp))
    pole_minus = (2 - q) / (2.0 * (1.0 + zm) * (1.0 + zp))
    pole_root = (zm * zm - (q - 1)) / ((zm * zm - 1.0) * (zm - zp))
    return -(pole_plus - pole_minus + pole_root)


def transience_limit_subtree(Q: int, q: int) -> float:
    """子树扰动在 λ↓λ* 时对角元的极限 (1-a*√(q-1))²·√(q-1)/(a*(q-2))

    由 a* = (1-a*√(q-1))² 可化简为 √(q-1)/(q-2)。

    Raises:
        ErrRecurrentCase: q = 2
        ErrNoHiddenSpectrum: Q > Q(q)
    """
    if q == 2:
        raise ErrRecurrentCase("loops on a segment give a recurrent operator; the trace diverges")
    hidden_lambda_star(Q, q)
    a = fixed_point_a(q)
    r = math.sqrt(q - 1)
    return (1.0 - a * r) ** 2 * r / (a * (q - 2))


def _doubling_extents(m: int) -> List[int]:
    extents, step = [], 1
    while step < m:
        extents.append(step)
        step *= 2
    extents.append(m)
    return extents


def _krein_entry(ball: TreeBall, a: float, mu: float, ids: np.ndarray, weights: np.ndarray, x: int, y: int) -> float:
    root_w = np.sqrt(weights.astype(np.float64))
    kernel = np.power(a, distance_matrix(ball, ids, ids).astype(np.float64)) / mu
    kernel = root_w[:, None] * kernel * root_w[None, :]
    top = la.eigvalsh(kernel, subset_by_index=[ids.size - 1, ids.size - 1])[0]
    if top >= 1.0:
        raise ErrDomain(f"kernel norm {top!r} >= 1: lambda lies inside the perturbed spectrum")
    left = root_w * np.power(a, distance_matrix(ball, [x], ids)[0].astype(np.float64)) / mu
    right = root_w * np.power(a, distance_matrix(ball, [y], ids)[0].astype(np.float64)) / mu
    z = la.solve(np.eye(ids.size) - kernel, right, assume_a="pos")
    base = a ** int(distance_matrix(ball, [x], [y])[0, 0]) / mu
    return float(base + left @ z)


def resolvent_entry_perturbed(
    ball: TreeBall,
    pert: Optional[PerturbationSpec],
    lam: float,
    x: int,
    y: int,
    tol: float = 1e-10,
) -> float:
    """扰动图预解式的一般矩阵元 ⟨R_{A_Y}(λ)δ_x, δ_y⟩

    用 Krein 公式 R + R D^{1/2}(1 - D^{1/2} R D^{1/2})^{-1} D^{1/2} R，
    其中 R 为无限树的预解式，D 为自环对角。无限族的扰动集合按 1, 2, 4, ...
    逐步加长到 pert.m，直到矩阵元的变化小于 tol。

    Args:
        ball: 顶点坐标所在的球，只用于寻址
        pert: 扰动，None 表示未扰动
        lam: 谱参数
        x: 顶点编号
        y: 顶点编号
        tol: 截断收敛阈值

    Returns:
        预解式矩阵元

    Raises:
        ErrDomain: λ 不在扰动算子的谱外
        ErrConvergence: 加长到 pert.m 时矩阵元仍在变化
    """
    x, y = ball.check_vertex(x), ball.check_vertex(y)
    Q = ball.degree_Q
    p = spectral_params(Q, lam)
    if pert is None:
        return p.a ** int(distance_matrix(ball, [x], [y])[0, 0]) / p.mu
    pert.check_fits(ball)
    if tol <= 0.0:
        raise ErrInvalidParameter(f"tolerance must be positive, got {tol!r}")
    if pert.is_family:
        lam_star = family_lambda_star(Q, pert)
        if lam_star is not None:
            _above_lambda_star(lam, lam_star)
        extents = _doubling_extents(pert.m)
    else:
        extents = [pert.m]

    value: Optional[float] = None
    change = None
    for m in extents:
        ids, weights = perturbed_vertices(ball, pert.with_extent(m))
        current = _krein_entry(ball, p.a, p.mu, ids, weights, x, y)
        logger.debug(f"Krein entry {pert.label} truncated at m={m}: {current!r}")
        if value is not None:
            change = abs(current - value)
            if change < tol:
                return current
        value = current
    if change is not None:
        raise ErrConvergence(f"resolvent entry for {pert.label} not converged within extent {pert.m}", last_residual=change)
    return value
