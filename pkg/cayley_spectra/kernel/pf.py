import logging

import numpy as np

from ..errors import ErrInvalidParameter
from ..tree.ball import TreeBall, nearest_in_set_all
from ..tree.perturbation import PerturbationKind, PerturbationSpec, perturbed_vertices
from .norms import fixed_point_a, hidden_lambda_star, root_loops_a

logger = logging.getLogger(__name__)


def _check_distance(*values) -> None:
    for v in values:
        if np.any(np.asarray(v) < 0):
            raise ErrInvalidParameter("distances and coordinates must be non-negative")


def spherical_phi_half(q: int, d):
    """𝔾^q 上谱边缘处的球函数 φ_{1/2}(d) = (1 + (q-2)d/q)·(q-1)^{-d/2}

    Args:
        q: 树的度
        d: 到根的距离（可以是数组）

    Returns:
        φ_{1/2}(d)，q=2 时恒为 1
    """
    if q < 2:
        raise ErrInvalidParameter(f"tree order q must be >= 2, got {q}")
    _check_distance(d)
    d = np.asarray(d, dtype=np.float64)
    value = (1.0 + (q - 2) / q * d) * np.power(float(q - 1), -d / 2.0)
    return float(value) if value.ndim == 0 else value


def pf_vector_segment(Q: int, d):
    """线段扰动的 PF 向量 v(x) = a*^{d(x, ℤ)}

    Raises:
        ErrNoHiddenSpectrum: Q > 7
    """
    hidden_lambda_star(Q, 2)
    _check_distance(d)
    value = np.power(fixed_point_a(2), np.asarray(d, dtype=np.float64))
    return float(value) if value.ndim == 0 else value


def pf_vector_ray(Q: int, d, y):
    """射线扰动的 PF 向量 v(x) = a*^{d(x, ℕ)}·[y(x)(1-a*) + 1]

    Args:
        Q: 树的度
        d: 到射线的距离
        y: 射线上最近点的坐标
    """
    hidden_lambda_star(Q, 2)
    _check_distance(d, y)
    a = fixed_point_a(2)
    d = np.asarray(d, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    value = np.power(a, d) * (y * (1.0 - a) + 1.0)
    return float(value) if value.ndim == 0 else value


def pf_vector_subtree(Q: int, q: int, d, y_depth):
    """子树扰动的 PF 向量 v(x) = a*^{d(x, 𝔾^q)}·φ_{1/2}(y(x))

    Raises:
        ErrNoHiddenSpectrum: Q > Q(q)
    """
    hidden_lambda_star(Q, q)
    _check_distance(d, y_depth)
    d = np.asarray(d, dtype=np.float64)
    value = np.power(fixed_point_a(q), d) * spherical_phi_half(q, y_depth)
    return float(value) if np.ndim(value) == 0 else value


def pf_profile(ball: TreeBall, pert: PerturbationSpec) -> np.ndarray:
    """闭式 PF 向量在球内每个顶点上的取值

    无限族按 pert.m 截断放置，但向量本身是无限体积的极限，只在
    扰动覆盖整个球时满足内部顶点的本征关系。

    Returns:
        按顶点编号排列的数组，v(root) = 1
    """
    Q = ball.degree_Q
    if pert.kind is PerturbationKind.ROOT_LOOPS:
        pert.check_fits(ball)
        return np.power(root_loops_a(Q, pert.k), ball.depth.astype(np.float64))
    ids, _ = perturbed_vertices(ball, pert)
    nearest, dist = nearest_in_set_all(ball, ids)
    y = ball.depth[nearest]
    if pert.kind is PerturbationKind.SEGMENT:
        profile = pf_vector_segment(Q, dist)
    elif pert.kind is PerturbationKind.RAY:
        profile = pf_vector_ray(Q, dist, y)
    else:
        profile = pf_vector_subtree(Q, pert.q, dist, y)
    logger.debug(f"closed-form PF profile for {pert.label} on ball Q={Q} n={ball.radius_n}")
    return np.asarray(profile, dtype=np.float64)
