import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la

from ..errors import ErrConvergence, ErrDomain, ErrInvalidParameter
from ..kernel.params import spectral_params
from ..options import Options, resolve
from ..secular.functional import path_kernel_top, radial_kernel_matrix, radial_kernel_top
from ..tree.adjacency import SparseAdjacency
from ..tree.perturbation import PerturbationKind, PerturbationSpec
from .eigen import top_eigenpair

logger = logging.getLogger(__name__)


def conjugate_gradient(matvec: Callable[[np.ndarray], np.ndarray], b: np.ndarray, rtol: float, maxiter: int):
    """对称正定系统的共轭梯度法

    每步检查曲率 pᵀAp，非正时说明矩阵不定。

    Returns:
        (x, info)，info 含 niter、success、res_norm

    Raises:
        ErrDomain: 出现非正曲率
    """
    x = np.zeros_like(b)
    r = b.copy()
    am = float(r @ r)
    p = r.copy()
    tol_sqr = (rtol * math.sqrt(am)) ** 2
    m = 0
    for m in range(1, maxiter + 1):
        if am < tol_sqr:
            m -= 1
            break
        v = matvec(p)
        curvature = float(v @ p)
        if curvature <= 0.0:
            raise ErrDomain(f"negative curvature {curvature:.3e} at CG step {m}: operator is not positive definite")
        step = am / curvature
        x += step * p
        r -= step * v
        am1 = float(r @ r)
        p = r + (am1 / am) * p
        am = am1
    info = {'niter': m, 'success': am < tol_sqr, 'res_norm': math.sqrt(am)}
    return x, info


def resolvent_solve(
    adj: SparseAdjacency,
    lam: float,
    rhs_vertex: int,
    options: Optional[Options] = None,
    norm_bound: Optional[float] = None,
) -> np.ndarray:
    """求解 (λI - A)x = δ_rhs

    Args:
        adj: 邻接矩阵
        lam: 谱参数，必须大于 A 的顶部特征值
        rhs_vertex: 右端 δ 所在顶点
        options: 配置（cg_rtol、cg_maxiter）
        norm_bound: 已知的顶部特征值，缺省时调用 top_eigenpair

    Returns:
        解向量 x，x[rhs_vertex] 即预解式对角元

    Raises:
        ErrDomain: λ 不在谱外
        ErrConvergence: CG 在迭代上限内未收敛
    """
    opts = resolve(options)
    dim = adj.dimension
    if not 0 <= rhs_vertex < dim:
        raise ErrInvalidParameter(f"rhs vertex {rhs_vertex} outside dimension {dim}")
    top = top_eigenpair(adj, options=opts).top_eigenvalue if norm_bound is None else norm_bound
    if not lam > top:
        raise ErrDomain(f"lambda={lam!r} is not above the top eigenvalue {top!r}")
    matrix = adj.as_float
    b = np.zeros(dim)
    b[rhs_vertex] = 1.0
    x, info = conjugate_gradient(lambda v: lam * v - matrix @ v, b, opts.cg_rtol, opts.cg_maxiter)
    if not info['success']:
        raise ErrConvergence(f"CG stopped after {info['niter']} iterations", last_residual=info['res_norm'])
    logger.debug(f"resolvent solve dim={dim} lambda={lam!r}: {info['niter']} CG iterations")
    return x


def path_trace(Q: int, lam: float, m: int, centered: bool = True) -> float:
    """路径上加自环后根处的预解式对角元（有限截断）

    centered=True 时扰动为 2m+1 点的线段，根在中点；否则为 m+1 点的射线，根在端点。
    R_Y(0,0) = ((K^{-1} - I)^{-1})_{00}，K = [a^{|i-j|}/μ]，
    由 aμ = 1-a²，K^{-1} - I 是三对角：内部对角 1/a + a - 1，两端 1/a - 1，次对角 -1。
    """
    if m < 0:
        raise ErrInvalidParameter(f"truncation m must be >= 0, got {m}")
    p = spectral_params(Q, lam)
    size = 2 * m + 1 if centered else m + 1
    if path_kernel_top(p.a, size) / p.mu >= 1.0:
        raise ErrDomain(f"lambda={lam!r} is not above the norm of the truncated perturbation")
    a = p.a
    if size == 1:
        return 1.0 / (p.mu - 1.0)
    diag = np.full(size, 1.0 / a + a - 1.0)
    diag[0] = diag[-1] = 1.0 / a - 1.0
    banded = np.zeros((3, size))
    banded[0, 1:] = -1.0
    banded[1] = diag
    banded[2, :-1] = -1.0
    rhs = np.zeros(size)
    root = m if centered else 0
    rhs[root] = 1.0
    x = la.solve_banded((1, 1), banded, rhs)
    return float(x[root])


def radial_trace(Q: int, q: int, lam: float, m: int) -> float:
    """𝔾^q_m 上加自环后根处的预解式对角元，在径向坐标中求解 (μ - K)x = K e₀"""
    if m < 0:
        raise ErrInvalidParameter(f"truncation m must be >= 0, got {m}")
    p = spectral_params(Q, lam)
    if radial_kernel_top(q, p.a, m) >= p.mu:
        raise ErrDomain(f"lambda={lam!r} is not above the norm of the truncated perturbation")
    kernel = radial_kernel_matrix(q, p.a, m)
    x = la.solve(p.mu * np.eye(m + 1) - kernel, kernel[:, 0], assume_a="pos")
    return float(x[0])


def _family_trace(Q: int, pert: PerturbationSpec, lam: float, m: int) -> float:
    if pert.kind is PerturbationKind.ROOT_LOOPS:
        p = spectral_params(Q, lam)
        if p.mu <= pert.k:
            raise ErrDomain(f"lambda={lam!r} is not above the root-loop norm")
        return 1.0 / (p.mu - pert.k)
    if pert.kind is PerturbationKind.SEGMENT:
        return path_trace(Q, lam, m, centered=True)
    if pert.kind is PerturbationKind.RAY:
        return path_trace(Q, lam, m, centered=False)
    return radial_trace(Q, pert.q, lam, m)


class Recurrence(Enum):
    """常返性判定"""
    RECURRENT = "recurrent"
    TRANSIENT = "transient"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class TraceVerdict:
    """对角元 λ↓λ* 外推的结果"""

    verdict: Recurrence
    exponent: float  # log 迹对 log(λ-λ*) 的拟合斜率
    limit: Optional[float]  # 暂态时的外推极限
    offsets: List[float] = field(default_factory=list)
    traces: List[float] = field(default_factory=list)
    truncations: List[int] = field(default_factory=list)
    converged: List[bool] = field(default_factory=list)  # 截断到上限前是否已收敛

    @property
    def all_converged(self) -> bool:
        return all(self.converged)


def converged_trace(Q: int, pert: PerturbationSpec, lam: float, options: Optional[Options] = None,
                    start: int = 32, rel_tol: float = 1e-6) -> Tuple[float, int, bool]:
    """截断加倍直到迹的相对变化小于 rel_tol

    到达截断上限仍未收敛时返回上限处的值，并把收敛标记置为 False。

    Returns:
        (迹, 使用的截断, 是否收敛)
    """
    opts = resolve(options)
    if pert.kind is PerturbationKind.ROOT_LOOPS:
        return _family_trace(Q, pert, lam, 0), 0, True
    cap = opts.max_truncation_radial if pert.kind is PerturbationKind.SUBTREE else opts.max_truncation_path
    m = min(start, cap)
    current = _family_trace(Q, pert, lam, m)
    while m < cap:
        nxt = min(2 * m, cap)
        value = _family_trace(Q, pert, lam, nxt)
        change = abs(value - current)
        m, current = nxt, value
        if change <= rel_tol * abs(value):
            return current, m, True
    logger.warning(f"trace for {pert.family} at lambda={lam!r} still changing at truncation cap {cap}")
    return current, m, False


def _richardson_in_sqrt(offsets: Sequence[float], traces: Sequence[float]) -> float:
    # Neville 外推：把迹看作 h = √δ 的多项式，在 h = 0 处取值
    h = np.sqrt(np.asarray(offsets, dtype=np.float64))
    column = list(traces)
    for k in range(1, len(column)):
        nxt = []
        for j in range(len(column) - 1):
            ratio = h[j] / h[j + k]
            nxt.append(column[j + 1] + (column[j + 1] - column[j]) / (ratio - 1.0))
        column = nxt
    return float(column[0])


def trace_extrapolate(
    Q: int,
    pert: PerturbationSpec,
    lambda_star: float,
    schedule: Optional[Sequence[float]] = None,
    options: Optional[Options] = None,
    fit_points: int = 4,
) -> TraceVerdict:
    """沿 λ_j = λ* + δ_j 计算根处对角元并判定常返/暂态

    对最小的 fit_points 个 δ 拟合 log 迹对 log δ 的斜率：
    斜率 <= -0.25 为发散（常返），>= -0.05 为有限（暂态，按 √δ 外推极限），其余不确定。

    Args:
        Q: 树的度
        pert: 扰动族
        lambda_star: 扰动后的范数
        schedule: δ 序列（递减），默认 options.trace_schedule

    Returns:
        TraceVerdict 对象
    """
    opts = resolve(options)
    offsets = sorted((float(d) for d in (opts.trace_schedule if schedule is None else schedule)), reverse=True)
    if len(offsets) < 2 or offsets[-1] <= 0.0:
        raise ErrInvalidParameter("trace schedule needs at least two positive offsets")
    fit_points = min(fit_points, len(offsets))
    traces, truncations, converged = [], [], []
    for delta in offsets:
        value, m, ok = converged_trace(Q, pert, lambda_star + delta, opts)
        traces.append(value)
        truncations.append(m)
        converged.append(ok)
        logger.debug(f"{pert.family} Q={Q}: delta={delta:.3e} trace={value!r} (truncation {m})")

    tail_x = np.log(offsets[-fit_points:])
    tail_y = np.log(traces[-fit_points:])
    exponent = float(np.polyfit(tail_x, tail_y, 1)[0])
    if exponent <= -0.25:
        verdict, limit = Recurrence.RECURRENT, None
    elif exponent >= -0.05:
        verdict = Recurrence.TRANSIENT
        limit = _richardson_in_sqrt(offsets[-fit_points:], traces[-fit_points:])
    else:
        verdict, limit = Recurrence.INCONCLUSIVE, None
    return TraceVerdict(verdict, exponent, limit, offsets, traces, truncations, converged)
