import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Union

from scipy.optimize import brentq

from ..errors import ErrInvalidParameter
from ..kernel.norms import min_loops_for_hidden_spectrum
from ..kernel.params import edge_norm, spectral_params
from ..options import Options, resolve
from ..tree.perturbation import PerturbationKind, PerturbationSpec
from .functional import secular_functional, secular_functional_limit

logger = logging.getLogger(__name__)

# 括区间下端相对谱边缘的偏移
_EDGE_OFFSET = 1e-12


class SolveMethod(Enum):
    """λ* 的求解方式"""
    CLOSED_FORM = "closed_form"
    BISECTION = "bisection"
    FIXED_POINT = "fixed_point"


@dataclass(frozen=True)
class SecularRoot:
    """久期方程的解 λ* 及其来源"""

    Q: int
    family: str
    lambda_star: float
    a_star: float
    mu_star: float
    method: SolveMethod
    residual: float  # |f(λ*) - 1| 的上界
    truncation_n: Optional[int] = None  # 仅 BISECTION

    @property
    def hidden_width(self) -> float:
        """隐藏谱宽度 ‖A_Y‖ - ‖A_X‖ >= 0"""
        return self.lambda_star - edge_norm(self.Q)


@dataclass(frozen=True)
class NoRoot:
    """久期方程无解：扰动不改变范数"""

    Q: int
    family: str
    reason: str
    max_functional: float  # 谱边缘处达到的最大泛函值

    @property
    def hidden_width(self) -> float:
        return 0.0


SecularResult = Union[SecularRoot, NoRoot]


def _root(Q: int, pert: PerturbationSpec, lam: float, method: SolveMethod, residual: float,
          truncation_n: Optional[int] = None) -> SecularRoot:
    p = spectral_params(Q, lam)
    return SecularRoot(Q=Q, family=pert.family, lambda_star=lam, a_star=p.a, mu_star=p.mu,
                       method=method, residual=residual, truncation_n=truncation_n)


def _bracket(Q: int, pert: PerturbationSpec):
    lo = edge_norm(Q) * (1.0 + _EDGE_OFFSET)
    # 范数不超过最大行和
    hi = Q + (pert.k if pert.kind is PerturbationKind.ROOT_LOOPS else 1) + 1.0
    return lo, hi


def q_threshold(q: int) -> int:
    """扰动 𝔾^q 仍能抬高范数的最大 Q

    Q(q) = ⌊(2√(q-1) + 1 + √(4√(q-1) + 1))²/4⌋ + 1
    """
    if q < 2:
        raise ErrInvalidParameter(f"subtree order q must be >= 2, got {q}")
    r = math.sqrt(q - 1)
    return math.floor((2.0 * r + 1.0 + math.sqrt(4.0 * r + 1.0)) ** 2 / 4.0) + 1


def solve_secular_closed(Q: int, pert: PerturbationSpec, options: Optional[Options] = None) -> SecularResult:
    """用闭式求解久期方程

    线段与射线：λ* = (3-√5)Q/2 + √5（Q <= 7）；根上 k 个自环：μ(λ) = k 的显式解；
    子树：在 λ 上对单调方程 (1-a²)/(1-a√(q-1))² = μ 做括区间求根。

    Returns:
        SecularRoot，或 NoRoot（没有隐藏谱）
    """
    pert.check_degree(Q)
    opts = resolve(options)
    lo, hi = _bracket(Q, pert)
    edge_value = secular_functional_limit(Q, pert, lo)
    if pert.kind is PerturbationKind.ROOT_LOOPS:
        k = pert.k
        if k < min_loops_for_hidden_spectrum(Q):
            return NoRoot(Q, pert.family, f"{k} root loops do not raise the norm", edge_value)
        lam = (-k * (Q - 2) + Q * math.sqrt(k * k + 4.0)) / 2.0
    elif pert.kind in (PerturbationKind.SEGMENT, PerturbationKind.RAY):
        if Q > 7:
            return NoRoot(Q, pert.family, "no solution for Q > 7", edge_value)
        sqrt5 = math.sqrt(5.0)
        lam = (3.0 - sqrt5) * Q / 2.0 + sqrt5
    else:
        if edge_value <= 1.0:
            return NoRoot(Q, pert.family, f"Q={Q} exceeds Q(q)={q_threshold(pert.q)}", edge_value)
        lam = brentq(lambda x: secular_functional_limit(Q, pert, x) - 1.0, lo, hi,
                     xtol=opts.secular_root_tol)
    residual = abs(secular_functional_limit(Q, pert, lam) - 1.0)
    return _root(Q, pert, lam, SolveMethod.CLOSED_FORM, residual)


def _richardson_diagonal(ns: List[int], roots: List[float]) -> List[float]:
    """逐级消去 1/n², 1/n³, ... 项，返回表的对角线"""
    table: List[List[float]] = []
    diagonal = []
    for j, value in enumerate(roots):
        row = [value]
        for k in range(1, j + 1):
            ratio = (ns[j] / ns[j - 1]) ** (k + 1)
            prev = row[k - 1]
            row.append(prev + (prev - table[j - 1][k - 1]) / (ratio - 1.0))
        table.append(row)
        diagonal.append(row[-1])
    return diagonal


def solve_secular_bisection(Q: int, pert: PerturbationSpec, options: Optional[Options] = None) -> SecularResult:
    """截断核矩阵上的括区间求根，截断长度倍增并做 Richardson 外推

    每个截断 n 上泛函关于 λ 严格递减，用 brentq 求 f_n(λ) = 1；
    截断根从下方单调逼近 λ*，外推值的变化小于 secular_move_tol 时停止。

    Args:
        Q: 树的度
        pert: 扰动族
        options: 配置（截断序列、上限与容差）

    Returns:
        SecularRoot，或带最大泛函值的 NoRoot
    """
    pert.check_degree(Q)
    opts = resolve(options)
    lo, hi = _bracket(Q, pert)

    if pert.kind is PerturbationKind.ROOT_LOOPS:
        edge_value = secular_functional(Q, pert, lo, 0)
        if edge_value <= 1.0:
            return NoRoot(Q, pert.family, "functional stays below 1 above the spectral edge", edge_value)
        lam = brentq(lambda x: secular_functional(Q, pert, x, 0) - 1.0, lo, hi,
                     xtol=opts.secular_root_tol)
        residual = abs(secular_functional(Q, pert, lam, 0) - 1.0)
        return _root(Q, pert, lam, SolveMethod.BISECTION, residual, truncation_n=0)

    cap = opts.max_truncation_radial if pert.kind is PerturbationKind.SUBTREE else opts.max_truncation_path
    schedule = [n for n in opts.truncation_schedule if n <= cap]
    ns: List[int] = []
    roots: List[float] = []
    best_edge = -math.inf
    move = math.inf
    n = schedule[0] if schedule else cap
    while True:
        edge_value = secular_functional(Q, pert, lo, n)
        best_edge = max(best_edge, edge_value)
        if edge_value > 1.0:
            root = brentq(lambda x: secular_functional(Q, pert, x, n) - 1.0, lo, hi,
                          xtol=opts.secular_root_tol)
            ns.append(n)
            roots.append(root)
            diagonal = _richardson_diagonal(ns, roots)
            if len(diagonal) >= 2:
                move = abs(diagonal[-1] - diagonal[-2])
            logger.debug(f"{pert.label} Q={Q}: truncation {n} root {root!r}, extrapolated move {move:.3e}")
            if len(diagonal) >= 3 and move < opts.secular_move_tol:
                break
        else:
            logger.debug(f"{pert.label} Q={Q}: no root at truncation {n} (edge value {edge_value!r})")
        if n >= cap:
            break
        later = [m for m in schedule if m > n]
        n = later[0] if later else min(2 * n, cap)

    if not roots:
        return NoRoot(Q, pert.family, f"functional stays below 1 up to truncation {n}", best_edge)
    if move >= opts.secular_move_tol:
        logger.warning(f"{pert.label} Q={Q}: extrapolated root still moving by {move:.3e} at truncation {ns[-1]}")
    lam = _richardson_diagonal(ns, roots)[-1]
    residual = abs(secular_functional(Q, pert, roots[-1], ns[-1]) - 1.0)
    if math.isfinite(move):
        residual = max(residual, move)
    return _root(Q, pert, lam, SolveMethod.BISECTION, residual, truncation_n=ns[-1])


def solve_secular_fixed_point(Q: int, q: int, options: Optional[Options] = None) -> SecularResult:
    """由 PF 本征关系得到的不动点方程 λ = 1 + 2√(q-1) + (Q-q)a(λ)

    右边关于 λ 递减，故 λ - g(λ) 单调，用 brentq 求根。
    """
    pert = PerturbationSpec.subtree(q, 0)
    pert.check_degree(Q)
    opts = resolve(options)
    lo, hi = _bracket(Q, pert)
    base = 1.0 + 2.0 * math.sqrt(q - 1)

    def excess(lam: float) -> float:
        return lam - base - (Q - q) * spectral_params(Q, lam).a

    if excess(lo) >= 0.0:
        return NoRoot(Q, pert.family, "fixed-point equation has no solution above the edge",
                      secular_functional_limit(Q, pert, lo))
    lam = brentq(excess, lo, hi, xtol=opts.secular_root_tol)
    return _root(Q, pert, lam, SolveMethod.FIXED_POINT, abs(excess(lam)))
