import math
from typing import Optional

from ..errors import ErrDomain, ErrInvalidParameter, ErrNoHiddenSpectrum
from ..tree.perturbation import PerturbationKind, PerturbationSpec


def poisson_norm(a: float) -> float:
    """Poisson 核乘子 T_a 的范数 P_a(1) = (1+a)/(1-a)

    Raises:
        ErrDomain: a 不在 [0, 1) 内
    """
    if not 0.0 <= a < 1.0:
        raise ErrDomain(f"Poisson kernel needs 0 <= a < 1, got {a!r}")
    return (1.0 + a) / (1.0 - a)


def t_aq_norm(q: int, a: float) -> float:
    """径向算子 T_{a,q} 的范数 (1-a²)/(1-a√(q-1))²

    q=2 时与 poisson_norm 相同。

    Args:
        q: 子树的度
        a: 衰减率

    Returns:
        范数值

    Raises:
        ErrDomain: a√(q-1) >= 1 或 a < 0
    """
    if q < 2:
        raise ErrInvalidParameter(f"subtree order q must be >= 2, got {q}")
    xi = a * math.sqrt(q - 1)
    if a < 0.0 or xi >= 1.0:
        raise ErrDomain(f"T_(a,q) is unbounded unless 0 <= a*sqrt(q-1) < 1, got a={a!r}, q={q}")
    return (1.0 - a * a) / (1.0 - xi) ** 2


def fixed_point_a(q: int) -> float:
    """扰动子树 𝔾^q 的临界衰减率 a*

    a* 满足 a* = (1 - a*√(q-1))²。记 t = √a*，则 √(q-1)·t² + t - 1 = 0。
    q=2 时 a* = (3-√5)/2，与 Q 无关。
    """
    if q < 2:
        raise ErrInvalidParameter(f"subtree order q must be >= 2, got {q}")
    r = math.sqrt(q - 1)
    t = 2.0 / (1.0 + math.sqrt(1.0 + 4.0 * r))
    return t * t


def lambda_from_a(Q: int, a: float) -> float:
    """a(λ) 的反函数 λ = 1/a + (Q-1)a"""
    return 1.0 / a + (Q - 1) * a


def hidden_lambda_star(Q: int, q: int = 2) -> float:
    """子树（q=2 时为线段/射线）扰动后的算子范数

    Raises:
        ErrNoHiddenSpectrum: a* >= 1/√(Q-1)，即 Q > Q(q)
    """
    if q < 2 or Q < q:
        raise ErrInvalidParameter(f"need 2 <= q <= Q, got q={q}, Q={Q}")
    a = fixed_point_a(q)
    if (Q - 1) * a * a >= 1.0:
        raise ErrNoHiddenSpectrum(f"loops on G^{q} do not raise the norm of G^{Q}")
    return lambda_from_a(Q, a)


def root_loops_a(Q: int, k: int) -> float:
    """根上 k 个自环时的 a(λ*)，由 μ(λ) = k 解出

    Raises:
        ErrNoHiddenSpectrum: k <= (Q-2)/√(Q-1)
    """
    if k < 1:
        raise ErrInvalidParameter(f"root-loops needs k >= 1, got {k}")
    if Q < 2:
        raise ErrInvalidParameter(f"degree Q must be >= 2, got {Q}")
    if k < min_loops_for_hidden_spectrum(Q):
        raise ErrNoHiddenSpectrum(f"{k} root loops do not raise the norm of G^{Q}")
    # 1/a - a = k
    return 2.0 / (k + math.sqrt(k * k + 4.0))


def min_loops_for_hidden_spectrum(Q: int) -> int:
    """根上最少需要多少个自环才能抬高算子范数

    即满足 k > (Q-2)/√(Q-1) 的最小整数 k，用整数比较 k²(Q-1) > (Q-2)²。
    """
    if Q < 2:
        raise ErrInvalidParameter(f"degree Q must be >= 2, got {Q}")
    k = 1
    while k * k * (Q - 1) <= (Q - 2) ** 2:
        k += 1
    return k


def family_lambda_star(Q: int, pert: PerturbationSpec) -> Optional[float]:
    """闭式的扰动范数，没有隐藏谱时返回 None"""
    pert.check_degree(Q)
    try:
        if pert.kind is PerturbationKind.ROOT_LOOPS:
            return lambda_from_a(Q, root_loops_a(Q, pert.k))
        q = pert.q if pert.kind is PerturbationKind.SUBTREE else 2
        return hidden_lambda_star(Q, q)
    except ErrNoHiddenSpectrum:
        return None
