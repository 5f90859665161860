from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Tuple

import numpy as np

from ..errors import ErrInvalidParameter, ErrSize
from .ball import TreeBall, vertex_count


class PerturbationKind(Enum):
    """自环扰动的类型"""
    ROOT_LOOPS = "root-loops"  # 根上 k 个自环
    SEGMENT = "segment"        # 过根的 ℤ 线段 S_m
    RAY = "ray"                # 从根出发的 ℕ 射线 N_m
    SUBTREE = "subtree"        # 子树 𝔾^q 截断到深度 m


@dataclass(frozen=True)
class PerturbationSpec:
    """自环位置的描述

    每个被扰动的顶点恰有一个自环，RootLoops 在根上放 k 个。
    embedding 为孩子槽位的偏移量，用于选取另一种等距嵌入。
    """

    kind: PerturbationKind
    k: int = 1  # 根上自环数（仅 ROOT_LOOPS）
    m: int = 0  # 扰动的延伸长度/深度
    q: int = 2  # 子树的度（仅 SUBTREE）
    embedding: int = 0

    def __post_init__(self):
        if self.kind is PerturbationKind.ROOT_LOOPS and self.k < 1:
            raise ErrInvalidParameter(f"root-loops needs k >= 1, got {self.k}")
        if self.m < 0:
            raise ErrInvalidParameter(f"extent m must be >= 0, got {self.m}")
        if self.kind is PerturbationKind.SUBTREE and self.q < 2:
            raise ErrInvalidParameter(f"subtree order q must be >= 2, got {self.q}")
        if self.embedding < 0:
            raise ErrInvalidParameter(f"embedding offset must be >= 0, got {self.embedding}")

    @classmethod
    def root_loops(cls, k: int) -> "PerturbationSpec":
        return cls(PerturbationKind.ROOT_LOOPS, k=k)

    @classmethod
    def segment(cls, m: int, embedding: int = 0) -> "PerturbationSpec":
        return cls(PerturbationKind.SEGMENT, m=m, embedding=embedding)

    @classmethod
    def ray(cls, m: int, embedding: int = 0) -> "PerturbationSpec":
        return cls(PerturbationKind.RAY, m=m, embedding=embedding)

    @classmethod
    def subtree(cls, q: int, m: int, embedding: int = 0) -> "PerturbationSpec":
        return cls(PerturbationKind.SUBTREE, m=m, q=q, embedding=embedding)

    @property
    def is_family(self) -> bool:
        """是否属于无限族（线段、射线、子树）"""
        return self.kind is not PerturbationKind.ROOT_LOOPS

    @property
    def label(self) -> str:
        if self.kind is PerturbationKind.ROOT_LOOPS:
            return f"root-loops(k={self.k})"
        if self.kind is PerturbationKind.SUBTREE:
            return f"subtree(q={self.q}, m={self.m})"
        return f"{self.kind.value}(m={self.m})"

    @property
    def family(self) -> str:
        """不含延伸长度的族名"""
        if self.kind is PerturbationKind.ROOT_LOOPS:
            return f"root-loops(k={self.k})"
        if self.kind is PerturbationKind.SUBTREE:
            return f"subtree(q={self.q})"
        return self.kind.value

    def with_extent(self, m: int) -> "PerturbationSpec":
        return PerturbationSpec(self.kind, k=self.k, m=m, q=self.q, embedding=self.embedding)

    def check_degree(self, Q: int) -> None:
        if Q < 2:
            raise ErrInvalidParameter(f"degree Q must be >= 2, got {Q}")
        if self.kind is PerturbationKind.SUBTREE and self.q > Q:
            raise ErrInvalidParameter(f"subtree order q={self.q} exceeds tree degree Q={Q}")

    def check_fits(self, ball: TreeBall) -> None:
        self.check_degree(ball.degree_Q)
        if self.m > ball.radius_n:
            raise ErrSize(f"{self.label} extends beyond the ball of radius {ball.radius_n}")


def _chain(ball: TreeBall, first: int, length: int, slot: int) -> list:
    # 从 first 出发沿固定槽位向下走 length-1 步
    ids = [first]
    for _ in range(length - 1):
        ids.append(int(ball.child_ids(np.array([ids[-1]]), np.array([slot]))[0]))
    return ids


def perturbed_vertices(ball: TreeBall, pert: PerturbationSpec) -> Tuple[np.ndarray, np.ndarray]:
    """被扰动顶点及其自环数

    Args:
        ball: 宿主球
        pert: 扰动描述

    Returns:
        (按编号排序的顶点数组, 对应的自环数数组)

    Raises:
        ErrSize: 扰动超出球半径
        ErrInvalidParameter: q > Q
    """
    pert.check_fits(ball)
    Q, e = ball.degree_Q, pert.embedding
    if pert.kind is PerturbationKind.ROOT_LOOPS:
        return np.array([0], dtype=np.int64), np.array([pert.k], dtype=np.int64)

    ids = [0]
    if pert.kind is PerturbationKind.SEGMENT and pert.m > 0:
        for arm in (e % Q, (e + 1) % Q):
            ids += _chain(ball, 1 + arm, pert.m, e % (Q - 1))
    elif pert.kind is PerturbationKind.RAY and pert.m > 0:
        ids += _chain(ball, 1 + e % Q, pert.m, e % (Q - 1))
    elif pert.kind is PerturbationKind.SUBTREE:
        q = pert.q
        level = np.array([0], dtype=np.int64)
        for k in range(pert.m):
            width = q if k == 0 else q - 1
            slots_per_vertex = (e + np.arange(width)) % ball.child_slots(int(level[0]))
            parents = np.repeat(level, width)
            slots = np.tile(slots_per_vertex, level.size)
            level = ball.child_ids(parents, slots)
            ids.extend(level.tolist())
    vertices = np.unique(np.asarray(ids, dtype=np.int64))
    return vertices, np.ones(vertices.size, dtype=np.int64)


def perturbation_density(Q: int, pert: PerturbationSpec, n: int) -> Fraction:
    """扰动在半径 n 的球中所占的比例

    无限族按球半径 n 延伸，分子计数自环边，分母为球的顶点数。

    Returns:
        有理数比例
    """
    pert.check_degree(Q)
    total = vertex_count(Q, n)
    if pert.kind is PerturbationKind.ROOT_LOOPS:
        count = pert.k
    elif pert.kind is PerturbationKind.SEGMENT:
        count = 2 * n + 1
    elif pert.kind is PerturbationKind.RAY:
        count = n + 1
    else:
        count = vertex_count(pert.q, n)
    return Fraction(count, total)
