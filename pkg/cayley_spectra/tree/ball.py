from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from ..errors import ErrCapacity, ErrContractViolation, ErrInvalidParameter, ErrVertexIndex
from ..options import Options, resolve


def vertex_count(Q: int, n: int, options: Optional[Options] = None) -> int:
    """计算度为 Q 的 Cayley 树半径为 n 的球的顶点数

    Args:
        Q: 树的度
        n: 球半径

    Returns:
        顶点数，Q=2 时为 2n+1，否则为 (Q(Q-1)^n - 2)/(Q-2)

    Raises:
        ErrInvalidParameter: Q < 2 或 n < 0
        ErrCapacity: 顶点数超过配置的上限
    """
    if Q < 2:
        raise ErrInvalidParameter(f"degree Q must be >= 2, got {Q}")
    if n < 0:
        raise ErrInvalidParameter(f"radius n must be >= 0, got {n}")
    count = 2 * n + 1 if Q == 2 else (Q * (Q - 1) ** n - 2) // (Q - 2)
    cap = resolve(options).max_ball_vertices
    if count > cap:
        raise ErrCapacity(f"ball Q={Q} n={n} has {count} vertices, cap is {cap}")
    return count


@dataclass(frozen=True, eq=False)
class TreeBall:
    """Cayley 树的有限球

    顶点按 BFS 编号：根为 0，同一父节点的孩子编号连续，按父节点编号排序。
    """

    degree_Q: int
    radius_n: int
    parent: np.ndarray  # 根的父节点是它自己
    depth: np.ndarray
    level_offsets: np.ndarray  # 第 k 层第一个顶点的编号，末尾为顶点总数

    @property
    def vertex_count(self) -> int:
        return int(self.level_offsets[-1])

    @property
    def edge_count(self) -> int:
        return self.vertex_count - 1

    def check_vertex(self, v: int) -> int:
        if not 0 <= v < self.vertex_count:
            raise ErrVertexIndex(f"vertex {v} outside ball of {self.vertex_count} vertices")
        return int(v)

    def child_slots(self, v: int) -> int:
        """顶点 v 在完整树中的孩子槽位数"""
        return self.degree_Q if v == 0 else self.degree_Q - 1

    def child_ids(self, vertices: np.ndarray, slots: np.ndarray) -> np.ndarray:
        """批量计算孩子编号

        Args:
            vertices: 同一层的顶点编号
            slots: 每个顶点选取的孩子槽位

        Returns:
            孩子编号数组

        Raises:
            ErrInvalidParameter: 顶点已在边界层
        """
        vertices = np.asarray(vertices, dtype=np.int64)
        slots = np.asarray(slots, dtype=np.int64)
        if vertices.size == 0:
            return vertices
        k = int(self.depth[vertices[0]])
        if k >= self.radius_n:
            raise ErrInvalidParameter(f"vertices at depth {k} have no children inside radius {self.radius_n}")
        if k == 0:
            return 1 + slots
        within = vertices - self.level_offsets[k]
        return self.level_offsets[k + 1] + within * (self.degree_Q - 1) + slots

    def children(self, v: int) -> np.ndarray:
        v = self.check_vertex(v)
        if self.depth[v] == self.radius_n:
            return np.empty(0, dtype=np.int64)
        slots = np.arange(self.child_slots(v))
        return self.child_ids(np.full(slots.size, v), slots)

    def level(self, k: int) -> np.ndarray:
        return np.arange(self.level_offsets[k], self.level_offsets[k + 1], dtype=np.int64)

    @cached_property
    def tree_adjacency(self) -> sp.csr_matrix:
        """不含自环的树邻接矩阵"""
        child = np.arange(1, self.vertex_count, dtype=np.int64)
        up = self.parent[1:]
        rows = np.concatenate([child, up])
        cols = np.concatenate([up, child])
        data = np.ones(rows.size, dtype=np.int64)
        n = self.vertex_count
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    def distances_from(self, x: int) -> np.ndarray:
        """顶点 x 到球内所有顶点的距离"""
        x = self.check_vertex(x)
        dist = csgraph.shortest_path(self.tree_adjacency, directed=False, unweighted=True, indices=x)
        return dist.astype(np.int64)

    def ancestor_paths(self, vertices: np.ndarray) -> np.ndarray:
        """根到各顶点的路径，第 j 列为深度 j 的祖先，超出深度处为 -1"""
        vertices = np.asarray(vertices, dtype=np.int64)
        paths = np.full((vertices.size, self.radius_n + 1), -1, dtype=np.int64)
        cur = vertices.copy()
        depth = self.depth[vertices]
        rows = np.arange(vertices.size)
        for step in range(self.radius_n + 1):
            valid = depth - step >= 0
            paths[rows[valid], depth[valid] - step] = cur[valid]
            cur = self.parent[cur]
        return paths


def distance_matrix(ball: TreeBall, us, vs, block: int = 256) -> np.ndarray:
    """两组顶点之间的距离矩阵

    d(u, v) = depth(u) + depth(v) - 2·depth(lca)，最近公共祖先由根路径的公共前缀给出。
    """
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    for arr in (us, vs):
        if arr.size and (arr.min() < 0 or arr.max() >= ball.vertex_count):
            raise ErrVertexIndex(f"vertex ids outside [0, {ball.vertex_count})")
    pv = ball.ancestor_paths(vs)[None, :, :]
    dv = ball.depth[vs][None, :]
    out = np.empty((us.size, vs.size), dtype=np.int64)
    for start in range(0, us.size, block):
        chunk = us[start:start + block]
        pu = ball.ancestor_paths(chunk)[:, None, :]
        common = np.count_nonzero((pu == pv) & (pu >= 0), axis=-1)
        out[start:start + block] = ball.depth[chunk][:, None] + dv - 2 * (common - 1)
    return out


def build_ball(Q: int, n: int, options: Optional[Options] = None) -> TreeBall:
    """构造半径为 n 的球

    Args:
        Q: 树的度，Q >= 2
        n: 半径，n >= 0
        options: 配置

    Returns:
        TreeBall 对象
    """
    vertex_count(Q, n, options)
    sizes = np.array([1] + [Q * (Q - 1) ** (k - 1) for k in range(1, n + 1)], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    parent = np.zeros(int(offsets[-1]), dtype=np.int64)
    for k in range(1, n + 1):
        within = np.arange(sizes[k], dtype=np.int64)
        if k == 1:
            parent[offsets[1]:offsets[2]] = 0
        else:
            parent[offsets[k]:offsets[k + 1]] = offsets[k - 1] + within // (Q - 1)
    depth = np.repeat(np.arange(n + 1, dtype=np.int64), sizes)
    for arr in (parent, depth, offsets):
        arr.setflags(write=False)
    return TreeBall(degree_Q=Q, radius_n=n, parent=parent, depth=depth, level_offsets=offsets)


def distance(ball: TreeBall, x: int, y: int) -> int:
    """树上两点之间唯一路径的长度"""
    x, y = ball.check_vertex(x), ball.check_vertex(y)
    d = 0
    while x != y:
        if ball.depth[x] >= ball.depth[y]:
            x = int(ball.parent[x])
        else:
            y = int(ball.parent[y])
        d += 1
    return d


def _as_vertex_set(ball: TreeBall, S: Iterable[int]) -> np.ndarray:
    ids = np.unique(np.asarray(list(S), dtype=np.int64))
    if ids.size == 0:
        raise ErrInvalidParameter("vertex set must be non-empty")
    if ids[0] < 0 or ids[-1] >= ball.vertex_count:
        raise ErrVertexIndex(f"vertex set has ids outside [0, {ball.vertex_count})")
    # 树中的诱导子图连通当且仅当边数为 |S|-1
    inside = np.zeros(ball.vertex_count, dtype=bool)
    inside[ids] = True
    non_root = ids[ids != 0]
    induced_edges = int(np.count_nonzero(inside[ball.parent[non_root]]))
    if induced_edges != ids.size - 1:
        raise ErrContractViolation("vertex set is not connected; nearest point is not unique")
    return ids


def nearest_in_set_all(ball: TreeBall, S: Iterable[int]) -> Tuple[np.ndarray, np.ndarray]:
    """所有顶点到连通集合 S 的最近点与距离

    Returns:
        (最近点编号数组, 距离数组)
    """
    ids = _as_vertex_set(ball, S)
    dist, _, sources = csgraph.dijkstra(
        ball.tree_adjacency, directed=False, indices=ids,
        unweighted=True, min_only=True, return_predecessors=True,
    )
    return sources.astype(np.int64), dist.astype(np.int64)


def nearest_in_set(ball: TreeBall, x: int, S: Iterable[int]) -> Tuple[int, int]:
    """顶点 x 到连通集合 S 的唯一最近点

    Args:
        ball: 球
        x: 顶点编号
        S: 非空连通顶点集合

    Returns:
        (y, d)，其中 y 为 S 中距 x 最近的点，d = d(x, S)

    Raises:
        ErrInvalidParameter: S 为空
        ErrContractViolation: S 不连通
    """
    x = ball.check_vertex(x)
    nearest, dist = nearest_in_set_all(ball, S)
    return int(nearest[x]), int(dist[x])
