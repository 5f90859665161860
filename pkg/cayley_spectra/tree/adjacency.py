import re
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..errors import ErrTripletFormat
from .ball import TreeBall
from .perturbation import PerturbationSpec, perturbed_vertices

_HEADER = re.compile(r"^dim=(\d+)$")


@dataclass(frozen=True, eq=False)
class SparseAdjacency:
    """带自环的对称邻接矩阵（CSR 存储）

    对角元为该顶点的自环数，一个自环对角加 1。
    """

    matrix: sp.csr_matrix

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    @cached_property
    def as_float(self) -> sp.csr_matrix:
        return self.matrix.astype(np.float64).tocsr()

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    @property
    def loop_total(self) -> int:
        return int(self.diagonal().sum())

    @property
    def edge_count(self) -> int:
        off = self.matrix.nnz - int(np.count_nonzero(self.diagonal()))
        return off // 2

    def loop_free_row_sums(self) -> np.ndarray:
        sums = np.asarray(self.matrix.sum(axis=1)).ravel()
        return sums - self.diagonal()

    def is_symmetric(self) -> bool:
        return (self.matrix != self.matrix.T).nnz == 0

    def to_triplets(self) -> str:
        """编码为三元组文本

        第一行为 dim=<N>，之后每行 `row col value`，按 (row, col) 排序。
        """
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        lines = [f"dim={self.dimension}"]
        lines += [f"{r} {c} {v}" for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order])]
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_triplets(text: str) -> "SparseAdjacency":
        """从三元组文本解码

        Raises:
            ErrTripletFormat: 头部缺失、字段个数不对、下标越界、重复位置、取值非法或矩阵不对称
        """
        lines = [line.strip() for line in text.strip().splitlines() if line.strip()]
        if not lines:
            raise ErrTripletFormat("empty triplet text")
        header = _HEADER.match(lines[0])
        if header is None:
            raise ErrTripletFormat(f"bad header {lines[0]!r}, expected dim=<N>")
        n = int(header.group(1))
        seen = set()
        rows, cols, vals = [], [], []
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split()
            if len(parts) != 3:
                raise ErrTripletFormat(f"line {lineno}: expected 'row col value', got {line!r}")
            try:
                r, c, v = (int(p) for p in parts)
            except ValueError:
                raise ErrTripletFormat(f"line {lineno}: non-integer field in {line!r}")
            if not (0 <= r < n and 0 <= c < n):
                raise ErrTripletFormat(f"line {lineno}: index outside dim={n}")
            if (r, c) in seen:
                raise ErrTripletFormat(f"line {lineno}: duplicate entry ({r}, {c})")
            seen.add((r, c))
            # 非对角只允许 0/1，对角为自环数
            if r != c and v not in (0, 1):
                raise ErrTripletFormat(f"line {lineno}: off-diagonal value {v} not in {{0, 1}}")
            if r == c and v < 0:
                raise ErrTripletFormat(f"line {lineno}: negative loop count {v}")
            rows.append(r)
            cols.append(c)
            vals.append(v)
        matrix = sp.csr_matrix(
            (np.asarray(vals, dtype=np.int64), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
            shape=(n, n),
        )
        adj = SparseAdjacency(matrix)
        if not adj.is_symmetric():
            raise ErrTripletFormat("triplets describe a non-symmetric matrix")
        return adj


def assemble_adjacency(ball: TreeBall, pert: Optional[PerturbationSpec] = None) -> SparseAdjacency:
    """组装扰动图 A_Y = A + D 的邻接矩阵

    Args:
        ball: 宿主球
        pert: 扰动，None 表示不加自环

    Returns:
        SparseAdjacency 对象
    """
    matrix = ball.tree_adjacency.copy()
    if pert is not None:
        ids, weights = perturbed_vertices(ball, pert)
        loops = sp.csr_matrix((weights, (ids, ids)), shape=matrix.shape)
        matrix = (matrix + loops).tocsr()
    matrix.sort_indices()
    return SparseAdjacency(matrix)
