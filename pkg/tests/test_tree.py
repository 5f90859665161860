"""树模型测试"""

import os
import sys
import unittest
from fractions import Fraction

import numpy as np

# 添加项目根目录到Python路径
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cayley_spectra.errors import ErrCapacity, ErrContractViolation, ErrInvalidParameter, ErrSize, ErrTripletFormat, ErrVertexIndex
from cayley_spectra.options import Options
from cayley_spectra.tree import (
    PerturbationSpec,
    SparseAdjacency,
    assemble_adjacency,
    build_ball,
    distance,
    distance_matrix,
    nearest_in_set,
    nearest_in_set_all,
    perturbation_density,
    perturbed_vertices,
    vertex_count,
)


class TestBall(unittest.TestCase):
    """有限球测试类"""

    def test_vertex_count(self):
        """测试顶点数公式"""
        self.assertEqual(vertex_count(3, 0), 1)
        self.assertEqual(vertex_count(3, 2), 10)
        self.assertEqual(vertex_count(3, 9), 1534)
        self.assertEqual(vertex_count(4, 9), 39365)
        self.assertEqual(vertex_count(2, 5), 11)

    def test_vertex_count_errors(self):
        """测试非法参数与容量上限"""
        with self.assertRaises(ErrInvalidParameter):
            vertex_count(1, 3)
        with self.assertRaises(ErrInvalidParameter):
            vertex_count(3, -1)
        with self.assertRaises(ErrCapacity):
            vertex_count(3, 6, Options(max_ball_vertices=100))

    def test_levels_and_degrees(self):
        """测试分层大小与度数：内部顶点度为 Q，边界顶点度为 1"""
        ball = build_ball(3, 4)
        self.assertEqual(ball.vertex_count, vertex_count(3, 4))
        sizes = [ball.level(k).size for k in range(5)]
        self.assertEqual(sizes, [1, 3, 6, 12, 24])
        degrees = np.asarray(ball.tree_adjacency.sum(axis=1)).ravel()
        self.assertTrue(np.all(degrees[ball.depth < 4] == 3))
        self.assertTrue(np.all(degrees[ball.depth == 4] == 1))
        self.assertEqual(ball.tree_adjacency.nnz, 2 * ball.edge_count)

    def test_children(self):
        """测试孩子编号与父节点一致"""
        ball = build_ball(4, 3)
        self.assertEqual(ball.children(0).tolist(), [1, 2, 3, 4])
        for v in (1, 7, 12):
            for c in ball.children(v):
                self.assertEqual(int(ball.parent[c]), v)
        self.assertEqual(ball.children(int(ball.level(3)[0])).size, 0)

    def test_distances_agree(self):
        """测试三种距离计算方式一致"""
        ball = build_ball(3, 4)
        rng = np.random.default_rng(7)
        us = rng.integers(0, ball.vertex_count, 20)
        vs = rng.integers(0, ball.vertex_count, 15)
        matrix = distance_matrix(ball, us, vs)
        for i, u in enumerate(us):
            from_u = ball.distances_from(int(u))
            for j, v in enumerate(vs):
                self.assertEqual(matrix[i, j], distance(ball, int(u), int(v)))
                self.assertEqual(matrix[i, j], from_u[v])

    def test_vertex_index_errors(self):
        """测试越界顶点"""
        ball = build_ball(3, 2)
        with self.assertRaises(ErrVertexIndex):
            distance(ball, 0, 10)
        with self.assertRaises(ErrVertexIndex):
            distance_matrix(ball, [0], [-1])

    def test_nearest_in_set(self):
        """测试到连通集合的最近点"""
        ball = build_ball(3, 4)
        ids, _ = perturbed_vertices(ball, PerturbationSpec.ray(4))
        nearest, dist = nearest_in_set_all(ball, ids)
        self.assertTrue(np.all(dist[ids] == 0))
        leaf = int(ball.level(4)[-1])
        y, d = nearest_in_set(ball, leaf, ids)
        self.assertEqual((y, d), (int(nearest[leaf]), int(dist[leaf])))
        self.assertEqual(d, distance(ball, leaf, y))

    def test_distance_is_metric(self):
        """测试距离在小球上是度量（穷举）"""
        for Q, n in ((3, 3), (4, 3), (2, 3)):
            ball = build_ball(Q, n)
            size = ball.vertex_count
            D = np.array([[distance(ball, x, y) for y in range(size)] for x in range(size)])
            np.testing.assert_array_equal(D, D.T)
            self.assertTrue(np.all(np.diag(D) == 0))
            self.assertTrue(np.all(D[~np.eye(size, dtype=bool)] > 0))
            self.assertTrue(np.all(D[:, None, :] <= D[:, :, None] + D[None, :, :]))

    def test_nearest_in_set_exhaustive(self):
        """测试最近点与穷举最小化一致且唯一"""
        cases = [
            (3, 4, PerturbationSpec.segment(4)),
            (3, 4, PerturbationSpec.ray(3)),
            (3, 3, PerturbationSpec.root_loops(1)),
            (4, 4, PerturbationSpec.subtree(3, 4)),
            (4, 4, PerturbationSpec.subtree(2, 2, embedding=1)),
        ]
        for Q, n, pert in cases:
            ball = build_ball(Q, n)
            S, _ = perturbed_vertices(ball, pert)
            nearest, dist = nearest_in_set_all(ball, S)
            for x in range(ball.vertex_count):
                d = np.array([distance(ball, x, int(s)) for s in S])
                minimizers = S[d == d.min()]
                self.assertEqual(minimizers.size, 1, (pert.label, x))
                self.assertEqual((int(nearest[x]), int(dist[x])), (int(minimizers[0]), int(d.min())))
            leaf = int(ball.level(n)[-1])
            self.assertEqual(nearest_in_set(ball, leaf, S), (int(nearest[leaf]), int(dist[leaf])))

    def test_disconnected_set(self):
        """测试不连通集合被拒绝"""
        ball = build_ball(3, 3)
        leaves = ball.level(3)
        with self.assertRaises(ErrContractViolation):
            nearest_in_set(ball, 0, [int(leaves[0]), int(leaves[-1])])
        with self.assertRaises(ErrInvalidParameter):
            nearest_in_set(ball, 0, [])


class TestPerturbation(unittest.TestCase):
    """扰动放置测试类"""

    def test_counts(self):
        """测试各扰动族的顶点数"""
        ball = build_ball(4, 3)
        ids, w = perturbed_vertices(ball, PerturbationSpec.root_loops(2))
        self.assertEqual(ids.tolist(), [0])
        self.assertEqual(w.tolist(), [2])
        self.assertEqual(perturbed_vertices(ball, PerturbationSpec.segment(3))[0].size, 7)
        self.assertEqual(perturbed_vertices(ball, PerturbationSpec.ray(3))[0].size, 4)
        ids, w = perturbed_vertices(ball, PerturbationSpec.subtree(3, 2))
        self.assertEqual(ids.size, 1 + 3 + 6)
        self.assertTrue(np.all(w == 1))

    def test_segment_is_a_path(self):
        """测试线段扰动诱导出一条过根的路径"""
        ball = build_ball(3, 5)
        for embedding in (0, 1, 2):
            ids, _ = perturbed_vertices(ball, PerturbationSpec.segment(5, embedding=embedding))
            sub = ball.tree_adjacency[ids][:, ids]
            degrees = np.asarray(sub.sum(axis=1)).ravel()
            self.assertEqual(sub.nnz // 2, ids.size - 1)
            self.assertEqual(sorted(degrees.tolist()), [1, 1] + [2] * (ids.size - 2))
            self.assertIn(0, ids.tolist())

    def test_embeddings_differ(self):
        """测试不同嵌入选出不同但同样大小的顶点集合"""
        ball = build_ball(3, 4)
        a, _ = perturbed_vertices(ball, PerturbationSpec.ray(4))
        b, _ = perturbed_vertices(ball, PerturbationSpec.ray(4, embedding=1))
        self.assertEqual(a.size, b.size)
        self.assertNotEqual(a.tolist(), b.tolist())

    def test_invalid_specs(self):
        """测试非法扰动"""
        with self.assertRaises(ErrInvalidParameter):
            PerturbationSpec.root_loops(0)
        with self.assertRaises(ErrInvalidParameter):
            PerturbationSpec.subtree(1, 2)
        ball = build_ball(3, 3)
        with self.assertRaises(ErrSize):
            perturbed_vertices(ball, PerturbationSpec.segment(4))
        with self.assertRaises(ErrInvalidParameter):
            perturbed_vertices(ball, PerturbationSpec.subtree(4, 2))

    def test_density(self):
        """测试扰动密度随半径趋于零"""
        self.assertEqual(perturbation_density(3, PerturbationSpec.segment(0), 9), Fraction(19, 1534))
        densities = [perturbation_density(3, PerturbationSpec.ray(0), n) for n in (4, 8, 12)]
        self.assertTrue(densities[0] > densities[1] > densities[2])

    def test_density_examples(self):
        """测试根上自环与子树的扰动密度"""
        for k in (1, 2, 5):
            self.assertEqual(perturbation_density(3, PerturbationSpec.root_loops(k), 3), Fraction(k, 22))
        densities = [perturbation_density(3, PerturbationSpec.subtree(2, 0), n) for n in range(2, 11)]
        self.assertTrue(all(x > y for x, y in zip(densities, densities[1:])))
        for Q in (3, 4):
            full = [perturbation_density(Q, PerturbationSpec.subtree(Q, 0), n) for n in (2, 6, 10)]
            self.assertEqual(full, [Fraction(1)] * 3)

    def test_labels(self):
        """测试族名不含延伸长度"""
        self.assertEqual(PerturbationSpec.subtree(3, 5).family, "subtree(q=3)")
        self.assertEqual(PerturbationSpec.segment(7).family, "segment")
        self.assertEqual(PerturbationSpec.segment(7).with_extent(2).m, 2)


class TestAdjacency(unittest.TestCase):
    """邻接矩阵测试类"""

    def test_assemble(self):
        """测试自环进入对角，树边不变"""
        ball = build_ball(3, 5)
        adj = assemble_adjacency(ball, PerturbationSpec.segment(5))
        self.assertTrue(adj.is_symmetric())
        self.assertEqual(adj.loop_total, 11)
        self.assertEqual(adj.edge_count, ball.vertex_count - 1)
        self.assertEqual(adj.dimension, ball.vertex_count)
        self.assertTrue(np.all(adj.loop_free_row_sums()[ball.depth < 5] == 3))

    def test_root_loops_weight(self):
        """测试根上多个自环"""
        adj = assemble_adjacency(build_ball(4, 2), PerturbationSpec.root_loops(3))
        self.assertEqual(int(adj.diagonal()[0]), 3)
        self.assertEqual(adj.loop_total, 3)

    def test_triplets(self):
        """测试三元组编码与解码"""
        adj = assemble_adjacency(build_ball(3, 3), PerturbationSpec.ray(3))
        text = adj.to_triplets()
        self.assertTrue(text.startswith(f"dim={adj.dimension}\n"))
        decoded = SparseAdjacency.from_triplets(text)
        self.assertEqual((decoded.matrix != adj.matrix).nnz, 0)

    def test_bad_triplets(self):
        """测试格式错误的三元组"""
        with self.assertRaises(ErrTripletFormat):
            SparseAdjacency.from_triplets("")
        with self.assertRaises(ErrTripletFormat):
            SparseAdjacency.from_triplets("n=2\n0 1 1\n1 0 1\n")
        with self.assertRaises(ErrTripletFormat):
            SparseAdjacency.from_triplets("dim=2\n0 1\n")
        with self.assertRaises(ErrTripletFormat):
            SparseAdjacency.from_triplets("dim=2\n0 5 1\n")
        with self.assertRaises(ErrTripletFormat):
            SparseAdjacency.from_triplets("dim=2\n0 1 1\n")

    def test_triplet_values(self):
        """测试重复位置与非法取值被拒绝"""
        with self.assertRaises(ErrTripletFormat):
            SparseAdjacency.from_triplets("dim=2\n0 1 1\n1 0 1\n0 1 1\n")
        with self.assertRaises(ErrTripletFormat):
            SparseAdjacency.from_triplets("dim=2\n0 0 1\n0 0 1\n")
        with self.assertRaises(ErrTripletFormat):
            SparseAdjacency.from_triplets("dim=2\n0 1 2\n1 0 2\n")
        with self.assertRaises(ErrTripletFormat):
            SparseAdjacency.from_triplets("dim=2\n0 1 -1\n1 0 -1\n")
        with self.assertRaises(ErrTripletFormat):
            SparseAdjacency.from_triplets("dim=2\n0 0 -2\n")
        adj = SparseAdjacency.from_triplets("dim=2\n0 0 3\n0 1 1\n1 0 1\n")
        self.assertEqual(adj.loop_total, 3)


if __name__ == "__main__":
    unittest.main()
