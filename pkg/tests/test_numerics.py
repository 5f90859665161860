"""数值对照测试"""

import math
import os
import sys
import unittest
from dataclasses import replace

import numpy as np

# 添加项目根目录到Python路径
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cayley_spectra.errors import ErrDomain, ErrInvalidParameter, ErrSize
from cayley_spectra.kernel import (
    family_lambda_star,
    hardy_trace_ray,
    hidden_lambda_star,
    pf_profile,
    resolvent_trace_segment,
    resolvent_trace_subtree,
    transience_limit_ray,
    transience_limit_subtree,
)
from cayley_spectra.numerics import (
    Recurrence,
    ball_eigenvalues,
    ball_spectrum_blocks,
    conjugate_gradient,
    converged_trace,
    full_spectrum,
    ids_empirical,
    kolmogorov_distance,
    partition_function,
    path_trace,
    pf_deviation,
    radial_trace,
    resolvent_solve,
    top_eigenpair,
    trace_extrapolate,
)
from cayley_spectra.options import Options
from cayley_spectra.tree import PerturbationSpec, assemble_adjacency, build_ball, perturbed_vertices


class TestEigen(unittest.TestCase):
    """特征求解测试类"""

    def test_top_eigenpair_matches_dense(self):
        """测试 Lanczos 顶部特征对与稠密分解一致"""
        ball = build_ball(3, 5)
        adj = assemble_adjacency(ball, PerturbationSpec.segment(5))
        estimate = top_eigenpair(adj)
        self.assertAlmostEqual(estimate.top_eigenvalue, full_spectrum(adj)[-1], places=10)
        self.assertEqual(estimate.top_eigenvector[0], 1.0)
        self.assertTrue(np.all(estimate.top_eigenvector > 0.0))
        self.assertLess(estimate.residual_2norm, 1e-9)
        self.assertGreater(estimate.iterations, 0)

    def test_embedding_independence(self):
        """测试等距嵌入给出相同的谱"""
        ball = build_ball(3, 5)
        for pert in (PerturbationSpec.segment(5), PerturbationSpec.ray(5), PerturbationSpec.subtree(2, 5)):
            base = full_spectrum(assemble_adjacency(ball, pert))
            moved = full_spectrum(assemble_adjacency(ball, replace(pert, embedding=1)))
            np.testing.assert_allclose(moved, base, rtol=0, atol=1e-10)

    def test_top_eigenpair_small_dense(self):
        """测试小矩阵走稠密分支"""
        adj = assemble_adjacency(build_ball(3, 2), PerturbationSpec.root_loops(1))
        estimate = top_eigenpair(adj)
        self.assertEqual(estimate.iterations, 0)
        self.assertAlmostEqual(estimate.top_eigenvalue, full_spectrum(adj)[-1], places=12)

    def test_finite_norm_below_closed_form(self):
        """测试有限球的范数从下方逼近 λ*"""
        lam_star = family_lambda_star(3, PerturbationSpec.segment(0))
        tops = []
        for n in (4, 6, 8):
            adj = assemble_adjacency(build_ball(3, n), PerturbationSpec.segment(n))
            tops.append(top_eigenpair(adj).top_eigenvalue)
        self.assertTrue(tops[0] < tops[1] < tops[2] < lam_star)

    def test_dense_cap(self):
        """测试稠密分解的维数上限"""
        adj = assemble_adjacency(build_ball(3, 3), None)
        with self.assertRaises(ErrSize):
            full_spectrum(adj, Options(dense_cap=10))

    def test_blocks_match_dense(self):
        """测试分块精确谱与稠密分解一致"""
        for Q, n in ((3, 5), (4, 4), (2, 6)):
            eigs, mult = ball_spectrum_blocks(Q, n)
            expanded = np.repeat(eigs, mult)
            dense = full_spectrum(assemble_adjacency(build_ball(Q, n), None))
            np.testing.assert_allclose(np.sort(expanded), dense, rtol=0, atol=1e-10)
        eigs, mult = ball_spectrum_blocks(3, 0)
        self.assertEqual((eigs.tolist(), mult.tolist()), ([0.0], [1]))

    def test_ball_eigenvalues_switches_to_blocks(self):
        """测试未扰动大球使用分块谱"""
        eigs, mult = ball_eigenvalues(3, 6, None, Options(dense_cap=100))
        self.assertEqual(int(mult.sum()), build_ball(3, 6).vertex_count)
        self.assertLess(eigs.size, int(mult.sum()))


class TestResolvent(unittest.TestCase):
    """预解式数值测试类"""

    def test_cg_matches_direct_solve(self):
        """测试共轭梯度解与直接求解一致"""
        ball = build_ball(3, 4)
        adj = assemble_adjacency(ball, PerturbationSpec.segment(4))
        lam = top_eigenpair(adj).top_eigenvalue + 1.0
        x = resolvent_solve(adj, lam, 0)
        b = np.zeros(adj.dimension)
        b[0] = 1.0
        expected = np.linalg.solve(lam * np.eye(adj.dimension) - adj.as_float.toarray(), b)
        np.testing.assert_allclose(x, expected, rtol=0, atol=1e-10)

    def test_cg_indefinite(self):
        """测试非正定算子被拒绝"""
        with self.assertRaises(ErrDomain):
            conjugate_gradient(lambda v: -v, np.ones(4), 1e-12, 10)
        adj = assemble_adjacency(build_ball(3, 3), PerturbationSpec.segment(3))
        top = top_eigenpair(adj).top_eigenvalue
        with self.assertRaises(ErrDomain):
            resolvent_solve(adj, top - 0.1, 0, norm_bound=top)
        with self.assertRaises(ErrInvalidParameter):
            resolvent_solve(adj, top + 1.0, adj.dimension, norm_bound=top)

    def test_ball_trace_matches_closed_form(self):
        """测试大球上 CG 求得的对角元与线段闭式一致"""
        ball = build_ball(3, 14)
        adj = assemble_adjacency(ball, PerturbationSpec.segment(14))
        x = resolvent_solve(adj, 4.0, 0, norm_bound=hidden_lambda_star(3, 2))
        self.assertAlmostEqual(x[0], resolvent_trace_segment(3, 4.0), delta=1e-6)

    def test_path_traces(self):
        """测试路径截断的对角元收敛到线段与射线的闭式"""
        self.assertAlmostEqual(path_trace(3, 4.0, 4000), resolvent_trace_segment(3, 4.0), places=10)
        self.assertAlmostEqual(path_trace(3, 4.0, 4000, centered=False), hardy_trace_ray(3, 4.0), places=10)
        self.assertAlmostEqual(path_trace(3, 4.0, 0), path_trace(3, 4.0, 0, centered=False), places=15)

    def test_radial_trace(self):
        """测试径向截断的对角元收敛到子树闭式"""
        lam = hidden_lambda_star(4, 3) + 0.5
        self.assertAlmostEqual(radial_trace(4, 3, lam, 200), resolvent_trace_subtree(4, 3, lam), places=8)
        with self.assertRaises(ErrDomain):
            radial_trace(4, 3, hidden_lambda_star(4, 3) - 0.1, 200)

    def test_converged_trace(self):
        """测试截断加倍的收敛"""
        value, m, ok = converged_trace(3, PerturbationSpec.ray(0), 4.0)
        self.assertAlmostEqual(value, hardy_trace_ray(3, 4.0), places=8)
        self.assertGreaterEqual(m, 64)
        self.assertTrue(ok)
        value, m, ok = converged_trace(3, PerturbationSpec.root_loops(1), 4.0)
        self.assertEqual(m, 0)
        self.assertTrue(ok)

    def test_trace_capped(self):
        """测试截断上限处仍在变化时标记为未收敛"""
        options = Options(max_truncation_path=64)
        lam_star = hidden_lambda_star(3, 2)
        _, m, ok = converged_trace(3, PerturbationSpec.segment(0), lam_star + 1e-6, options)
        self.assertEqual(m, 64)
        self.assertFalse(ok)
        verdict = trace_extrapolate(3, PerturbationSpec.segment(0), lam_star, schedule=[1e-5, 1e-6], options=options)
        self.assertEqual(verdict.converged, [False, False])
        self.assertFalse(verdict.all_converged)
        self.assertEqual(verdict.truncations, [64, 64])

    def test_segment_is_recurrent(self):
        """测试线段扰动的对角元以 -1/2 次幂发散"""
        lam_star = hidden_lambda_star(3, 2)
        verdict = trace_extrapolate(3, PerturbationSpec.segment(0), lam_star)
        self.assertIs(verdict.verdict, Recurrence.RECURRENT)
        self.assertAlmostEqual(verdict.exponent, -0.5, delta=0.1)
        self.assertIsNone(verdict.limit)
        self.assertEqual(len(verdict.traces), len(verdict.offsets))

    def test_ray_is_transient(self):
        """测试射线扰动的对角元有有限极限"""
        lam_star = hidden_lambda_star(3, 2)
        verdict = trace_extrapolate(3, PerturbationSpec.ray(0), lam_star)
        self.assertIs(verdict.verdict, Recurrence.TRANSIENT)
        self.assertLess(abs(verdict.limit - transience_limit_ray(3)) / transience_limit_ray(3), 5e-3)

    def test_subtree_is_transient(self):
        """测试 q=3 子树扰动的暂态极限 √2"""
        lam_star = hidden_lambda_star(4, 3)
        verdict = trace_extrapolate(4, PerturbationSpec.subtree(3, 0), lam_star)
        self.assertIs(verdict.verdict, Recurrence.TRANSIENT)
        limit = transience_limit_subtree(4, 3)
        self.assertLess(abs(verdict.limit - limit) / limit, 1e-2)

    def test_bad_schedule(self):
        """测试 δ 序列至少有两个正数"""
        with self.assertRaises(ErrInvalidParameter):
            trace_extrapolate(3, PerturbationSpec.ray(0), 3.4, schedule=[0.1])
        with self.assertRaises(ErrInvalidParameter):
            trace_extrapolate(3, PerturbationSpec.ray(0), 3.4, schedule=[0.1, 0.0])


class TestIds(unittest.TestCase):
    """经验态密度测试类"""

    def test_partition_function(self):
        """测试有限体积配分函数"""
        value = partition_function(np.array([1.0, 3.0]), None, 3.0, 1.0)
        self.assertAlmostEqual(value, (math.exp(-2.0) + 1.0) / 2.0, places=15)
        self.assertAlmostEqual(partition_function(np.array([1.0, 3.0]), np.array([3, 1]), 3.0, 0.0), 1.0, places=15)
        with self.assertRaises(ErrInvalidParameter):
            partition_function(np.array([1.0]), None, 3.0, -1.0)

    def test_kolmogorov_distance(self):
        """测试经验分布之间的上确界距离"""
        self.assertEqual(kolmogorov_distance(np.array([0.0, 1.0]), np.array([0.0, 1.0])), 0.0)
        self.assertAlmostEqual(kolmogorov_distance(np.array([0.0, 1.0]), np.array([0.0, 2.0])), 0.5, places=15)
        self.assertAlmostEqual(
            kolmogorov_distance(np.array([0.0, 1.0]), np.array([0.0, 1.0]), None, np.array([3, 1])), 0.25, places=15
        )

    def test_phi_finite_ball(self):
        """测试 n=9 球上的 Φ_9 与级数的偏差"""
        curve = ids_empirical(3, 9, betas=(0.0, 1.0))
        phi = dict(curve.phi_table)
        self.assertAlmostEqual(phi[0.0], 1.0, places=12)
        self.assertAlmostEqual(phi[1.0], 0.14128, delta=5e-5)
        self.assertEqual(curve.n_ball, 9)

    def test_step_function(self):
        """测试积分态密度是右连续阶梯函数"""
        curve = ids_empirical(3, 6, betas=(1.0,))
        self.assertEqual(float(curve.F(-1.0)), 0.0)
        self.assertAlmostEqual(float(curve.F(curve.grid[-1])), 1.0, places=12)
        values = curve.F(curve.grid)
        self.assertTrue(np.all(np.diff(values) > 0.0))
        self.assertEqual(int(curve.weights.sum()), build_ball(3, 6).vertex_count)

    def test_rank_bound(self):
        """测试扰动前后经验分布的距离不超过扰动秩/|V|"""
        ball = build_ball(3, 9)
        pert = PerturbationSpec.segment(9)
        ids, _ = perturbed_vertices(ball, pert)
        eigs_pert, _ = ball_eigenvalues(3, 9, pert)
        eigs_free, mult = ball_eigenvalues(3, 9, None)
        distance = kolmogorov_distance(np.round(eigs_pert, 9), np.round(eigs_free, 9), None, mult)
        self.assertLessEqual(distance, ids.size / ball.vertex_count + 1e-12)
        self.assertLessEqual(distance, 19 / 1534 + 1e-12)

    def test_pf_deviation_decreases(self):
        """测试固定窗口内有限体积 PF 向量逼近闭式剖面"""
        deviations = []
        for n in (6, 8, 10):
            ball = build_ball(3, n)
            pert = PerturbationSpec.segment(n)
            vector = top_eigenpair(assemble_adjacency(ball, pert)).top_eigenvector
            deviations.append(pf_deviation(ball, vector, pf_profile(ball, pert), 3))
        self.assertTrue(deviations[0] > deviations[1] > deviations[2])

    def test_pf_deviation_shapes(self):
        """测试向量必须定义在球上"""
        ball = build_ball(3, 2)
        with self.assertRaises(ErrInvalidParameter):
            pf_deviation(ball, np.ones(3), np.ones(3), 1)
        with self.assertRaises(ErrInvalidParameter):
            pf_deviation(ball, np.ones(10), np.ones(10), -1)


if __name__ == "__main__":
    unittest.main()
