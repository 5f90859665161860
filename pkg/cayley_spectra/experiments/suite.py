"""
验收套件：把各项实验并行跑完，按验收标准汇总成一份报告
"""

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import mpmath
import numpy as np

from .. import __version__
from ..kernel.norms import fixed_point_a, min_loops_for_hidden_spectrum, poisson_norm, t_aq_norm
from ..kernel.params import edge_norm, spectral_params, walk_kernel
from ..kernel.recursions import finite_recursion_ray, fixed_point_residual_subtree
from ..numerics.eigen import ball_spectrum_blocks, full_spectrum, top_eigenpair
from ..numerics.resolvent import resolvent_solve
from ..options import Options, resolve
from ..secular.solver import (
    NoRoot,
    SecularRoot,
    q_threshold,
    solve_secular_bisection,
    solve_secular_closed,
    solve_secular_fixed_point,
)
from ..tree.adjacency import assemble_adjacency
from ..tree.ball import build_ball
from ..tree.perturbation import PerturbationSpec
from ..utils.file import ensure_dir
from .commands import (
    ExperimentResult,
    cmd_classify,
    cmd_critical_density,
    cmd_ids,
    cmd_norm,
    cmd_pf,
    elapsed_ms,
    finish_report,
)
from .report import CriterionStatus, ReportBuilder, ReportBundle, write_csv, write_report

logger = logging.getLogger(__name__)

# fast 模式下允许的最大球半径
FAST_RADIUS = 8

# 已知的最少自环数
EXPECTED_MIN_LOOPS = {3: 1, 4: 2, 5: 2, 6: 2, 7: 3}

# 已知的子树阈值 Q(q)
EXPECTED_Q_THRESHOLD = {2: 7, 3: 11}


def check_thresholds(options: Optional[Options] = None, seedless: bool = False) -> ExperimentResult:
    """最少自环数与子树阈值，并用截断二分验证阈值两侧的可行性"""
    opts = resolve(options)
    started = time.perf_counter()
    builder = ReportBuilder("thresholds", {"Q": sorted(EXPECTED_MIN_LOOPS), "q": sorted(EXPECTED_Q_THRESHOLD)})

    for Q, expected in EXPECTED_MIN_LOOPS.items():
        k = min_loops_for_hidden_spectrum(Q)
        builder.check(f"min_loops_Q{Q}", k == expected)
        feasible = isinstance(solve_secular_bisection(Q, PerturbationSpec.root_loops(k), opts), SecularRoot)
        if k > 1:
            below = solve_secular_bisection(Q, PerturbationSpec.root_loops(k - 1), opts)
            feasible = feasible and isinstance(below, NoRoot)
        builder.check(f"loops_feasibility_Q{Q}", feasible)

    for q, expected in EXPECTED_Q_THRESHOLD.items():
        threshold = q_threshold(q)
        builder.check(f"q_threshold_q{q}", threshold == expected)
        pert = PerturbationSpec.subtree(q, 0)
        at = solve_secular_bisection(threshold, pert, opts)
        above = solve_secular_bisection(threshold + 1, pert, opts)
        builder.check(f"threshold_feasibility_q{q}", isinstance(at, SecularRoot) and isinstance(above, NoRoot))
    return finish_report(builder, started, seedless)


def check_kernel_identities(options: Optional[Options] = None, seedless: bool = False) -> ExperimentResult:
    """树预解式参数化的恒等式与子树不动点方程"""
    opts = resolve(options)
    started = time.perf_counter()
    pairs = [(3, 2), (4, 2), (4, 3), (5, 3)]
    builder = ReportBuilder("kernel-identities", {"Q": [3, 4], "pairs": [f"{Q},{q}" for Q, q in pairs]})

    distances = np.arange(0, 12)
    kernel_error = quadratic_error = 0.0
    for Q in (3, 4):
        edge = edge_norm(Q)
        for lam in np.linspace(edge + 1e-3, edge + 6.0, 100):
            p = spectral_params(Q, float(lam))
            expected = np.power(p.a, distances) / p.mu
            kernel_error = max(kernel_error, float(np.max(np.abs(walk_kernel(Q, distances, float(lam)) - expected))))
            quadratic_error = max(quadratic_error, abs(p.quadratic_residual()))
    builder.numeric["walk_kernel_error"] = kernel_error
    builder.numeric["quadratic_residual"] = quadratic_error
    builder.check("walk_kernel", kernel_error <= 1e-12)
    builder.check("quadratic_identity", quadratic_error <= 1e-12)

    norm_error = max(
        abs(t_aq_norm(2, float(a)) / poisson_norm(float(a)) - 1.0) for a in np.linspace(0.0, 0.9, 91)
    )
    builder.numeric["t_aq_poisson_error"] = norm_error
    builder.check("t_aq_reduces_to_poisson", norm_error <= 1e-14)

    for Q, q in pairs:
        closed = solve_secular_closed(Q, PerturbationSpec.subtree(q, 0), opts)
        fixed = solve_secular_fixed_point(Q, q, opts)
        if isinstance(closed, NoRoot) or isinstance(fixed, NoRoot):
            builder.check(f"fixed_point_Q{Q}_q{q}", False)
            continue
        rhs = 1.0 + 2.0 * math.sqrt(q - 1) + (Q - q) * closed.a_star
        builder.compare(f"lambda_star_Q{Q}_q{q}", fixed.lambda_star, closed.lambda_star)
        builder.check(f"fixed_point_Q{Q}_q{q}", abs(closed.lambda_star - rhs) <= 1e-10
                      and abs(fixed.lambda_star - closed.lambda_star) <= 1e-10)
    return finish_report(builder, started, seedless)


def check_recursions(options: Optional[Options] = None, seedless: bool = False) -> ExperimentResult:
    """PF 递推在不动点处的闭式解"""
    started = time.perf_counter()
    depth = 50
    builder = ReportBuilder("recursions", {"Q": 3, "depth": depth, "subtree": "Q=4,q=3", "n_max": 100})

    # 前向递推逼近衰减解，双精度误差按 a^{-2k} 放大
    with mpmath.workdps(80):
        Q = 3
        sqrt5 = mpmath.sqrt(5)
        lam = (3 - sqrt5) * Q / 2 + sqrt5
        a = 2 / (lam + mpmath.sqrt(lam * lam - 4 * (Q - 1)))
        Lambda = (1 + a) / (1 - a)
        sigma = finite_recursion_ray(Q, lam, Lambda, depth)
        error = max(abs(s - a ** k * ((1 - a) * k + 1)) for k, s in enumerate(sigma))
    builder.numeric["ray_fixed_point_error"] = float(error)
    builder.check("ray_fixed_point", float(error) <= 1e-8)

    residual = fixed_point_residual_subtree(3, fixed_point_a(3), 100)
    builder.numeric["subtree_fixed_point_residual"] = residual
    builder.check("subtree_fixed_point", residual <= 1e-10)
    return finish_report(builder, started, seedless)


def check_oracles(options: Optional[Options] = None, seedless: bool = False) -> ExperimentResult:
    """数值对照本身的正确性：迹恒等式、分块谱、CG 残差与嵌入无关性"""
    opts = resolve(options)
    started = time.perf_counter()
    builder = ReportBuilder("oracle-integrity", {"Q": 3, "n_dense": 6, "n_cg": 10})

    ball = build_ball(3, 6, opts)
    adj = assemble_adjacency(ball, PerturbationSpec.segment(6))
    eigs = full_spectrum(adj, opts)
    diag = adj.diagonal().astype(np.float64)
    builder.compare("trace_A", float(np.sum(eigs)), float(np.sum(diag)))
    builder.compare("trace_A2", float(np.sum(eigs ** 2)), float(2 * adj.edge_count + np.sum(diag ** 2)))
    builder.check("trace_identities", abs(np.sum(eigs) - np.sum(diag)) <= 1e-10
                  and builder.discrepancies["trace_A2"] <= 1e-10)

    free = full_spectrum(assemble_adjacency(ball), opts)
    blocks, mult = ball_spectrum_blocks(3, 6, opts)
    block_error = float(np.max(np.abs(np.repeat(blocks, mult) - free)))
    builder.numeric["block_spectrum_error"] = block_error
    builder.check("block_spectrum", block_error <= 1e-10)

    closed = solve_secular_closed(3, PerturbationSpec.segment(0), opts)
    ball = build_ball(3, 10, opts)
    adj = assemble_adjacency(ball, PerturbationSpec.segment(10))
    lam = closed.lambda_star + 0.5
    x = resolvent_solve(adj, lam, 0, opts.with_changes(cg_rtol=1e-13), norm_bound=closed.lambda_star)
    rhs = np.zeros(adj.dimension)
    rhs[0] = 1.0
    residual = float(np.linalg.norm(lam * x - adj.as_float @ x - rhs))
    builder.numeric["cg_residual"] = residual
    builder.check("cg_residual", residual <= 1e-12)

    top = top_eigenpair(adj, options=opts).top_eigenvalue
    moved = top_eigenpair(assemble_adjacency(ball, PerturbationSpec.segment(10, embedding=1)), options=opts).top_eigenvalue
    builder.compare("embedding_independence", moved, top)
    builder.check("embedding_independence", abs(moved - top) <= 1e-10)
    return finish_report(builder, started, seedless)


@dataclass(frozen=True)
class SuiteJob:
    """验收套件中的一项实验"""

    criterion: str
    run: Callable[[], ExperimentResult]
    skipped: Tuple[str, ...] = ()  # fast 模式下略去的检查


def acceptance_jobs(options: Options, fast: bool = False, seedless: bool = False) -> List[SuiteJob]:
    """按验收标准组织的实验列表"""
    opts = options
    cap = FAST_RADIUS if fast else None
    segment = PerturbationSpec.segment(0)
    ray = PerturbationSpec.ray(0)
    subtree = PerturbationSpec.subtree(3, 0)

    def norm_segment():
        radii = [2, 4, 6, 8] if fast else [10, 12, 14, 16]
        return cmd_norm(3, segment, radii=radii, gap_tol=None if fast else 1e-2, options=opts, seedless=seedless)

    def norm_loops():
        return cmd_norm(3, PerturbationSpec.root_loops(1), radii=[2, 4, 6, 8],
                        reference=22.0 / (1.0 + 3.0 * math.sqrt(5.0)), options=opts, seedless=seedless)

    def norm_large_Q():
        return cmd_norm(8, segment, radii=[2, 3], options=opts, seedless=seedless)

    def pf(Q, pert):
        return lambda: cmd_pf(Q, pert, n=cap or 10, options=opts, seedless=seedless)

    def classify(Q, pert):
        return lambda: cmd_classify(Q, pert, options=opts, seedless=seedless)

    return [
        SuiteJob("norm_closed_forms", norm_segment, ("finite_volume_gap",) if fast else ()),
        SuiteJob("norm_closed_forms", norm_loops),
        SuiteJob("norm_closed_forms", norm_large_Q),
        SuiteJob("thresholds", lambda: check_thresholds(opts, seedless)),
        SuiteJob("pf_profiles", pf(3, segment), ("radius_10",) if fast else ()),
        SuiteJob("pf_profiles", pf(3, ray), ("radius_10",) if fast else ()),
        SuiteJob("pf_profiles", pf(4, subtree), ("radius_10",) if fast else ()),
        SuiteJob("recurrence", classify(3, segment)),
        SuiteJob("recurrence", classify(3, ray)),
        SuiteJob("recurrence", classify(4, subtree)),
        SuiteJob("kernel_identities", lambda: check_kernel_identities(opts, seedless)),
        SuiteJob("ids", lambda: cmd_ids(3, n=cap or 9, pert=segment, options=opts, seedless=seedless),
                 ("radius_9",) if fast else ()),
        SuiteJob("ids", lambda: cmd_critical_density(3, segment, beta=1.0, n=cap or 9, options=opts, seedless=seedless),
                 ("radius_9",) if fast else ()),
        SuiteJob("recursions", lambda: check_recursions(opts, seedless)),
        SuiteJob("oracle_integrity", lambda: check_oracles(opts, seedless)),
    ]


def _run_job(job: SuiteJob) -> ExperimentResult:
    logger.info(f"running {job.criterion} experiment")
    result = job.run()
    result.report.skipped.extend(s for s in job.skipped if s not in result.report.skipped)
    return result


def summarize(jobs: List[SuiteJob], results: List[ExperimentResult]) -> Dict[str, CriterionStatus]:
    """按验收标准汇总：有失败为 fail，否则有略去的检查为 skipped，其余为 pass"""
    grouped: Dict[str, List[ExperimentResult]] = {}
    for job, result in zip(jobs, results):
        grouped.setdefault(job.criterion, []).append(result)
    criteria = {}
    for name, members in grouped.items():
        failed = [f"{r.report.experiment}.{check}" for r in members for check, ok in r.report.checks.items() if not ok]
        if failed:
            status = "fail"
        elif any(r.report.skipped for r in members):
            status = "skipped"
        else:
            status = "pass"
        criteria[name] = CriterionStatus(
            status=status,
            experiments=[r.report.experiment for r in members],
            failed_checks=failed,
        )
    return criteria


def write_outputs(out_dir: str, results: List[ExperimentResult]) -> None:
    """把每个实验的 CSV 写入输出目录"""
    ensure_dir(out_dir)
    for result in results:
        for name, frame in result.frames.items():
            write_csv(frame, os.path.join(out_dir, result.report.tables[name]))


def cmd_report(
    options: Optional[Options] = None,
    fast: bool = False,
    out: Optional[str] = None,
    seedless: bool = False,
) -> Tuple[ReportBundle, List[ExperimentResult]]:
    """运行完整的验收套件

    各实验相互独立，在 options.threads 个线程中并行；结果按提交顺序汇总，
    与线程调度无关。

    Args:
        options: 配置
        fast: 跳过半径大于 8 的球，相关标准记为 skipped
        out: 输出目录，给出时写入 report.json 与各 CSV
        seedless: 运行时间记为 0

    Returns:
        (ReportBundle, 各实验结果)
    """
    opts = resolve(options)
    started = time.perf_counter()
    jobs = acceptance_jobs(opts, fast, seedless)
    with ThreadPoolExecutor(max_workers=opts.threads) as executor:
        futures = [executor.submit(_run_job, job) for job in jobs]
        results = [future.result() for future in futures]

    bundle = ReportBundle(
        version=__version__,
        threads=opts.threads,
        fast=fast,
        criteria=summarize(jobs, results),
        experiments=[r.report for r in results],
        runtime_ms=elapsed_ms(started, seedless),
    )
    if out is not None:
        write_outputs(out, results)
        write_report(bundle, os.path.join(out, "report.json"), opts)
    failed = [name for name, c in bundle.criteria.items() if c.status == "fail"]
    if failed:
        logger.warning(f"acceptance criteria failed: {failed}")
    return bundle, results
