"""实验与命令行测试"""

import contextlib
import io
import json
import os
import shutil
import sys
import tempfile
import unittest
from unittest import mock

import pandas as pd
from pydantic import ValidationError

# 添加项目根目录到Python路径
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cayley_spectra.errors import ErrContractViolation, ErrInvalidParameter, ErrUnsupportedOperation
from cayley_spectra.experiments import (
    CriterionStatus,
    ExperimentReport,
    ExperimentResult,
    ReportBuilder,
    SuiteJob,
    acceptance_jobs,
    check_kernel_identities,
    check_recursions,
    cmd_classify,
    cmd_critical_density,
    cmd_ids,
    cmd_norm,
    cmd_pf,
    cmd_report,
    csv_text,
    default_radius,
    experiment_slug,
    family_spec,
    radius_schedule,
    report_json,
    report_schema,
    summarize,
    write_report,
)
from cayley_spectra.experiments.cli import EXIT_OK, EXIT_USAGE, main
from cayley_spectra.options import Options
from cayley_spectra.tree import PerturbationSpec
from cayley_spectra.utils import ensure_dir

SCHEMA_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "docs", "report.schema.json")


def _result(name, checks=None, skipped=()):
    builder = ReportBuilder(name, {"Q": 3})
    for check, ok in (checks or {}).items():
        builder.check(check, ok)
    for item in skipped:
        builder.skip(item)
    return ExperimentResult(builder.build(0))


class TestReport(unittest.TestCase):
    """报告模型测试类"""

    def test_missing_discrepancy(self):
        """测试有闭式的数值项必须带相对误差"""
        with self.assertRaises(ValidationError):
            ExperimentReport(experiment="x", params={}, numeric={"a": 1.0}, closed_form={"a": 1.0},
                             runtime_ms=0, version="0")

    def test_unknown_fields(self):
        """测试未知字段与非法取值被拒绝"""
        with self.assertRaises(ValidationError):
            ExperimentReport(experiment="x", params={}, runtime_ms=0, version="0", extra=1)
        with self.assertRaises(ValidationError):
            ExperimentReport(experiment="x", params={}, runtime_ms=-1, version="0")
        with self.assertRaises(ValidationError):
            CriterionStatus(status="maybe", experiments=[])

    def test_builder(self):
        """测试报告构造器记录比较结果与表格"""
        builder = ReportBuilder("norm_Q3_segment", {"Q": 3, "radii": [2, 4]})
        error = builder.compare("lambda_star", 3.0, 4.0)
        self.assertAlmostEqual(error, 0.25, places=15)
        builder.compare("diverging", float("inf"), 1.0)
        builder.table("approach", pd.DataFrame({"n": [2, 4]}))
        report = builder.build(12)
        self.assertEqual(report.tables, {"approach": "norm_Q3_segment_approach.csv"})
        self.assertIsNone(report.numeric["diverging"])
        self.assertIsNone(report.discrepancies["diverging"])
        self.assertTrue(report.passed)

    def test_json_deterministic(self):
        """测试 JSON 输出按键排序且可重复"""
        builder = ReportBuilder("x", {"b": 1, "a": 2.5})
        builder.check("ok", True)
        report = builder.build(0)
        text = report_json(report)
        self.assertEqual(text, report_json(report))
        self.assertTrue(text.endswith("\n"))
        payload = json.loads(text)
        self.assertEqual(list(payload), sorted(payload))
        self.assertEqual(ExperimentReport.model_validate(payload), report)

    def test_csv_text(self):
        """测试 CSV 输出可以读回"""
        frame = pd.DataFrame({"n": [2, 4], "gap": [0.1, 1.0 / 3.0]})
        text = csv_text(frame)
        self.assertTrue(text.startswith("n,gap\n"))
        back = pd.read_csv(io.StringIO(text))
        self.assertEqual(back["n"].tolist(), [2, 4])
        self.assertAlmostEqual(back["gap"].iloc[1], 1.0 / 3.0, places=11)

    def test_atomic_write(self):
        """测试原子写入不留下临时文件"""
        tmp = tempfile.mkdtemp()
        try:
            target = os.path.join(ensure_dir(os.path.join(tmp, "a", "b")), "report.json")
            write_report(_result("x").report, target)
            write_report(_result("y").report, target)
            self.assertEqual(os.listdir(os.path.dirname(target)), ["report.json"])
            with open(target, encoding="utf-8") as f:
                self.assertEqual(json.load(f)["experiment"], "y")
        finally:
            shutil.rmtree(tmp)

    def test_published_schema(self):
        """测试发布的 schema 与模型一致"""
        with open(SCHEMA_PATH, encoding="utf-8") as f:
            published = json.load(f)
        generated = report_schema()
        self.assertEqual(published["$id"], generated["$id"])
        self.assertEqual(set(published["required"]), set(generated["required"]))
        self.assertEqual(set(published["properties"]), set(generated["properties"]))
        for name in ("ExperimentReport", "CriterionStatus"):
            self.assertEqual(set(published["$defs"][name]["required"]), set(generated["$defs"][name]["required"]))
            self.assertEqual(set(published["$defs"][name]["properties"]), set(generated["$defs"][name]["properties"]))


class TestHelpers(unittest.TestCase):
    """实验辅助函数测试类"""

    def test_family_spec(self):
        """测试命令行扰动名称"""
        self.assertEqual(family_spec("root-loops", k=2).k, 2)
        self.assertEqual(family_spec("subtree", q=4).q, 4)
        with self.assertRaises(ErrInvalidParameter):
            family_spec("star")

    def test_slug(self):
        """测试实验标识"""
        self.assertEqual(experiment_slug("norm", 3, PerturbationSpec.segment(0)), "norm_Q3_segment")
        self.assertEqual(experiment_slug("pf", 4, PerturbationSpec.subtree(3, 0)), "pf_Q4_subtree-q3")
        self.assertEqual(experiment_slug("norm", 3, PerturbationSpec.root_loops(1)), "norm_Q3_root-loops-k1")
        self.assertEqual(experiment_slug("ids", 3, None), "ids_Q3")

    def test_radius_schedule(self):
        """测试半径序列"""
        self.assertEqual(radius_schedule(10, 3, minimum=2), [6, 8, 10])
        self.assertEqual(radius_schedule(9, 5, step=1), [5, 6, 7, 8, 9])
        self.assertEqual(radius_schedule(3, 3, minimum=2), [3])
        with self.assertRaises(ErrInvalidParameter):
            radius_schedule(1, 3, minimum=2)

    def test_default_radius(self):
        """测试顶点预算决定的默认半径"""
        self.assertEqual(default_radius(3, 16), 16)
        self.assertEqual(default_radius(8, 16), 6)
        self.assertEqual(default_radius(3, 9), 9)


class TestCommands(unittest.TestCase):
    """单项实验测试类"""

    def test_norm_root_loops(self):
        """测试根上一个自环的范数实验"""
        reference = 22.0 / (1.0 + 3.0 * 5.0 ** 0.5)
        result = cmd_norm(3, PerturbationSpec.root_loops(1), radii=[2, 4, 6], reference=reference, seedless=True)
        report = result.report
        self.assertTrue(report.passed, report.checks)
        self.assertTrue(report.checks["closed_form_exact"])
        self.assertTrue(report.checks["approach_monotone"])
        self.assertEqual(report.runtime_ms, 0)
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(len(result.frames["approach"]), 3)

    def test_norm_without_hidden_spectrum(self):
        """测试 Q=8 线段只给出判定"""
        report = cmd_norm(8, PerturbationSpec.segment(0), radii=[2]).report
        self.assertEqual(report.verdicts["hidden_spectrum"], "no hidden spectrum")
        self.assertEqual(report.checks, {"bisection_agrees": True})
        self.assertNotIn("lambda_star", report.numeric)

    def test_pf_segment(self):
        """测试线段 PF 剖面实验"""
        result = cmd_pf(3, PerturbationSpec.segment(0), n=8)
        report = result.report
        self.assertTrue(report.passed, report.checks)
        self.assertIn("off_chain_decay_ratio", report.numeric)
        self.assertEqual(result.frames["convergence"]["n"].tolist(), [4, 6, 8])
        self.assertIn("decay_ratio", result.frames["profile"].columns)

    def test_classify_ray(self):
        """测试射线扰动判定为暂态"""
        report = cmd_classify(3, PerturbationSpec.ray(0)).report
        self.assertEqual(report.verdicts["recurrence"], "transient")
        self.assertTrue(report.passed, report.checks)
        self.assertIn("transient_limit", report.discrepancies)
        self.assertIn("trace_truncation", report.verdicts)

    def test_classify_records_capped_traces(self):
        """测试截断上限处未收敛的迹记录在报告中"""
        options = Options(max_truncation_path=64)
        result = cmd_classify(3, PerturbationSpec.segment(0), schedule=[1e-5, 1e-6], options=options)
        self.assertEqual(result.report.verdicts["trace_truncation"], "capped for 2 of 2 offsets")
        self.assertEqual(result.frames["traces"]["converged"].tolist(), [False, False])
        self.assertTrue(result.report.params["check_converged"])

    def test_classify_no_hidden_spectrum(self):
        """测试没有隐藏谱时不做判定"""
        report = cmd_classify(8, PerturbationSpec.ray(0)).report
        self.assertEqual(report.verdicts["recurrence"], "not applicable")

    def test_ids(self):
        """测试积分态密度实验"""
        result = cmd_ids(3, n=8, pert=PerturbationSpec.segment(0), betas=(0.5,))
        report = result.report
        self.assertTrue(report.passed, report.checks)
        self.assertEqual(report.params["betas"], [0.0, 0.5, 1.0])
        self.assertEqual(sorted(result.frames), ["curve", "phi"])
        self.assertLessEqual(report.numeric["shifted_cdf_distance"], report.numeric["rank_bound"] + 1e-12)

    def test_ids_unsupported_degree(self):
        """测试 Q=2 时跳过级数比较"""
        report = cmd_ids(2, n=6).report
        self.assertIn("partition_series", report.skipped)
        self.assertIn("shifted_cdf", report.skipped)

    def test_critical_density_unknown(self):
        """测试没有隐藏谱时有限性记为 unknown"""
        report = cmd_critical_density(8, PerturbationSpec.segment(0), n=4).report
        self.assertEqual(report.verdicts["finiteness"], "unknown")
        self.assertEqual(report.closed_form["hidden_width"], 0.0)

    def test_critical_density_finite(self):
        """测试线段扰动的临界密度有限且随半径稳定"""
        report = cmd_critical_density(3, PerturbationSpec.segment(0), beta=1.0, n=9).report
        self.assertEqual(report.verdicts["finiteness"], "finite")
        self.assertTrue(report.passed, report.checks)
        with self.assertRaises(ErrInvalidParameter):
            cmd_critical_density(3, PerturbationSpec.segment(0), beta=0.0, n=4)


class TestSuite(unittest.TestCase):
    """验收套件测试类"""

    def test_summarize(self):
        """测试按标准汇总状态"""
        jobs = [SuiteJob("a", lambda: None), SuiteJob("a", lambda: None), SuiteJob("b", lambda: None),
                SuiteJob("c", lambda: None)]
        results = [
            _result("a1", {"x": True}),
            _result("a2", {"y": False}),
            _result("b1", {"x": True}, skipped=["radius_9"]),
            _result("c1", {"x": True}),
        ]
        criteria = summarize(jobs, results)
        self.assertEqual(criteria["a"].status, "fail")
        self.assertEqual(criteria["a"].failed_checks, ["a2.y"])
        self.assertEqual(criteria["a"].experiments, ["a1", "a2"])
        self.assertEqual(criteria["b"].status, "skipped")
        self.assertEqual(criteria["c"].status, "pass")

    def test_kernel_identities(self):
        """测试解析恒等式检查全部通过"""
        report = check_kernel_identities().report
        self.assertTrue(report.passed, report.checks)

    def test_recursions(self):
        """测试递推检查全部通过"""
        report = check_recursions().report
        self.assertTrue(report.passed, report.checks)

    def test_segment_gap_radius(self):
        """测试线段间隙在半径 16 上检查，fast 模式跳过"""
        with mock.patch("cayley_spectra.experiments.suite.cmd_norm") as norm:
            job = acceptance_jobs(Options(), fast=False)[0]
            job.run()
            self.assertEqual(norm.call_args.kwargs["radii"], [10, 12, 14, 16])
            self.assertEqual(norm.call_args.kwargs["gap_tol"], 1e-2)
            self.assertEqual(job.skipped, ())

            job = acceptance_jobs(Options(), fast=True)[0]
            job.run()
            self.assertEqual(norm.call_args.kwargs["radii"], [2, 4, 6, 8])
            self.assertIsNone(norm.call_args.kwargs["gap_tol"])
            self.assertEqual(job.skipped, ("finite_volume_gap",))

    def test_report_bundle(self):
        """测试套件并行运行并写出报告与表格"""
        reference = 22.0 / (1.0 + 3.0 * 5.0 ** 0.5)
        jobs = [
            SuiteJob("norm_closed_forms", lambda: cmd_norm(3, PerturbationSpec.root_loops(1), radii=[2, 4],
                                                           reference=reference, seedless=True)),
            SuiteJob("recursions", lambda: check_recursions(seedless=True), ("radius_9",)),
        ]
        out_dir = tempfile.mkdtemp()
        try:
            with mock.patch("cayley_spectra.experiments.suite.acceptance_jobs", return_value=jobs):
                bundle, results = cmd_report(Options(threads=2), out=out_dir, seedless=True)
            self.assertEqual(bundle.threads, 2)
            self.assertEqual(bundle.runtime_ms, 0)
            self.assertEqual(bundle.criteria["norm_closed_forms"].status, "pass")
            self.assertEqual(bundle.criteria["recursions"].status, "skipped")
            self.assertEqual([r.report.experiment for r in results], [e.experiment for e in bundle.experiments])
            self.assertIn("radius_9", bundle.experiments[1].skipped)

            with open(os.path.join(out_dir, "report.json"), encoding="utf-8") as f:
                self.assertEqual(set(json.load(f)["criteria"]), {"norm_closed_forms", "recursions"})
            for table in bundle.experiments[0].tables.values():
                self.assertTrue(os.path.exists(os.path.join(out_dir, table)))
        finally:
            shutil.rmtree(out_dir)


class TestCli(unittest.TestCase):
    """命令行测试类"""

    def _run(self, argv):
        buffer = io.StringIO()
        with contextlib.redirect_stdout(buffer):
            code = main(argv)
        return code, buffer.getvalue()

    def test_schema(self):
        """测试 schema 子命令"""
        code, out = self._run(["schema"])
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["title"], "ReportBundle")

    def test_norm_json(self):
        """测试没有隐藏谱时退出码为 0"""
        code, out = self._run(["norm", "--Q", "8", "--n", "3", "--json"])
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["verdicts"]["hidden_spectrum"], "no hidden spectrum")

    def test_text_summary(self):
        """测试文本摘要"""
        code, out = self._run(["norm", "--pert", "root-loops", "--n", "4"])
        self.assertEqual(code, EXIT_OK)
        self.assertIn("[PASS] bisection_agrees", out)

    def test_usage_errors(self):
        """测试非法参数的退出码"""
        code, _ = self._run(["norm", "--Q", "1"])
        self.assertEqual(code, EXIT_USAGE)
        code, _ = self._run(["critical-density", "--beta", "-1"])
        self.assertEqual(code, EXIT_USAGE)
        with self.assertRaises(SystemExit):
            self._run(["norm", "--pert", "star"])

    def test_library_errors_exit_cleanly(self):
        """测试其余库内异常返回参数错误退出码"""
        with mock.patch(
            "cayley_spectra.experiments.cli.cmd_ids",
            side_effect=ErrUnsupportedOperation("series needs q >= 3"),
        ):
            code, _ = self._run(["ids", "--Q", "3", "--n", "3"])
        self.assertEqual(code, EXIT_USAGE)
        with mock.patch(
            "cayley_spectra.experiments.cli.cmd_pf",
            side_effect=ErrContractViolation("vertex set is not connected"),
        ):
            code, _ = self._run(["pf", "--n", "3"])
        self.assertEqual(code, EXIT_USAGE)

    def test_seedless_output_is_reproducible(self):
        """测试 --seedless 输出逐字节相同"""
        dirs = [tempfile.mkdtemp(), tempfile.mkdtemp()]
        try:
            for d in dirs:
                code, _ = self._run(["norm", "--pert", "root-loops", "--n", "4", "--seedless", "--out", d])
                self.assertEqual(code, EXIT_OK)
            names = sorted(os.listdir(dirs[0]))
            self.assertEqual(names, ["norm_Q3_root-loops-k1.json", "norm_Q3_root-loops-k1_approach.csv"])
            self.assertEqual(names, sorted(os.listdir(dirs[1])))
            for name in names:
                with open(os.path.join(dirs[0], name), "rb") as a, open(os.path.join(dirs[1], name), "rb") as b:
                    self.assertEqual(a.read(), b.read())
        finally:
            for d in dirs:
                shutil.rmtree(d)


if __name__ == "__main__":
    unittest.main()
