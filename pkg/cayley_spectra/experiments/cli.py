"""
命令行子命令：norm、pf、classify、ids、critical-density、report 与 schema

退出码：0 表示所有检查通过（或只有判定输出），1 表示数值与闭式不一致或迭代未收敛，
2 表示参数错误。
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, List, Optional

from .. import __version__
from ..errors import (
    ErrCapacity,
    ErrCayleySpectra,
    ErrConvergence,
    ErrDomain,
    ErrInvalidParameter,
    ErrNoHiddenSpectrum,
)
from ..options import Options
from .commands import (
    DEFAULT_BETAS,
    ExperimentResult,
    cmd_classify,
    cmd_critical_density,
    cmd_ids,
    cmd_norm,
    cmd_pf,
    family_spec,
)
from .report import report_json, report_schema, write_csv, write_report
from .suite import cmd_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DISCREPANCY = 1
EXIT_USAGE = 2

PERTURBATIONS = ["root-loops", "segment", "ray", "subtree"]


def _json_print(payload: Any) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--Q", type=int, default=3, help="树的度")
    common.add_argument("--q", type=int, default=3, help="子树扰动的度")
    common.add_argument("--pert", choices=PERTURBATIONS, default="segment", help="扰动族")
    common.add_argument("--k", type=int, default=1, help="根上自环数")
    common.add_argument("--n", type=int, default=None, help="最大球半径")
    common.add_argument("--lambda-grid", type=float, nargs="+", default=None, help="λ-λ* 的偏移序列")
    common.add_argument("--beta", type=float, nargs="+", default=None, help="逆温度")
    common.add_argument("--out", type=str, default=None, help="输出目录")
    common.add_argument("--threads", type=int, default=None, help="并行线程数，默认读 CAYLEY_SPECTRA_THREADS")
    common.add_argument("--fast", action="store_true", help="跳过半径大于 8 的球")
    common.add_argument("--seedless", action="store_true", help="运行时间记为 0，输出可逐字节复现")
    common.add_argument("--json", action="store_true", help="把报告打印到标准输出")
    common.add_argument("--verbose", action="store_true", help="输出调试日志")
    return common


def register_commands(sub: argparse._SubParsersAction) -> None:
    """在已有的子命令组上注册实验子命令"""
    common = _common_flags()
    sub.add_parser("norm", parents=[common], help="扰动范数 λ* 与隐藏谱宽度")
    sub.add_parser("pf", parents=[common], help="PF 向量剖面")
    sub.add_parser("classify", parents=[common], help="常返/暂态判定")
    sub.add_parser("ids", parents=[common], help="积分态密度与配分函数")
    sub.add_parser("critical-density", parents=[common], help="临界密度 ρ_c(β)")
    sub.add_parser("report", parents=[common], help="运行完整验收套件")
    sub.add_parser("schema", parents=[common], help="打印报告的 JSON schema")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cayley-spectra",
        description="带自环扰动的 Cayley 树：闭式谱量与有限球数值的对照实验",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    register_commands(sub)
    return parser


def _options(args: argparse.Namespace) -> Options:
    if args.threads is not None:
        return Options.from_env(threads=args.threads)
    return Options.from_env()


def _max_radius(args: argparse.Namespace) -> Optional[int]:
    if args.fast:
        return 8 if args.n is None else min(args.n, 8)
    return args.n


def _emit(result: ExperimentResult, args: argparse.Namespace, options: Options) -> int:
    report = result.report
    if args.out is not None:
        write_report(report, os.path.join(args.out, f"{report.experiment}.json"), options)
        for name, frame in result.frames.items():
            write_csv(frame, os.path.join(args.out, report.tables[name]))
    if args.json:
        sys.stdout.write(report_json(report, options))
    else:
        for key, value in sorted(report.verdicts.items()):
            print(f"{key}: {value}")
        for key in sorted(report.numeric):
            closed = report.closed_form.get(key)
            suffix = "" if closed is None else f"  (closed form {closed!r}, rel. error {report.discrepancies[key]!r})"
            print(f"{key} = {report.numeric[key]!r}{suffix}")
        for key, ok in sorted(report.checks.items()):
            print(f"[{'PASS' if ok else 'FAIL'}] {key}")
    return result.exit_code


def _run_experiment(args: argparse.Namespace, options: Options) -> int:
    pert = family_spec(args.pert, k=args.k, q=args.q)
    n = _max_radius(args)
    if args.command == "norm":
        radii = None if n is None else [r for r in (n - 6, n - 4, n - 2, n) if r >= 1]
        result = cmd_norm(args.Q, pert, radii=radii, options=options, seedless=args.seedless)
    elif args.command == "pf":
        result = cmd_pf(args.Q, pert, n=n, options=options, seedless=args.seedless)
    elif args.command == "classify":
        result = cmd_classify(args.Q, pert, schedule=args.lambda_grid, options=options, seedless=args.seedless)
    elif args.command == "ids":
        betas = DEFAULT_BETAS if args.beta is None else args.beta
        result = cmd_ids(args.Q, n=n, pert=pert, betas=betas, options=options, seedless=args.seedless)
    else:
        beta = 1.0 if args.beta is None else args.beta[0]
        result = cmd_critical_density(args.Q, pert, beta=beta, n=n, options=options, seedless=args.seedless)
    return _emit(result, args, options)


def handle(args: argparse.Namespace) -> int:
    """执行一个子命令，返回退出码"""
    try:
        options = _options(args)
        if args.command == "schema":
            _json_print(report_schema())
            return EXIT_OK
        if args.command == "report":
            bundle, _ = cmd_report(options, fast=args.fast, out=args.out, seedless=args.seedless)
            if args.json:
                sys.stdout.write(report_json(bundle, options))
            else:
                for name, criterion in bundle.criteria.items():
                    print(f"{name}: {criterion.status}")
            return EXIT_OK if bundle.passed else EXIT_DISCREPANCY
        return _run_experiment(args, options)
    except (ErrInvalidParameter, ErrDomain, ErrCapacity) as e:
        logger.error(f"usage error: {e.message}")
        return EXIT_USAGE
    except ErrNoHiddenSpectrum as e:
        logger.error(f"no hidden spectrum: {e.message}")
        return EXIT_USAGE
    except ErrConvergence as e:
        logger.error(f"no convergence: {e.message}")
        return EXIT_DISCREPANCY
    except ErrCayleySpectra as e:
        # 其余库内异常统一按参数错误退出
        logger.error(f"{type(e).__name__}: {e.message}")
        return EXIT_USAGE


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    )
    return handle(args)


if __name__ == "__main__":
    sys.exit(main())
