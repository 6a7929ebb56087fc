"""
命令行主入口模块。

解析子命令，调用SuiteService完成计算。命令结果写到标准输出或报告文件，
日志写到标准错误。

退出码：0 通过，2 验证不通过，1 用法错误、规格文件错误或计算错误。
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from app.core.combinatorics import find_stable_s, monomial_count
from app.core.mapping import InfiniteFunction
from app.services.suite_service import OP_NAMES, VERIFY_NAMES, SuiteService
from app.utils.exceptions import AlgebroidError, UsageError
from app.utils.helpers import dumps_json, parse_complex_text
from app.utils.logger import get_logger
from config.settings import settings

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2


class _ArgumentParser(argparse.ArgumentParser):
    """参数错误时抛出UsageError而不是直接退出。"""

    def error(self, message: str):
        raise UsageError(message)


def _complex_arg(text: str) -> complex:
    try:
        return parse_complex_text(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"无法解析的复数: {text}") from e


def build_parser() -> argparse.ArgumentParser:
    """构造命令行解析器。"""
    parser = _ArgumentParser(prog="algebroid", description="代数体函数的值分布计算与验证")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("characteristic", help="计算 r, m, N, T, Nx 曲线")
    p.add_argument("spec")
    p.add_argument("--out", required=True, help="CSV输出路径")

    p = sub.add_parser("op", help="方程运算，输出新的规格文件")
    p.add_argument("operation", choices=OP_NAMES)
    p.add_argument("spec")
    p.add_argument("--map", dest="map_label", default=None, help="pushforward使用的映射标签")

    p = sub.add_parser("monodromy", help="绕临界点的单值化置换")
    p.add_argument("spec")
    p.add_argument("--center", required=True, type=_complex_arg, help="临界点，如 0 或 1+2i")
    p.add_argument("--radius", type=float, default=None, help="圆半径，省略时自动选择")

    p = sub.add_parser("count", help="单项式个数 #(s+1, A_q)")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--s", type=int, required=True)

    p = sub.add_parser("stable-s", help="使 #(s+1)/#(s) < 1+ε 的最小s")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)

    p = sub.add_parser("verify", help="运行一项验证并写出报告")
    p.add_argument("check", choices=VERIFY_NAMES)
    p.add_argument("spec")
    p.add_argument("--out-dir", default=settings.REPORT_DIR, help="报告目录")

    for name in ("characteristic", "op", "monodromy", "verify"):
        sub.choices[name].add_argument("--seed", type=int, default=None, help="覆盖规格文件中的种子")
    return parser


def _run(args: argparse.Namespace) -> int:
    if args.command == "count":
        if args.s < 1:
            raise UsageError(f"s必须≥1，收到: {args.s}")
        print(monomial_count(args.q, args.s + 1))
        return EXIT_OK
    if args.command == "stable-s":
        print(find_stable_s(args.q, args.epsilon))
        return EXIT_OK

    service = SuiteService.from_path(args.spec, seed=args.seed)

    if args.command == "characteristic":
        service.write_characteristic(args.out)
        return EXIT_OK

    if args.command == "op":
        result = service.run_op(args.operation, args.map_label)
        if isinstance(result, InfiniteFunction):
            print(dumps_json({"version": 1, "function": None, "infinite": True}))
        else:
            document = {
                "version": 1,
                "function": result.to_table(),
                "grid": service.spec.grid.model_dump(),
            }
            print(dumps_json(document))
        return EXIT_OK

    if args.command == "monodromy":
        perm = service.run_monodromy(args.center, args.radius)
        print(str(perm))
        return EXIT_OK

    if args.command == "verify":
        report = service.run_verify(args.check)
        service.write_report(report, args.out_dir)
        frame = report.to_frame()
        if not frame.empty:
            print(frame.to_string(index=False, float_format=lambda x: f"{x:.6g}"))
        print(f"{report.name}: {report.verdict}")
        return EXIT_OK if report.passed else EXIT_FAIL

    raise UsageError(f"未知的子命令: {args.command}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    命令行入口。

    Args:
        argv: 参数列表，默认取sys.argv[1:]

    Returns:
        退出码
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _run(args)
    except AlgebroidError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OverflowError as e:
        logger.error(f"数值溢出: {e}")
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
