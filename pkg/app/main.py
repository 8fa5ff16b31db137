"""
SQSum - 主程序入口
命令行：run / verify / efficiency / selftest
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import NoReturn, Optional, Sequence

from pydantic import ValidationError

from app.cli.commands import EXIT_USAGE, cmd_efficiency, cmd_run, cmd_selftest, cmd_verify
from app.cli.config import OutputFormat, resolve_run_config
from app.core.config import APP_NAME, DEFAULT_LOG_LEVEL, VERSION, get_settings
from app.core.exceptions import UsageError
from app.summation.adversaries import ADVERSARIES

logger = logging.getLogger(__name__)

RUN_FLAGS = ("n", "r", "d", "delta", "channel", "phase", "adversary", "target", "trials", "seed",
             "x", "y", "threshold", "workers", "output", "format", "transcript")


class ArgumentParser(argparse.ArgumentParser):
    """用法错误抛出 UsageError，由 main 统一映射为退出码 1"""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def setup_logging(level: str) -> None:
    """配置根日志记录器"""
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level)


def build_parser() -> ArgumentParser:
    settings = get_settings()
    parser = ArgumentParser(
        prog="sqsum",
        description=f"{APP_NAME} {VERSION} - 集体退相位信道上的两方半量子求和协议模拟器",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="输出 DEBUG 日志")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="执行单次协议运行或 Monte Carlo 实验")
    run.add_argument("--config", type=Path, help="JSON 配置文件")
    run.add_argument("--n", type=int, help="比特串长度")
    run.add_argument("--r", type=int, help="窃听检测预算")
    run.add_argument("--d", type=int, help="TP 诚实性检测预算")
    run.add_argument("--delta", type=float, help="冗余参数 δ")
    run.add_argument("--channel", choices=["noiseless", "dephasing"])
    run.add_argument("--phase", help="uniform 或固定相位（弧度）")
    run.add_argument("--adversary", choices=sorted(ADVERSARIES))
    run.add_argument("--target", choices=["alice", "bob"], help="Eve 攻击的用户")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int, help=f"随机种子（默认取 SQSUM_DEFAULT_SEED 或 {settings.default_seed}）")
    run.add_argument("--x", help="Alice 的比特串或 random")
    run.add_argument("--y", help="Bob 的比特串或 random")
    run.add_argument("--threshold", type=float, help="Step 3 容许的错误率")
    run.add_argument("--workers", type=int, help="并行进程数")
    run.add_argument("--output", type=Path, help="报告文件")
    run.add_argument("--format", choices=[f.value for f in OutputFormat])
    run.add_argument("--transcript", type=Path, help="记录文件（JSON Lines），仅适用于单次运行")

    verify = sub.add_parser("verify", help="代数恒等式、关系表和退相位不变性检查")
    verify.add_argument("--only", action="append", help="只运行指定检查（eq1..eq9, table1, dfs），可重复或用逗号分隔")

    efficiency = sub.add_parser("efficiency", help="量子比特效率对比")
    efficiency.add_argument("--r", type=int, default=1)
    efficiency.add_argument("--d", type=int, default=1)
    efficiency.add_argument("--delta", type=float, default=1.0)
    efficiency.add_argument("--table", action="store_true", help="同时打印定性对比表")

    selftest = sub.add_parser("selftest", help="核验套件加缩小规模的统计检查")
    selftest.add_argument("--seed", type=int, default=None)
    selftest.add_argument("--scale", type=float, default=1.0, help="Monte Carlo 规模系数")
    return parser


def _split_only(values: Optional[Sequence[str]]) -> Optional[list[str]]:
    if not values:
        return None
    return [name.strip() for value in values for name in value.split(",") if name.strip()]


def main(argv: Optional[Sequence[str]] = None) -> int:
    """命令行入口，返回退出码"""
    settings = get_settings()
    try:
        args = build_parser().parse_args(argv)
        setup_logging("DEBUG" if args.verbose else DEFAULT_LOG_LEVEL)

        if args.command == "run":
            flags = {name: getattr(args, name) for name in RUN_FLAGS}
            config = resolve_run_config(flags, args.config, settings)
            return cmd_run(config)
        if args.command == "verify":
            return cmd_verify(_split_only(args.only))
        if args.command == "efficiency":
            return cmd_efficiency(args.r, args.d, args.delta, table=args.table)
        seed = args.seed if args.seed is not None else settings.default_seed
        return cmd_selftest(seed, scale=args.scale)
    except UsageError as e:
        key = f" [key: {e.key}]" if e.key else ""
        print(f"usage error{key}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
