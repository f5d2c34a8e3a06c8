"""
主程序入口文件
TAF 代数包络工作台的命令行前端

MIT License
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from dotenv import load_dotenv

# 加载 .env 文件
# 支持打包成exe后的路径：优先使用exe所在目录，否则使用脚本所在目录
if getattr(sys, "frozen", False):
    base_path = Path(sys.executable).parent
else:
    base_path = Path(__file__).parent
load_dotenv(base_path / ".env")

from src.config import get_settings  # noqa: E402
from src.errors import WorkbenchError  # noqa: E402
from src.logging_config import setup_logging  # noqa: E402
from src.utils import dump_to_file, echo, soft_exit  # noqa: E402
from src.workbench import COMMANDS, IDEAL_OPS, RunConfig, Workbench  # noqa: E402

EXIT_INTERNAL = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taf-workbench", description="强极大 TAF 代数的理想、包络与巢表示工作台"
    )
    parser.add_argument("command", choices=COMMANDS, help="要执行的命令")
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--presentation", help="表示文件（JSON）")
    source.add_argument("--fixture", help="样例名：ref2、std2、swap、t<n>、const-t<n>")
    parser.add_argument("--ideal", help="理想文件（生成元列表）")
    parser.add_argument("--ideal2", help="第二个理想文件（ideal-op）")
    parser.add_argument("--chain", help="链文件")
    parser.add_argument("--units", help="矩阵单位列表文件")
    parser.add_argument("--n", type=int, help="oracle 命令的 T_n 大小")
    parser.add_argument("--op", choices=IDEAL_OPS, help="ideal-op 的运算")
    parser.add_argument("--depth", type=int, help="工作深度 D")
    parser.add_argument("--horizon", type=int, help="视界 h")
    parser.add_argument("--method", help="判定方法：envelope 或 bruteforce")
    parser.add_argument("--rule", default="leftmost", choices=("leftmost", "rightmost"))
    parser.add_argument("--out", help="报告输出文件")
    parser.add_argument("--format", default="json", choices=("json", "text"))
    return parser


def main(argv=None) -> int:
    """
    运行一条命令并返回退出码

    0 肯定/成功，1 否定（附反例），2 视界内无法判定，3 输入错误，4 内部一致性错误
    """
    settings = get_settings()
    setup_logging(
        log_file=settings.log_file, level=logging.DEBUG if settings.debug else logging.INFO
    )
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(
            command=args.command,
            presentation=args.presentation,
            fixture=args.fixture,
            ideal=args.ideal,
            ideal2=args.ideal2,
            chain=args.chain,
            units=args.units,
            n=args.n,
            op=args.op,
            depth=args.depth,
            horizon=args.horizon,
            method=args.method,
            rule=args.rule,
            output=args.out,
            format=args.format,
        )
        result = Workbench(config, settings).run()
        document = {"command": args.command, "exit_code": result.exit_code, **result.report}
        if args.out:
            dump_to_file(document, args.out)
            echo.g(f"报告已写入 {args.out}")
        if args.format == "text":
            echo(result.render_text())
        elif not args.out:
            echo(json.dumps(document, ensure_ascii=False, indent=2, sort_keys=True))
        return result.exit_code
    except WorkbenchError as err:
        echo(err, file=sys.stderr)
        if settings.debug:
            raise
        if args.format == "json":
            echo(json.dumps({"command": args.command, "exit_code": err.code, **err.to_dict()}, ensure_ascii=False, indent=2, sort_keys=True))
        return err.code
    except KeyboardInterrupt:
        echo.y("\n用户取消操作")
        return 0
    except Exception as err:
        echo(f"\n{err.__class__.__name__}: {err}", file=sys.stderr)
        logging.getLogger(__name__).exception("未预期的错误")
        if settings.debug:
            raise
        return EXIT_INTERNAL


if __name__ == "__main__":
    soft_exit(main())
