# cli_app/main.py
"""
glassnerf 명령행 진입점.
하위 명령: generate, train, render, eval, extract-glass
종료 코드: 0 성공, 2 입력 오류, 3 체크포인트 오류, 4 수치 오류
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

# 프로젝트 루트 경로 추가
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cli_app.commands import eval as eval_command
from cli_app.commands import extract_glass, generate, render, train
from src.utils.config import load_env
from src.utils.errors import CheckpointError, InputError, NonFiniteLossError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_STATE = 3
EXIT_NUMERIC = 4

COMMANDS = {
    "generate": generate,
    "train": train,
    "render": render,
    "eval": eval_command,
    "extract-glass": extract_glass,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glassnerf", description="유리 인식 NeRF 학습/평가 도구")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="로그 상세도 (-v INFO, -vv DEBUG)")
    parser.add_argument("--env-file", default=None, help=".env 파일 경로")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, module in COMMANDS.items():
        module.add_parser(subparsers, name)
    return parser


def setup_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    try:
        load_env(args.env_file)
        return COMMANDS[args.command].run(args) or EXIT_OK
    except NonFiniteLossError as e:
        print(f"❌ 수치 오류: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except CheckpointError as e:
        print(f"❌ 체크포인트 오류: {e}", file=sys.stderr)
        return EXIT_STATE
    except (InputError, OSError) as e:
        print(f"❌ 입력 오류: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
