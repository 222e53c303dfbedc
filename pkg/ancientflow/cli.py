"""
ancientflow 명령행 인터페이스

    ancientflow <kind>|all --config FILE [--out DIR] [--log-level LEVEL]
"""

import argparse
import asyncio
import sys
from typing import List, Optional

from loguru import logger

from ancientflow.config import settings
from ancientflow.exceptions import ConfigError
from ancientflow.models.report_models import ExperimentKind
from ancientflow.services.config_parser import load_config
from ancientflow.services.experiment_runner import ExperimentRunner
from ancientflow.services.report_writer import emit_run_summary
from ancientflow.utils.logger import setup_logging

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_CONFIG_ERROR = 2

ALL_COMMAND = "all"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ancientflow", description="구면 위 고대 리치 흐름 수치 실험")
    parser.add_argument(
        "command",
        choices=[kind.value for kind in ExperimentKind] + [ALL_COMMAND],
        help="실행할 실험 종류 (all: 설정 파일의 모든 섹션)",
    )
    parser.add_argument("--config", required=True, help="실험 설정 INI 파일")
    parser.add_argument("--out", default=settings.output_dir, help=f"CSV 출력 디렉터리 (기본값: {settings.output_dir})")
    parser.add_argument("--log-level", default=settings.log_level, help="로그 레벨")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """메인 함수 (종료 코드 반환)"""
    args = build_parser().parse_args(argv)

    # 로깅 설정
    setup_logging(level=args.log_level.upper())

    try:
        specs = load_config(args.config)
    except ConfigError as e:
        logger.error(f"설정 파일을 읽을 수 없습니다: {e}")
        return EXIT_CONFIG_ERROR
    except OSError as e:
        logger.error(f"설정 파일을 열 수 없습니다 - 경로: {args.config}, 에러: {e}")
        return EXIT_CONFIG_ERROR

    if args.command != ALL_COMMAND:
        specs = [spec for spec in specs if spec.kind.value == args.command]
    if not specs:
        logger.warning(f"실행할 실험이 없습니다 - 명령: {args.command}, 설정: {args.config}")
        return EXIT_PASSED

    runner = ExperimentRunner(output_dir=args.out)
    try:
        records = asyncio.run(runner.run_all(specs))
    except KeyboardInterrupt:
        logger.info("사용자에 의해 중단되었습니다.")
        return EXIT_FAILED

    print(emit_run_summary(records))
    return EXIT_PASSED if all(record.passed for record in records) else EXIT_FAILED


def run():
    """콘솔 스크립트 진입점"""
    sys.exit(main())


if __name__ == "__main__":
    run()
