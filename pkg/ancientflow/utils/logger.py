"""
로깅 설정 및 관리
"""

import sys
from pathlib import Path
from typing import Optional

from loguru import logger

from ancientflow.config import settings

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}"


def _bound_name(record) -> str:
    return str(record["extra"].get("name", record["name"]))


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None):
    """로깅 싱크 구성 (CLI 진입점에서 한 번 호출)"""
    level = level or settings.log_level
    log_file = log_file or settings.log_file

    log_dir = Path(settings.log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    Path(log_file).parent.mkdir(parents=True, exist_ok=True)

    # 기본 로거 제거
    logger.remove()

    # 콘솔 로거 추가
    logger.add(sys.stdout, format=CONSOLE_FORMAT, level=level, colorize=True)

    # 파일 로거 추가
    logger.add(
        log_file,
        format=FILE_FORMAT,
        level=level,
        rotation="1 day",
        retention="30 days",
        compression="zip",
    )

    # 에러 로그 파일 추가
    logger.add(
        log_dir / "error.log",
        format=FILE_FORMAT,
        level="ERROR",
        rotation="1 day",
        retention="90 days",
        compression="zip",
    )

    # 실험 로그 파일 추가
    logger.add(
        log_dir / "experiment.log",
        format=FILE_FORMAT,
        level="INFO",
        filter=lambda record: "experiment" in _bound_name(record).lower(),
        rotation="1 day",
        retention="30 days",
        compression="zip",
    )

    logger.info(f"로깅 시스템이 초기화되었습니다. 레벨: {level}, 파일: {log_file}")


def get_logger(name: str):
    """특정 이름의 로거 반환"""
    return logger.bind(name=name)


def log_experiment(name: str, kind: str, passed: bool, **kwargs):
    """실험 결과 로그 기록"""
    experiment_logger = get_logger("experiment")
    verdict = "통과" if passed else "실패"
    experiment_logger.info(f"실험 완료 - 이름: {name}, 종류: {kind}, 판정: {verdict}, 추가정보: {kwargs}")


def log_bound_report(report):
    """한 관측 시점의 경계량 요약 기록"""
    monitor_logger = get_logger("diagnostics")
    monitor_logger.debug(
        f"경계량 - t={report.t:.6g}, lemma1={report.lemma1_sup:.4g}, cor4={report.cor4_sup:.4g}, "
        f"cor5={report.cor5_sup:.4g}, H={report.h_sup:.3g}, R=[{report.r_min:.4g}, {report.r_max:.4g}], "
        f"면적={report.area:.8g}"
    )


def log_error(error: Exception, context: str = ""):
    """에러 로그 기록"""
    error_logger = get_logger("error")
    error_logger.error(f"에러 발생 - 컨텍스트: {context}, 에러: {str(error)}")


def log_performance(operation: str, duration: float, **kwargs):
    """성능 로그 기록"""
    perf_logger = get_logger("performance")
    perf_logger.info(f"성능 측정 - 작업: {operation}, 소요시간: {duration:.3f}초, 추가정보: {kwargs}")
