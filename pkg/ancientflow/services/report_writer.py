"""
실행 기록 출력: BoundReport CSV 와 고정 형식 판정표
"""

from pathlib import Path
from typing import Iterable, List

import pandas as pd

from ancientflow.config import CSV_COLUMNS, CSV_FLOAT_FORMAT
from ancientflow.exceptions import ReportIOError
from ancientflow.models.report_models import BoundReport, RunRecord
from ancientflow.utils.logger import get_logger

_logger = get_logger("report_writer")

SUMMARY_RULE = "-" * 78


def records_frame(reports: Iterable[BoundReport]) -> pd.DataFrame:
    return pd.DataFrame([report.to_row() for report in reports], columns=CSV_COLUMNS, dtype=float)


def emit_csv(record: RunRecord, path: str) -> Path:
    """BoundReport 행을 17 유효숫자로 기록 (행이 없으면 헤더만)"""
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        records_frame(record.reports).to_csv(target, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        _logger.error(f"CSV 기록 실패 - 경로: {target}, 에러: {e}")
        raise ReportIOError(str(target), e)
    _logger.info(f"CSV 기록 완료 - 경로: {target}, 행 수: {len(record.reports)}")
    return target


def load_records(path: str) -> List[BoundReport]:
    """emit_csv 로 기록한 파일을 BoundReport 목록으로 복원"""
    try:
        frame = pd.read_csv(path, dtype=float, float_precision="round_trip")
    except OSError as e:
        raise ReportIOError(str(path), e)
    missing = [name for name in CSV_COLUMNS if name not in frame.columns]
    if missing:
        raise ReportIOError(str(path), ValueError(f"누락된 열: {missing}"))
    return [BoundReport.from_row(row) for row in frame.to_dict(orient="records")]


def _format_number(value: float) -> str:
    return "-" if value != value else f"{value:.6g}"


def emit_summary(record: RunRecord) -> str:
    """실험 한 건의 판정표"""
    spec = record.spec
    verdict = "PASS" if record.passed else "FAIL"
    lines = [
        SUMMARY_RULE,
        f"{spec.name} [{spec.kind.value}] {verdict}  ({record.wall_clock:.2f}s)",
        SUMMARY_RULE,
        f"{'assertion':<36} {'result':<6} {'value':>16} {'threshold':>16}",
    ]
    for item in record.assertions:
        result = "pass" if item.passed else "FAIL"
        lines.append(
            f"{item.name:<36} {result:<6} {_format_number(item.value):>16} {_format_number(item.threshold):>16}"
        )
        if item.detail and not item.passed:
            lines.append(f"    {item.detail}")
    for key, value in record.summary.items():
        lines.append(f"  {key} = {value:.17g}")
    return "\n".join(lines)


def emit_run_summary(records: Iterable[RunRecord]) -> str:
    """여러 실험 판정표를 섹션 순서대로 연결"""
    records = list(records)
    passed = sum(1 for record in records if record.passed)
    tables = [emit_summary(record) for record in records]
    tables.append(SUMMARY_RULE)
    tables.append(f"total {len(records)} experiments, {passed} passed, {len(records) - passed} failed")
    return "\n".join(tables)
