"""
CSV 및 판정표 출력 테스트
"""

import pandas as pd
import pytest

from ancientflow.config import CSV_COLUMNS
from ancientflow.exceptions import ReportIOError
from ancientflow.models.report_models import BoundReport, ExperimentKind, ExperimentSpec, RunRecord
from ancientflow.services.diagnostics import bound_report
from ancientflow.services.report_writer import emit_csv, emit_run_summary, emit_summary, load_records, records_frame


@pytest.fixture
def record(constant_state):
    spec = ExperimentSpec(name="demo", kind=ExperimentKind.BOUNDS_SWEEP, grid=(16, 1))
    record = RunRecord(spec=spec, reports=[bound_report(constant_state)])
    record.reports.append(BoundReport(*([-0.5] + [1.0 / 3.0] * 13)))
    record.summary['l1_final'] = 0.1
    record.record("finite_t-1", True)
    record.record("cor5_sup_uniform", True, 0.0, 0.0)
    return record


def test_records_frame_columns(record):
    frame = records_frame(record.reports)
    assert list(frame.columns) == list(CSV_COLUMNS)
    assert len(frame) == 2


def test_csv_round_trip_is_exact(record, tmp_path):
    path = emit_csv(record, str(tmp_path / "nested" / "demo.csv"))
    assert path.exists()
    assert load_records(str(path)) == record.reports
    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)


def test_csv_with_no_reports_has_header_only(record, tmp_path):
    empty = RunRecord(spec=record.spec)
    path = emit_csv(empty, str(tmp_path / "empty.csv"))
    assert path.read_text(encoding="utf-8") == ",".join(CSV_COLUMNS) + "\n"
    assert load_records(str(path)) == []


def test_emit_csv_reports_path_on_failure(record, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x", encoding="utf-8")
    with pytest.raises(ReportIOError) as error:
        emit_csv(record, str(blocker / "demo.csv"))
    assert error.value.path == str(blocker / "demo.csv")


def test_load_records_errors(tmp_path):
    with pytest.raises(ReportIOError):
        load_records(str(tmp_path / "missing.csv"))
    partial = tmp_path / "partial.csv"
    pd.DataFrame({'t': [-1.0], 'area': [1.0]}).to_csv(partial, index=False)
    with pytest.raises(ReportIOError):
        load_records(str(partial))


def test_emit_summary(record):
    text = emit_summary(record)
    lines = text.splitlines()
    assert lines[0] == "-" * 78
    assert lines[1].startswith("demo [bounds-sweep] PASS")
    assert any(line.startswith("finite_t-1") and " pass " in line for line in lines)
    assert "  l1_final = 0.10000000000000001" in lines


def test_emit_summary_marks_failures(record):
    record.record("completed", False, detail="양수성 상실")
    text = emit_summary(record)
    assert "demo [bounds-sweep] FAIL" in text
    assert any(line.startswith("completed") and "FAIL" in line for line in text.splitlines())
    assert "    양수성 상실" in text.splitlines()


def test_emit_run_summary_counts(record):
    failed = RunRecord(spec=record.spec)
    text = emit_run_summary([record, failed])
    assert text.splitlines()[-1] == "total 2 experiments, 1 passed, 1 failed"
