# tests/test_infrastructure.py
import json

import pytest
import structlog

from config.settings import Settings
from infrastructure.files import write_text_atomic
from infrastructure.logger import setup_logging
from infrastructure.workers import resolve_threads, row_chunks, run_partitioned


@pytest.mark.parametrize("rows, threads", [(28, 1), (28, 4), (28, 28), (3, 8), (1, 4), (100, 7)])
def test_row_chunks_cover_rows_in_order(rows, threads):
    chunks = row_chunks(rows, threads)

    assert chunks[0][0] == 0 and chunks[-1][1] == rows
    assert all(a[1] == b[0] for a, b in zip(chunks, chunks[1:]))
    assert len(chunks) <= threads


def test_run_partitioned_keeps_row_order():
    parts = run_partitioned(lambda start, stop: list(range(start, stop)), 50, threads=6)
    assert [row for part in parts for row in part] == list(range(50))


def test_resolve_threads():
    assert resolve_threads(0) == 1
    assert resolve_threads(3) == 3


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("ECM_THREADS", "8")
    monkeypatch.setenv("ECM_DEPTH_COUNT", "12")
    settings = Settings()

    assert settings.threads == 8
    assert settings.anchor_range == (1.0, 60.0, 12)
    assert settings.grid == (28, 50)


def test_settings_reject_bad_values(monkeypatch):
    monkeypatch.setenv("ECM_THREADS", "0")
    with pytest.raises(ValueError):
        Settings()


def test_json_logging_goes_to_stderr(capsys):
    setup_logging("INFO", json=True)
    try:
        structlog.get_logger("ecm.test").info("sample_event", value=3)
        captured = capsys.readouterr()
    finally:
        setup_logging("WARNING")

    assert captured.out == ""
    record = json.loads(captured.err.strip().splitlines()[-1])
    assert record["event"] == "sample_event" and record["value"] == 3


def test_atomic_write_replaces_file(tmp_path):
    path = tmp_path / "nested" / "report.txt"
    write_text_atomic(path, "old")
    write_text_atomic(path, "new")

    assert path.read_text() == "new"
    assert [p.name for p in path.parent.iterdir()] == ["report.txt"]
