import pandas as pd
import pytest
from openpyxl import load_workbook

from polybo.config import load_config
from polybo.errors import OutputDirectoryError
from polybo.experiment import SUMMARY_COLUMNS, ComparisonReport, aggregate, run_experiment
from polybo.exporter import ReportExporter, emit_report, read_curves, read_summary


@pytest.fixture(scope="module")
def report():
    config = load_config(
        overrides={
            "replicates": 2,
            "budget": 14,
            "rmse_grid": 50,
            "candidates_per_dimension": 50,
            "refine": False,
        },
        env={},
    )
    return run_experiment(config, write=False)


def test_empty_report_gives_header_only_csv(tmp_path):
    paths = emit_report(ComparisonReport(), "csv", tmp_path)
    assert paths["summary"].read_text().strip() == ",".join(SUMMARY_COLUMNS)
    assert read_summary(tmp_path).empty
    assert read_curves(tmp_path).empty


def test_single_run_gives_one_row_and_budget_curve_rows(report, tmp_path):
    single = ComparisonReport(config=report.config, runs=report.runs[:1])
    emit_report(single, "csv", tmp_path)
    assert len(read_summary(tmp_path / "summary.csv")) == 1
    assert len(read_curves(tmp_path)) == 14
    assert (tmp_path / "traces" / "run_0.csv").exists()


def test_csv_round_trip_preserves_aggregates(report, tmp_path):
    emit_report(report, "csv", tmp_path)
    parsed = read_summary(tmp_path)
    assert list(parsed.columns) == SUMMARY_COLUMNS
    expected = aggregate(report)
    recomputed = aggregate(parsed)
    pd.testing.assert_series_equal(recomputed["median"], expected["median"], rtol=1e-12, atol=1e-12)
    assert len(list((tmp_path / "traces").glob("run_*.csv"))) == len(report)


def test_jsonl_output_keeps_the_error_column(report, tmp_path):
    paths = emit_report(report, "jsonl", tmp_path)
    assert paths["summary"].name == "summary.jsonl"
    assert paths["curves"].name == "curves.jsonl"
    parsed = read_summary(tmp_path)
    assert "error" in parsed.columns
    assert len(parsed) == len(report)
    assert len(read_curves(tmp_path)) == 14 * len(report)


def test_xlsx_workbook(report, tmp_path):
    paths = emit_report(report, "xlsx", tmp_path)
    workbook = load_workbook(paths["summary"], read_only=True)
    assert workbook.sheetnames == ["Summary", "Curves", "Aggregates"]
    assert len(read_summary(paths["summary"])) == len(report)
    assert paths["curves"].name == "curves.csv"


def test_markdown_report(report, tmp_path):
    text = ReportExporter(report, tmp_path).generate_markdown_report()
    assert "# 📈 PolyBO Benchmark Report" in text
    assert "| 1 | 2 | pmbo | 2 |" in text
    assert "Surrogate RMSE" in text
    assert "None." in text


def test_unsupported_format(report, tmp_path):
    with pytest.raises(ValueError):
        emit_report(report, "parquet", tmp_path)
    assert not (tmp_path / "traces").exists()


def test_unwritable_output(report, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("occupied")
    with pytest.raises(OutputDirectoryError):
        emit_report(report, "csv", blocker / "nested")


def test_read_summary_rejects_other_tables(tmp_path):
    path = tmp_path / "other.csv"
    pd.DataFrame({"a": [1]}).to_csv(path, index=False)
    with pytest.raises(ValueError):
        read_summary(path)
    with pytest.raises(FileNotFoundError):
        read_summary(tmp_path / "empty_dir")


def test_exporter_writes_each_part_separately(report, tmp_path):
    exporter = ReportExporter(report, tmp_path / "parts", "jsonl")
    assert exporter.trace_dir.is_dir()
    assert exporter.write_curves().name == "curves.jsonl"
    traces = exporter.write_traces()
    assert len(traces) == len(report)
    assert all(path.suffix == ".jsonl" for path in traces)
    assert not (tmp_path / "parts" / "report.md").exists()
