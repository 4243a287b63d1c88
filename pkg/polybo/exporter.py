"""
Report Exporter
Writes a ComparisonReport as summary + curves files (CSV, JSONL or a
formatted Excel workbook), one trace file per run and a markdown summary.
Also reads summaries back for the ``compare`` subcommand.
"""

from __future__ import annotations

import logging
from datetime import datetime
from pathlib import Path

import pandas as pd

from .config import FORMATS
from .errors import OutputDirectoryError
from .experiment import CURVE_COLUMNS, SUMMARY_COLUMNS, ComparisonReport, aggregate

logger = logging.getLogger(__name__)

HEADER_FORMAT = {
    "bold": True,
    "bg_color": "#4472C4",
    "font_color": "white",
    "border": 1,
    "align": "center",
}


class ReportExporter:
    """Writes one ComparisonReport under ``out`` in the requested table format."""

    def __init__(self, report: ComparisonReport, out="results", format: str = "csv"):
        if format not in FORMATS:
            raise ValueError(f"unsupported report format {format!r}")
        self.report = report
        self.format = format
        self.table_format = "jsonl" if format == "jsonl" else "csv"
        self.export_dir = Path(out)
        self.trace_dir = self.export_dir / "traces"

        try:
            self.trace_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputDirectoryError(f"cannot create {self.trace_dir}: {exc}") from exc

    def _write_frame(self, frame: pd.DataFrame, path: Path):
        if self.table_format == "jsonl":
            frame.to_json(path, orient="records", lines=True)
        else:
            frame.to_csv(path, index=False)
        return path

    def _format_sheet(self, workbook, worksheet, frame: pd.DataFrame):
        header_format = workbook.add_format(HEADER_FORMAT)
        for col_num, value in enumerate(frame.columns.values):
            worksheet.write(0, col_num, value, header_format)
            width = max(12, min(40, len(str(value)) + 4))
            worksheet.set_column(col_num, col_num, width)
        worksheet.freeze_panes(1, 0)

    def create_workbook(self, path: Path):
        sheets = {
            "Summary": self.report.summary_frame(include_error=True),
            "Curves": self.report.curves_frame(),
            "Aggregates": aggregate(self.report),
        }
        with pd.ExcelWriter(path, engine="xlsxwriter") as writer:
            workbook = writer.book
            for name, frame in sheets.items():
                frame.to_excel(writer, sheet_name=name, index=False)
                self._format_sheet(workbook, writer.sheets[name], frame)
        return path

    def write_summary(self) -> Path:
        if self.format == "xlsx":
            return self.create_workbook(self.export_dir / "summary.xlsx")
        # only the jsonl summary carries the error column; csv keeps the fixed layout
        frame = self.report.summary_frame(include_error=self.format == "jsonl")
        return self._write_frame(frame, self.export_dir / f"summary.{self.table_format}")

    def write_curves(self) -> Path:
        return self._write_frame(self.report.curves_frame(), self.export_dir / f"curves.{self.table_format}")

    def write_traces(self):
        return [
            self._write_frame(frame, self.trace_dir / f"run_{run_id}.{self.table_format}")
            for run_id, frame in self.report.traces().items()
        ]

    def generate_markdown_report(self) -> str:
        report = self.report
        summary = report.summary_frame()
        config = report.config
        text = f"""# 📈 PolyBO Benchmark Report

**Generated:** {datetime.now().strftime('%B %d, %Y at %I:%M %p')}

---

## ⚙️ Experiment

| Setting | Value |
|---------|-------|
| **Runs** | {len(summary):,} |
| **Failed runs** | {len(report.failed_runs):,} |
"""
        if config is not None:
            text += f"""| **Functions** | {', '.join(str(f) for f in config.functions)} |
| **Dimensions** | {', '.join(str(m) for m in config.dimensions)} |
| **Algorithms** | {', '.join(config.algorithms)} |
| **Kernels** | {', '.join(k.value for k in config.kernel_families)} |
| **Replicates** | {config.replicates} |
| **Master seed** | {config.seed} |
| **Budget** | {config.budget if config.budget is not None else f'{config.budget_per_dimension} x m'} |
"""

        text += """
---

## 🏁 Final Best Value (median over kernels, hyper-parameters and replicates)

| Function | m | Algorithm | Runs | Median | Q1 | Q3 | IQR |
|----------|---|-----------|------|--------|----|----|-----|
"""
        for _, row in aggregate(summary).iterrows():
            text += (
                f"| {row['function_id']} | {row['dimension']} | {row['algorithm']} | {row['runs']} | "
                f"{_fmt(row['median'])} | {_fmt(row['q1'])} | {_fmt(row['q3'])} | {_fmt(row['iqr'])} |\n"
            )

        if summary["rmse"].notna().any():
            text += """
### Surrogate RMSE

| Function | m | Algorithm | Median RMSE |
|----------|---|-----------|-------------|
"""
            rmse = summary.dropna(subset=["rmse"]).groupby(["function_id", "dimension", "algorithm"])["rmse"].median()
            for (function_id, m, algorithm), value in rmse.items():
                text += f"| {function_id} | {m} | {algorithm} | {_fmt(value)} |\n"

        text += "\n---\n\n## ❌ Failed Runs\n\n"
        failed = summary[summary["error"].notna()]
        if failed.empty:
            text += "None.\n"
        else:
            for run_id, row in failed.iterrows():
                text += f"- run {run_id} ({row['algorithm']}, f{row['function_id']}, m={row['dimension']}, " \
                        f"replicate {row['replicate']}): {row['error']}\n"
        return text

    def export_all(self) -> dict:
        """Summary, curves, traces/run_<run_id> files and report.md; paths keyed by role."""
        paths = {}
        try:
            paths["summary"] = self.write_summary()
            paths["curves"] = self.write_curves()
            paths["traces"] = self.write_traces()
            paths["report"] = self.export_dir / "report.md"
            paths["report"].write_text(self.generate_markdown_report(), encoding="utf-8")
        except OSError as exc:
            raise OutputDirectoryError(f"failed writing report to {self.export_dir}: {exc}") from exc

        logger.info("wrote %d summary rows to %s", len(self.report), paths["summary"])
        return paths


def _fmt(value, spec=".4g"):
    if value is None or pd.isna(value):
        return "n/a"
    return format(value, spec)


def emit_report(report: ComparisonReport, format: str = "csv", out="results") -> dict:
    return ReportExporter(report, out, format).export_all()


def read_summary(path) -> pd.DataFrame:
    """Load a summary written by emit_report (csv, jsonl or xlsx)."""
    path = Path(path)
    if path.is_dir():
        for name in ("summary.csv", "summary.jsonl", "summary.xlsx"):
            if (path / name).exists():
                path = path / name
                break
        else:
            raise FileNotFoundError(f"no summary file in {path}")
    if path.suffix == ".jsonl":
        frame = pd.read_json(path, orient="records", lines=True)
    elif path.suffix == ".xlsx":
        frame = pd.read_excel(path, sheet_name="Summary", engine="openpyxl")
    else:
        frame = pd.read_csv(path)
    missing = [c for c in SUMMARY_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"{path} is not a summary file; missing columns {missing}")
    return frame


def read_curves(path) -> pd.DataFrame:
    path = Path(path)
    candidates = [path / "curves.csv", path / "curves.jsonl"] if path.is_dir() else [path]
    for candidate in candidates:
        if candidate.exists():
            if candidate.suffix == ".jsonl":
                return pd.read_json(candidate, orient="records", lines=True)
            return pd.read_csv(candidate)
    return pd.DataFrame(columns=CURVE_COLUMNS)
