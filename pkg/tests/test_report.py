import math

import numpy as np
import pytest

from src.harness.report import (
    CsvResultWriter,
    LogReporter,
    ResultRow,
    metadata_for,
    plot_axis,
    write_plot_script,
)
from src.harness.scenarios import GridPoint
from src.perturbation.isr import IsrTable


def _row(index=0, empirical=True, failed=False, mu=0.5):
    values = np.full((1, 2, 2), 0.01)
    return ResultRow(
        experiment="unit",
        point=GridPoint(index=index, T=100, mu=mu, p=None, family="gaussian"),
        predicted=IsrTable(values),
        icrlb=IsrTable(values / 2),
        empirical=IsrTable(values * 1.1, trials=10, excluded=1) if empirical else None,
        failed=failed,
        wall_time=1.25,
    )


class TestResultRow:
    def test_record_columns(self):
        record = _row().to_record()
        assert record["predicted_db"] == "-20"
        assert record["trials"] == "10"
        assert record["excluded"] == "1"
        assert record["failed"] == "0"
        assert record["p"] == ""
        assert "pred_m1_12_db" in record and "emp_m1_21_db" in record
        assert "wall_time_s" not in record

    def test_timing_optional(self):
        assert _row().to_record(include_timing=True)["wall_time_s"] == "1.250"

    def test_prediction_only_row(self):
        row = _row(empirical=False)
        assert math.isnan(row.empirical_db)
        assert row.to_record()["empirical_db"] == "nan"
        assert row.trials == 0

    def test_icrlb_db(self):
        assert _row().icrlb_db == pytest.approx(-20.0 - 10 * math.log10(2))


class TestCsvResultWriter:
    def test_writes_metadata_header_and_rows(self, tmp_path):
        path = tmp_path / "out" / "unit.csv"
        writer = CsvResultWriter(path, {"version": "0.1.0", "config": "{a: 1}"})
        writer.on_row(_row(0))
        writer.on_row(_row(1, failed=True))
        writer.on_finished()
        lines = path.read_text().splitlines()
        assert lines[0] == "# version: 0.1.0"
        assert lines[1] == "# config: {a: 1}"
        assert lines[2].startswith("experiment,point,T,mu,p,family,predicted_db")
        assert len(lines) == 5
        assert lines[4].split(",")[11] == "1"
        assert writer.rows_written == 2

    def test_identical_runs_identical_bytes(self, tmp_path):
        for name in ("a.csv", "b.csv"):
            writer = CsvResultWriter(tmp_path / name, {"version": "0.1.0"})
            writer.on_row(_row())
            writer.on_finished()
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestLogReporter:
    def test_logs_row(self, caplog):
        caplog.set_level("INFO")
        LogReporter().on_row(_row())
        assert "predicted=-20.000 dB" in caplog.text


class TestMetadata:
    def test_contains_decisions(self):
        meta = metadata_for({"id": "x", "dims": {"M": 1}}, "exact")
        assert meta["version"] == "0.1.0"
        assert "trace_method=exact" in meta["decisions"]
        assert "\n" not in meta["config"]


class TestPlots:
    def test_axis_prefers_varying_column(self):
        points = [GridPoint(n, 100, mu, None, "gaussian") for n, mu in enumerate([0.0, 0.5])]
        assert plot_axis(points) == "mu"
        points = [GridPoint(n, T, 0.0, None, "gaussian") for n, T in enumerate([50, 100])]
        assert plot_axis(points) == "T"
        points = [GridPoint(n, 100, 0.0, None, fam) for n, fam in enumerate(["gaussian", "laplace"])]
        assert plot_axis(points) == "point"

    def test_script_written(self, tmp_path):
        csv_path = tmp_path / "exp.csv"
        script = write_plot_script(csv_path, "T")
        text = script.read_text()
        assert script.name == "exp.gp"
        assert "set logscale x" in text
        assert "'exp.csv'" in text
