import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import yaml

from src.harness.scenarios import GridPoint
from src.perturbation.isr import IsrTable, to_db

logger = logging.getLogger(__name__)

VERSION = "0.1.0"

DECISIONS = {
    "qcov_normalization": "1/T^2",
    "zero_attenuation": "radius*(1-c)",
    "burn_in": "L-1",
    "mixture_covariance": "exact_switched",
    "linearization": "asymptotic_gains",
    "exp3_mismodel": "a,b,c shared with exp1",
}


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    point: GridPoint
    predicted: IsrTable
    icrlb: IsrTable
    empirical: IsrTable | None = None
    failed: bool = False
    wall_time: float = 0.0

    @property
    def predicted_db(self) -> float:
        return self.predicted.total_db

    @property
    def icrlb_db(self) -> float:
        return self.icrlb.total_db

    @property
    def empirical_db(self) -> float:
        return self.empirical.total_db if self.empirical is not None else math.nan

    @property
    def trials(self) -> int:
        return self.empirical.trials if self.empirical is not None else 0

    @property
    def excluded(self) -> int:
        return self.empirical.excluded if self.empirical is not None else 0

    def to_record(self, include_timing: bool = False) -> dict[str, str]:
        record = {
            "experiment": self.experiment,
            "point": str(self.point.index),
            "T": str(self.point.T),
            "mu": _fmt(self.point.mu),
            "p": _fmt(self.point.p) if self.point.p is not None else "",
            "family": self.point.family,
            "predicted_db": _fmt(self.predicted_db),
            "empirical_db": _fmt(self.empirical_db),
            "icrlb_db": _fmt(self.icrlb_db),
            "trials": str(self.trials),
            "excluded": str(self.excluded),
            "failed": "1" if self.failed else "0",
        }
        for m, i, j, value in self.predicted.entries():
            record[f"pred_m{m + 1}_{i + 1}{j + 1}_db"] = _fmt(to_db(value))
        if self.empirical is not None:
            for m, i, j, value in self.empirical.entries():
                record[f"emp_m{m + 1}_{i + 1}{j + 1}_db"] = _fmt(to_db(value))
        if include_timing:
            record["wall_time_s"] = f"{self.wall_time:.3f}"
        return record


def _fmt(value: float) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return f"{value:.10g}"


class ResultObserver(Protocol):
    def on_row(self, row: ResultRow) -> None: ...
    def on_finished(self) -> None: ...


class LogReporter:
    def on_row(self, row: ResultRow) -> None:
        gap = row.empirical_db - row.predicted_db
        logger.info(
            f"[{row.experiment}] {row.point.label}: predicted={row.predicted_db:.3f} dB, "
            f"empirical={row.empirical_db:.3f} dB (gap {gap:+.3f}), "
            f"icrlb={row.icrlb_db:.3f} dB, excluded={row.excluded}"
        )

    def on_finished(self) -> None:
        pass


class CsvResultWriter:
    """Writes '#' metadata lines, a header row and one line per ResultRow."""

    def __init__(self, path: str | Path, metadata: dict, include_timing: bool = False):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._include_timing = include_timing
        self._file = open(self.path, "w", encoding="utf-8", newline="")
        for key, value in metadata.items():
            self._file.write(f"# {key}: {value}\n")
        self._writer: csv.DictWriter | None = None
        self.rows_written = 0

    def on_row(self, row: ResultRow) -> None:
        record = row.to_record(self._include_timing)
        if self._writer is None:
            self._writer = csv.DictWriter(self._file, fieldnames=list(record), lineterminator="\n")
            self._writer.writeheader()
        self._writer.writerow(record)
        self._file.flush()
        self.rows_written += 1

    def on_finished(self) -> None:
        self._file.close()
        logger.info(f"Wrote {self.rows_written} rows to {self.path}")


def metadata_for(config_dict: dict, trace_method: str) -> dict:
    dump = yaml.safe_dump(config_dict, default_flow_style=True, sort_keys=True, width=10**6).strip()
    decisions = dict(DECISIONS, trace_method=trace_method)
    return {
        "version": VERSION,
        "config": dump,
        "decisions": ";".join(f"{k}={v}" for k, v in decisions.items()),
    }


def plot_axis(points: list[GridPoint]) -> str:
    for name in ("mu", "T", "p"):
        if len({getattr(point, name) for point in points}) > 1:
            return name
    return "point"


def write_plot_script(csv_path: str | Path, x_column: str) -> Path:
    """gnuplot script plotting the total ISR curves of a result CSV against x_column."""
    csv_path = Path(csv_path)
    script = csv_path.with_suffix(".gp")
    logscale = "set logscale x\n" if x_column == "T" else ""
    script.write_text(
        "set datafile separator ','\n"
        "set datafile commentschars '#'\n"
        "set key autotitle columnhead\n"
        f"set xlabel '{x_column}'\n"
        "set ylabel 'total normalized ISR [dB]'\n"
        f"{logscale}"
        "set grid\n"
        f"set terminal pngcairo size 900,600\n"
        f"set output '{csv_path.with_suffix('.png').name}'\n"
        f"plot '{csv_path.name}' using '{x_column}':'predicted_db' with linespoints, \\\n"
        f"     '' using '{x_column}':'empirical_db' with points, \\\n"
        f"     '' using '{x_column}':'icrlb_db' with lines dashtype 2\n",
        encoding="utf-8",
    )
    return script


__all__ = [
    "VERSION",
    "ResultRow",
    "ResultObserver",
    "LogReporter",
    "CsvResultWriter",
    "metadata_for",
    "plot_axis",
    "write_plot_script",
]
