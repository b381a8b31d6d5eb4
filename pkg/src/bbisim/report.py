"""CSV output of sweep results."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable

from .engine import Scenario, SweepCell

CSV_COLUMNS = ("class", "scenario", "fs_hz", "snr_db", "n_trials",
               "rmse_ms", "rmse_corrected_ms", "final_nsem", "capped_flag")
TRIAL_COLUMNS = ("class", "scenario", "fs_hz", "snr_db", "trial", "true_delay_s",
                 "clean_delay_s", "estimate_s", "abs_error_s", "corrected_abs_error_s")


def _fmt(value: float, digits: int = 6) -> str:
    return f"{value:.{digits}f}"


def format_row(cell: SweepCell) -> list[str]:
    return [
        str(cell.dawber_class),
        Scenario(cell.scenario).value,
        f"{cell.fs_low:g}",
        f"{cell.snr_db:g}",
        str(cell.n_trials),
        _fmt(cell.rmse_ms),
        _fmt(cell.rmse_corrected_ms),
        _fmt(cell.final_nsem, 8),
        "1" if cell.capped else "0",
    ]


def _line(fields) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(fields)
    return buf.getvalue()


class ResultsWriter:
    """Append-only CSV sink; each row is written as a whole line and flushed."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("w", encoding="utf-8", newline="")
        self._fh.write(_line(CSV_COLUMNS))
        self._fh.flush()
        self.rows = 0

    def write(self, cell: SweepCell) -> None:
        self._fh.write(_line(format_row(cell)))
        self._fh.flush()
        self.rows += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_results_csv(cells: Iterable[SweepCell], path) -> Path:
    """Write one row per cell, sorted by (class, scenario, fs, snr)."""
    cells = sorted(cells, key=lambda c: c.sort_key)
    if not cells:
        raise ValueError("no cells to write")
    with ResultsWriter(path) as writer:
        for cell in cells:
            writer.write(cell)
    return writer.path


def read_results_csv(path) -> list[SweepCell]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        cells = []
        for lineno, row in enumerate(reader, start=2):
            try:
                cells.append(SweepCell(
                    dawber_class=int(row["class"]),
                    scenario=Scenario(row["scenario"]),
                    fs_low=float(row["fs_hz"]),
                    snr_db=float(row["snr_db"]),
                    n_trials=int(row["n_trials"]),
                    rmse_ms=float(row["rmse_ms"]),
                    rmse_corrected_ms=float(row["rmse_corrected_ms"]),
                    final_nsem=float(row["final_nsem"]),
                    capped=row["capped_flag"] == "1",
                ))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return cells


def write_trials_csv(cells: Iterable[SweepCell], path) -> Path:
    """Per-trial dump for cells run with ``collect_trials``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRIAL_COLUMNS)
        for cell in sorted(cells, key=lambda c: c.sort_key):
            head = [cell.dawber_class, Scenario(cell.scenario).value, f"{cell.fs_low:g}", f"{cell.snr_db:g}"]
            for i, t in enumerate(cell.trials):
                writer.writerow(head + [i, _fmt(t.true_delay, 4), _fmt(t.clean_delay, 4), _fmt(t.estimate, 3),
                                        _fmt(t.abs_error, 4), _fmt(t.corrected_abs_error, 4)])
    return path
