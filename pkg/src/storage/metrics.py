"""
Metrics storage for per-iteration training telemetry.

Records are appended as CSV rows to ``metrics.csv`` in the run directory.
"""

import csv
import logging
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Any, TextIO

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricsRecord:
    iteration: int
    loss: float
    train_acc: float
    test_acc: float
    seconds: float


METRICS_HEADER: tuple[str, ...] = tuple(f.name for f in fields(MetricsRecord))


class CsvMetricsSink:
    """
    Writes MetricsRecord rows to a CSV file.

    Floats are written with ``repr`` so a rerun from the same config gives the same bytes.
    Iterations must strictly increase.
    """

    def __init__(self, path: Path) -> None:
        """Open ``path`` for writing, creating parent directories."""
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file: TextIO | None = None
        self._writer: Any = None
        self._last_iteration = -1

    def write_header(self) -> None:
        """
        Truncate the file and write the header row.

        Raises:
            OSError: If the file cannot be written
        """
        try:
            self._file = open(self.path, "w", encoding="utf-8", newline="")
        except OSError:
            logger.exception("Failed to open metrics file %s", self.path)
            raise
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(METRICS_HEADER)
        self._file.flush()

    def append(self, record: MetricsRecord) -> None:
        """
        Append one row.

        Raises:
            ValueError: If the iteration does not increase, or the header was never written
        """
        if self._writer is None or self._file is None:
            raise ValueError("write_header() must be called before append()")
        if record.iteration <= self._last_iteration:
            raise ValueError(
                f"iteration {record.iteration} does not follow {self._last_iteration}"
            )
        self._last_iteration = record.iteration
        self._writer.writerow([repr(v) if isinstance(v, float) else v for v in astuple(record)])
        self._file.flush()

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None
            self._writer = None


def read_metrics(path: Path) -> list[MetricsRecord]:
    """Parse a metrics CSV written by CsvMetricsSink."""
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != METRICS_HEADER:
            raise ValueError(f"{path} does not have the metrics header")
        return [
            MetricsRecord(
                int(row["iteration"]),
                float(row["loss"]),
                float(row["train_acc"]),
                float(row["test_acc"]),
                float(row["seconds"]),
            )
            for row in reader
        ]
