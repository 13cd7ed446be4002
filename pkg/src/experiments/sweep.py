"""Hyper-parameter sweeps over (value, seed) pairs with an aggregated CSV."""

import csv
import logging
import statistics
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from config.run_config import RunConfig

from .runners import run_experiment
from .training import RunResult

logger = logging.getLogger(__name__)

SweepAxis = Literal["lambda", "nbar_b", "N"]
SWEEP_AXES: tuple[str, ...] = ("lambda", "nbar_b", "N")

SWEEP_HEADER = (
    "axis",
    "value",
    "seeds",
    "successes",
    "success_rate",
    "median_success_iteration",
    "median_final_train_acc",
    "median_final_test_acc",
    "failed_runs",
)


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    seeds: int
    successes: int
    median_success_iteration: float | None
    median_final_train_acc: float | None
    median_final_test_acc: float | None
    failed_runs: int

    @property
    def success_rate(self) -> float:
        return self.successes / self.seeds if self.seeds else 0.0

    def as_row(self) -> list[str]:
        def fmt(v: float | None) -> str:
            return "" if v is None else repr(v)

        value = repr(self.value) if self.axis == "lambda" else str(int(self.value))
        return [
            self.axis,
            value,
            str(self.seeds),
            str(self.successes),
            repr(self.success_rate),
            fmt(self.median_success_iteration),
            fmt(self.median_final_train_acc),
            fmt(self.median_final_test_acc),
            str(self.failed_runs),
        ]


def sweep_config(base: RunConfig, axis: str, value: float, seed: int) -> RunConfig:
    """``base`` with one axis value and seed applied, writing under its own subdirectory."""
    values = base.model_dump(by_alias=True)
    if axis == "lambda":
        values["lambda"] = float(value)
    elif axis == "nbar_b":
        values["target_batch"] = int(value)
    elif axis == "N":
        if base.experiment not in ("bitstream", "adder"):
            raise ValueError(f"axis N applies to bit-stream tasks, not {base.experiment}")
        # widths follow the delay
        values.pop("layers")
        values.pop("stream_length")
        values["delay"] = int(value)
    else:
        raise ValueError(f"Unknown sweep axis '{axis}'. Available: {', '.join(SWEEP_AXES)}")
    values["seed"] = seed
    values["out"] = base.output_root / f"{axis}={value:g}"
    values.pop("experiment")
    return RunConfig.for_experiment(base.experiment, **values)


def _run_one(config: RunConfig, data_dir: Path) -> RunResult:
    try:
        return run_experiment(config, data_dir)
    except Exception as e:
        logger.exception("Sweep run %s crashed", config.run_name)
        return RunResult(config.run_name, failed=True, diagnostic=f"{type(e).__name__}: {e}")


def _median(values: list[float]) -> float | None:
    return float(statistics.median(values)) if values else None


def aggregate(axis: str, value: float, results: Sequence[RunResult]) -> SweepRow:
    finished = [r.last for r in results if not r.failed and r.last is not None]
    success_iterations = [
        float(r.success_iteration) for r in results if r.success_iteration is not None
    ]
    return SweepRow(
        axis,
        value,
        len(results),
        sum(r.succeeded for r in results),
        _median(success_iterations),
        _median([rec.train_acc for rec in finished]),
        _median([rec.test_acc for rec in finished]),
        sum(r.failed for r in results),
    )


def write_sweep_csv(path: Path, rows: Sequence[SweepRow]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(SWEEP_HEADER)
            writer.writerows(row.as_row() for row in rows)
    except OSError:
        logger.exception("Failed to save sweep results to %s", path)
        raise


def run_sweep(
    base: RunConfig,
    axis: str,
    values: Sequence[float],
    seeds: Sequence[int],
    data_dir: Path,
    workers: int = 1,
) -> list[SweepRow]:
    """Run every (value, seed) pair and aggregate per value into ``<out>/sweep.csv``.

    Individual run failures are counted, never raised.
    """
    configs = [(v, sweep_config(base, axis, v, s)) for v in values for s in seeds]
    logger.info(
        "Sweeping %s over %s with %d seeds (%d runs)", axis, list(values), len(seeds), len(configs)
    )
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, cfg, data_dir) for _, cfg in configs]
            results = [f.result() for f in futures]
    else:
        results = [_run_one(cfg, data_dir) for _, cfg in configs]
    rows = []
    for value in values:
        mine = [r for (v, _), r in zip(configs, results, strict=True) if v == value]
        rows.append(aggregate(axis, value, mine))
    write_sweep_csv(base.output_root / "sweep.csv", rows)
    return rows
