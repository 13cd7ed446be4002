"""Main application module for targetspace experiments."""

import logging
import time
from collections.abc import Sequence
from pathlib import Path

from config import RunConfig, config
from experiments import RunResult, SweepRow, run_experiment, run_sweep
from protocols import ClockProtocol
from verification import SuiteResult, run_verification_suites

logger = logging.getLogger(__name__)


class App:
    """Target-space experiment harness.

    Runs single experiments, sweeps and the verification suites with settings taken from
    the process configuration.

    Components can be injected for testing or alternative implementations.
    """

    def __init__(
        self,
        data_dir: Path | None = None,
        clock: ClockProtocol | None = None,
        workers: int | None = None,
    ) -> None:
        self.data_dir = data_dir or config.data_dir
        self.clock = clock or time.perf_counter
        self.workers = workers or config.SWEEP_WORKERS

    def run(self, run_config: RunConfig) -> RunResult:
        """Train one configuration; the run directory is named after it."""
        return run_experiment(run_config, self.data_dir, self.clock)

    def sweep(
        self, base: RunConfig, axis: str, values: Sequence[float], seeds: Sequence[int]
    ) -> list[SweepRow]:
        rows = run_sweep(base, axis, values, seeds, self.data_dir, self.workers)
        for row in rows:
            logger.info(
                "%s=%g: %d/%d succeeded, %d failed",
                axis,
                row.value,
                row.successes,
                row.seeds,
                row.failed_runs,
            )
        return rows

    def verify(self, seed: int = 0, cases: int = 20) -> list[SuiteResult]:
        results = run_verification_suites(
            seed, cases, config.GRADCHECK_STEP, config.JACOBIAN_COLUMN_CAP
        )
        failed = [r.name for r in results if not r.passed]
        if failed:
            logger.error("Verification failed: %s", ", ".join(failed))
        else:
            logger.info("All %d verification suites passed", len(results))
        return results
