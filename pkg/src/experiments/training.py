"""The training loop shared by every experiment."""

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from protocols import ClockProtocol, MetricsSinkProtocol, OptimizerProtocol
from storage import MetricsRecord
from tensor import Matrix, SingularMatrixError
from verification.finite_diff import NonFiniteLossError

from .models import Model

logger = logging.getLogger(__name__)

LONG_RUN = 1000
LONG_RUN_EVAL_EVERY = 10


@dataclass(frozen=True)
class StopRule:
    """When a run counts as successful, and whether to stop there."""

    metric: str = "test_acc"
    threshold: float = 0.99
    stop: bool = False

    def met(self, record: MetricsRecord) -> bool:
        return float(getattr(record, self.metric)) >= self.threshold


@dataclass(frozen=True)
class RunResult:
    run_name: str
    failed: bool = False
    diagnostic: str = ""
    success_iteration: int | None = None
    initial: MetricsRecord | None = None
    records: tuple[MetricsRecord, ...] = ()
    final_params: tuple[Matrix, ...] = field(default=(), repr=False)

    @property
    def succeeded(self) -> bool:
        return not self.failed and self.success_iteration is not None

    @property
    def last(self) -> MetricsRecord | None:
        if self.records:
            return self.records[-1]
        return self.initial


def eval_interval(iterations: int, eval_every: int | None = None) -> int:
    """``eval_every`` when given; otherwise every iteration for short runs, every 10th for long."""
    if eval_every is not None:
        return eval_every
    return 1 if iterations <= LONG_RUN else LONG_RUN_EVAL_EVERY


def train(
    model: Model,
    optimizer: OptimizerProtocol,
    iterations: int,
    sink: MetricsSinkProtocol,
    rng: np.random.Generator,
    *,
    run_name: str = "run",
    eval_every: int | None = None,
    stop_rule: StopRule | None = None,
    clock: ClockProtocol = time.perf_counter,
    record_time: bool = True,
) -> RunResult:
    """Run ``iterations`` optimizer steps, recording telemetry on a fixed cadence.

    The initial network is evaluated as iteration 0. Its record goes to ``sink`` only when
    at least one step follows, so a 0-iteration run leaves a header-only file.

    Singular Gramians and non-finite losses end the run; they are reported through the
    returned RunResult rather than raised.
    """
    rule = stop_rule or StopRule()
    interval = eval_interval(iterations, eval_every)
    records: list[MetricsRecord] = []
    params: list[Matrix] = []
    initial: MetricsRecord | None = None
    success: int | None = None
    start = clock()

    def evaluate(iteration: int) -> MetricsRecord:
        loss, train_acc, test_acc = model.evaluate(params)
        if not math.isfinite(loss):
            raise NonFiniteLossError(f"loss is {loss} at iteration {iteration}")
        seconds = clock() - start if record_time else 0.0
        return MetricsRecord(iteration, loss, train_acc, test_acc, seconds)

    sink.write_header()
    try:
        params = model.initial_params(rng)
        initial = evaluate(0)
        logger.info(
            "%s: initial loss %.4f, train acc %.4f, test acc %.4f",
            run_name,
            initial.loss,
            initial.train_acc,
            initial.test_acc,
        )
        if iterations > 0:
            sink.append(initial)
            records.append(initial)
            if rule.met(initial):
                success = 0
        for i in range(1, iterations + 1):
            if success is not None and rule.stop:
                logger.info("%s: success at iteration %d, stopping", run_name, success)
                break
            loss, grads = model.loss_and_gradient(params, rng)
            if not math.isfinite(loss):
                raise NonFiniteLossError(f"minibatch loss is {loss} at iteration {i}")
            params = optimizer.step(params, grads)
            if i % interval and i != iterations:
                continue
            record = evaluate(i)
            sink.append(record)
            records.append(record)
            logger.debug(
                "%s: iter %d loss %.6f train %.4f test %.4f",
                run_name,
                i,
                record.loss,
                record.train_acc,
                record.test_acc,
            )
            if success is None and rule.met(record):
                success = i
    except (SingularMatrixError, NonFiniteLossError) as e:
        logger.exception("%s failed", run_name)
        return RunResult(
            run_name, True, str(e), None, initial, tuple(records), tuple(params)
        )
    finally:
        sink.close()
    return RunResult(run_name, False, "", success, initial, tuple(records), tuple(params))
