"""Experiment runners: build data and model from a RunConfig, train, write the run directory."""

import logging
import time
from pathlib import Path

import numpy as np

from benchmarks import gen_delay_adder, gen_delay_bitstream, gen_two_spirals, load_mnist
from cnn import CnnSpec
from config.run_config import RunConfig
from ffnn import NetworkSpec
from optim import make_optimizer
from protocols import ClockProtocol
from rnn import RnnSpec
from storage import RunDirectory

from .models import CnnModel, FfnnModel, Model, RnnModel
from .training import RunResult, StopRule, train

logger = logging.getLogger(__name__)

DECISION_MAP_SIDE = 256
DECISION_MAP_EXTENT = 1.1


def _execute(
    config: RunConfig, model: Model, clock: ClockProtocol
) -> tuple[RunResult, RunDirectory]:
    run_dir = RunDirectory(config.output_root, config.run_name)
    run_dir.write_config(config.dump())
    logger.info(
        "Running %s: %s, %s lr=%g, lambda=%g, %d iterations",
        config.run_name,
        "-".join(map(str, config.layers)),
        config.opt,
        config.lr,
        config.lam,
        config.iters,
    )
    result = train(
        model,
        make_optimizer(config.opt, config.lr),
        config.iters,
        run_dir.metrics_sink(),
        np.random.default_rng(config.seed),
        run_name=config.run_name,
        eval_every=config.evaluation_interval,
        stop_rule=StopRule(config.success_metric, config.success_threshold, config.stop_on_success),
        clock=clock,
        record_time=config.record_time,
    )
    run_dir.save_loss_plot(result.records, config.run_name)
    last = result.last
    if result.failed:
        logger.error("%s failed: %s", config.run_name, result.diagnostic)
    elif last is not None:
        logger.info(
            "%s finished: loss %.4f, train acc %.4f, test acc %.4f, success at %s",
            config.run_name,
            last.loss,
            last.train_acc,
            last.test_acc,
            result.success_iteration,
        )
    return result, run_dir


def run_two_spirals(config: RunConfig, clock: ClockProtocol = time.perf_counter) -> RunResult:
    """Train on the two spirals and write metrics, loss plot and decision map."""
    spec = NetworkSpec(config.layers, config.all_shortcuts, config.activation, "softmax_xent")
    train_set, test_set = gen_two_spirals()
    model = FfnnModel(spec, train_set, test_set, config)
    result, run_dir = _execute(config, model, clock)
    if result.final_params:
        side = np.linspace(-DECISION_MAP_EXTENT, DECISION_MAP_EXTENT, DECISION_MAP_SIDE)
        gx, gy = np.meshgrid(side, side[::-1])
        grid = np.vstack([gx.ravel(), gy.ravel()])
        probs = model.class_probabilities(list(result.final_params), grid)
        points = np.hstack([train_set.inputs, test_set.inputs])
        classes = np.argmax(np.hstack([train_set.labels, test_set.labels]), axis=0)
        run_dir.save_decision_map(
            probs[1].reshape(DECISION_MAP_SIDE, DECISION_MAP_SIDE),
            points,
            classes,
            DECISION_MAP_EXTENT,
        )
    return result


def run_bitstream(
    config: RunConfig, task: str = "memorize", clock: ClockProtocol = time.perf_counter
) -> RunResult:
    """Train an RNN to recall (``memorize``) or add (``adder``) a bit N steps back."""
    generate = {"memorize": gen_delay_bitstream, "adder": gen_delay_adder}.get(task)
    if generate is None:
        raise ValueError(f"Unknown bit-stream task '{task}'. Available: memorize, adder")
    spec = RnnSpec(config.layers[0], config.layers[1:-1], config.layers[-1])
    data_seed, test_seed = np.random.SeedSequence([config.seed, 7]).spawn(2)
    train_set = generate(
        config.delay, config.streams, config.sequence_length, np.random.default_rng(data_seed)
    )
    test_set = generate(
        config.delay, config.test_streams, config.sequence_length, np.random.default_rng(test_seed)
    )
    return _execute(config, RnnModel(spec, train_set, test_set, config), clock)[0]


def run_mnist_small(
    config: RunConfig, data_dir: Path, clock: ClockProtocol = time.perf_counter
) -> RunResult:
    """Reduced-scale MNIST CNN.

    Raises:
        MissingDatasetError: if the IDX files are not under ``data_dir``
    """
    train_set = load_mnist(data_dir, "train", config.train_images)
    test_set = load_mnist(data_dir, "test", config.test_images)
    spec = CnnSpec.from_triples(1, 28, config.conv, config.layers, config.activation)
    return _execute(config, CnnModel(spec, train_set, test_set, config), clock)[0]


def run_experiment(
    config: RunConfig, data_dir: Path, clock: ClockProtocol = time.perf_counter
) -> RunResult:
    if config.experiment == "twospirals":
        return run_two_spirals(config, clock)
    if config.experiment == "bitstream":
        return run_bitstream(config, "memorize", clock)
    if config.experiment == "adder":
        return run_bitstream(config, "adder", clock)
    return run_mnist_small(config, data_dir, clock)
