import numpy as np
import pytest

import cli
from app import App
from benchmarks import MissingDatasetError, write_idx_images, write_idx_labels
from cli import main as cli_main
from config import RunConfig
from experiments import (
    SWEEP_HEADER,
    Model,
    RunResult,
    StopRule,
    aggregate,
    eval_interval,
    run_experiment,
    run_sweep,
    sweep_config,
    train,
)
from optim import Sgd
from storage import METRICS_HEADER, CsvMetricsSink, MetricsRecord, read_metrics
from tensor import SingularMatrixError


class Ticks:
    """A clock that advances one second per reading."""

    def __init__(self):
        self.now = 0.0

    def __call__(self):
        self.now += 1.0
        return self.now


class ScriptedModel(Model):
    """One scalar parameter; accuracy rises by 0.25 per step and the gradient is constant."""

    def __init__(self, config, fail_at=None):
        super().__init__(config)
        self.fail_at = fail_at
        self.steps = 0

    def initial_params(self, rng):
        return [np.zeros((1, 1))]

    def loss_and_gradient(self, params, rng):
        self.steps += 1
        if self.steps == self.fail_at:
            raise SingularMatrixError("Gramian is not positive definite")
        return 1.0, [np.ones((1, 1))]

    def evaluate(self, params):
        acc = min(1.0, -float(params[0][0, 0]))
        return 1.0 - acc, acc, acc


def _write_mnist(root, n_train=20, n_test=10):
    rng = np.random.default_rng(0)
    for prefix, n in (("train", n_train), ("t10k", n_test)):
        write_idx_images(
            root / f"{prefix}-images-idx3-ubyte",
            rng.integers(0, 256, size=(n, 28, 28), dtype=np.uint8),
        )
        write_idx_labels(root / f"{prefix}-labels-idx1-ubyte", np.arange(n) % 10)


def _spirals(tmp_path, **overrides):
    return RunConfig.for_experiment("twospirals", out=tmp_path, **overrides)


class TestMetricsSink:
    def test_header(self, tmp_path):
        sink = CsvMetricsSink(tmp_path / "m.csv")
        sink.write_header()
        sink.close()
        assert (tmp_path / "m.csv").read_text() == "iteration,loss,train_acc,test_acc,seconds\n"
        assert METRICS_HEADER == ("iteration", "loss", "train_acc", "test_acc", "seconds")

    def test_iterations_must_increase(self, tmp_path):
        sink = CsvMetricsSink(tmp_path / "m.csv")
        with pytest.raises(ValueError):
            sink.append(MetricsRecord(0, 1.0, 0.5, 0.5, 0.0))
        sink.write_header()
        sink.append(MetricsRecord(0, 1.0, 0.5, 0.5, 0.0))
        with pytest.raises(ValueError):
            sink.append(MetricsRecord(0, 0.9, 0.5, 0.5, 0.0))
        sink.append(MetricsRecord(5, 0.1, 1.0, 0.75, 2.5))
        sink.close()
        records = read_metrics(tmp_path / "m.csv")
        assert records[1] == MetricsRecord(5, 0.1, 1.0, 0.75, 2.5)


class TestTrainingLoop:
    def _config(self, tmp_path):
        return _spirals(tmp_path, opt="sgd", lr=0.25)

    def test_records_every_step_for_short_runs(self, tmp_path):
        model = ScriptedModel(self._config(tmp_path))
        sink = CsvMetricsSink(tmp_path / "m.csv")
        result = train(model, Sgd(0.25), 3, sink, np.random.default_rng(0), clock=Ticks())
        assert [r.iteration for r in result.records] == [0, 1, 2, 3]
        assert [r.train_acc for r in result.records] == [0.0, 0.25, 0.5, 0.75]
        assert [r.seconds for r in result.records] == [1.0, 2.0, 3.0, 4.0]
        assert read_metrics(tmp_path / "m.csv") == list(result.records)

    def test_stops_once_the_rule_is_met(self, tmp_path):
        model = ScriptedModel(self._config(tmp_path))
        sink = CsvMetricsSink(tmp_path / "m.csv")
        rule = StopRule("test_acc", 0.5, stop=True)
        result = train(model, Sgd(0.25), 10, sink, np.random.default_rng(0), stop_rule=rule)
        assert result.succeeded and result.success_iteration == 2
        assert result.last.iteration == 2

    def test_singular_gramian_fails_the_run(self, tmp_path):
        model = ScriptedModel(self._config(tmp_path), fail_at=2)
        sink = CsvMetricsSink(tmp_path / "m.csv")
        result = train(model, Sgd(0.25), 5, sink, np.random.default_rng(0))
        assert result.failed and not result.succeeded
        assert "positive definite" in result.diagnostic
        assert [r.iteration for r in result.records] == [0, 1]
        assert len(read_metrics(tmp_path / "m.csv")) == 2

    def test_zero_iterations_write_only_the_header(self, tmp_path):
        model = ScriptedModel(self._config(tmp_path))
        sink = CsvMetricsSink(tmp_path / "m.csv")
        result = train(model, Sgd(0.25), 0, sink, np.random.default_rng(0))
        assert result.records == () and result.initial.iteration == 0
        assert result.last == result.initial
        assert read_metrics(tmp_path / "m.csv") == []

    def test_eval_interval(self):
        assert eval_interval(1000) == 1
        assert eval_interval(1001) == 10
        assert eval_interval(150, 50) == 50


class TestRunners:
    def test_zero_iteration_two_spirals(self, tmp_path):
        config = _spirals(tmp_path, iters=0)
        result = run_experiment(config, tmp_path)
        run_dir = tmp_path / "twospirals-target-scu-seed0"
        assert not result.failed
        assert (run_dir / "metrics.csv").read_text().splitlines() == [",".join(METRICS_HEADER)]
        assert RunConfig.load(run_dir / "config.txt") == config
        assert (run_dir / "loss.svg").read_text().lstrip().startswith("<?xml")
        image = (run_dir / "decision_map.ppm").read_bytes()
        header = b"P6\n256 256\n255\n"
        assert image.startswith(header) and len(image) == len(header) + 256 * 256 * 3

    @pytest.mark.parametrize("param", ["weight", "target_scu", "target_ocu"])
    def test_short_two_spirals_run(self, tmp_path, param):
        config = _spirals(tmp_path, iters=3, param=param, batch=50, target_batch=40)
        result = run_experiment(config, tmp_path)
        assert not result.failed
        assert [r.iteration for r in result.records] == [0, 1, 2, 3]
        assert all(np.isfinite(r.loss) for r in result.records)

    def test_runs_repeat_byte_for_byte_without_timing(self, tmp_path):
        outputs = []
        for name in ("a", "b"):
            config = _spirals(tmp_path / name, iters=3, record_time=False, batch=60)
            run_experiment(config, tmp_path)
            outputs.append((tmp_path / name / config.run_name / "metrics.csv").read_bytes())
        assert outputs[0] == outputs[1]

    @pytest.mark.parametrize("experiment", ["bitstream", "adder"])
    def test_short_bit_task_run(self, tmp_path, experiment):
        config = RunConfig.for_experiment(
            experiment,
            delay=1,
            streams=20,
            test_streams=10,
            stream_length=8,
            batch=10,
            target_batch=5,
            target_steps=4,
            iters=2,
            out=tmp_path,
        )
        result = run_experiment(config, tmp_path)
        assert not result.failed
        assert [r.iteration for r in result.records] == [0, 1, 2]
        assert all(0.0 <= r.test_acc <= 1.0 for r in result.records)

    def test_short_mnist_run_on_synthetic_files(self, tmp_path):
        _write_mnist(tmp_path)
        config = RunConfig.for_experiment(
            "mnist",
            train_images=20,
            test_images=10,
            batch=10,
            target_batch=10,
            iters=3,
            dropout=0.2,
            out=tmp_path / "runs",
        )
        result = run_experiment(config, tmp_path)
        assert not result.failed
        # one epoch is 20 / 10 = 2 steps; the last step is always recorded
        assert [r.iteration for r in result.records] == [0, 2, 3]

    def test_mnist_without_data(self, tmp_path):
        config = RunConfig.for_experiment("mnist", out=tmp_path)
        with pytest.raises(MissingDatasetError):
            App(data_dir=tmp_path / "empty").run(config)


class TestSweeps:
    def test_config_per_axis(self, tmp_path):
        base = RunConfig.for_experiment("bitstream", out=tmp_path)
        cfg = sweep_config(base, "N", 6, seed=3)
        assert (cfg.delay, cfg.layers, cfg.seed) == (6, (1, 9, 2), 3)
        assert cfg.out == tmp_path / "N=6"
        assert sweep_config(base, "lambda", 0.01, 0).lam == 0.01
        assert sweep_config(base, "nbar_b", 50, 0).target_batch == 50

    def test_delay_axis_needs_a_bit_task(self, tmp_path):
        with pytest.raises(ValueError):
            sweep_config(_spirals(tmp_path), "N", 2, 0)
        with pytest.raises(ValueError):
            sweep_config(_spirals(tmp_path), "sigma", 2, 0)

    def test_empty_sweep_writes_header(self, tmp_path):
        rows = run_sweep(_spirals(tmp_path), "lambda", [], [0], tmp_path)
        assert rows == []
        assert (tmp_path / "sweep.csv").read_text() == ",".join(SWEEP_HEADER) + "\n"

    def test_small_sweep(self, tmp_path):
        base = _spirals(tmp_path, iters=2, batch=40, target_batch=30)
        rows = run_sweep(base, "lambda", [0.01, 0.1], [0, 1], tmp_path)
        assert [(r.value, r.seeds, r.failed_runs) for r in rows] == [(0.01, 2, 0), (0.1, 2, 0)]
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert len(lines) == 3 and lines[1].startswith("lambda,0.01,2,")
        assert (tmp_path / "lambda=0.1" / "twospirals-target-scu-seed1" / "metrics.csv").exists()

    def test_aggregate_counts_failures(self):
        ok = RunResult("a", success_iteration=4, records=(MetricsRecord(4, 0.1, 1.0, 0.5, 0.0),))
        slow = RunResult("b", success_iteration=8, records=(MetricsRecord(8, 0.2, 1.0, 0.7, 0.0),))
        crashed = RunResult("c", failed=True, diagnostic="boom")
        row = aggregate("lambda", 0.1, [ok, slow, crashed])
        assert (row.successes, row.failed_runs, row.seeds) == (2, 1, 3)
        assert row.median_success_iteration == 6.0
        assert row.median_final_test_acc == pytest.approx(0.6)
        assert row.as_row()[:5] == ["lambda", "0.1", "3", "2", repr(2 / 3)]


class TestCli:
    def test_zero_iteration_run(self, tmp_path):
        argv = ["twospirals", "--iters", "0", "--param", "target-ocu", "--out", str(tmp_path)]
        code = cli_main(argv)
        assert code == 0
        assert (tmp_path / "twospirals-target-ocu-seed0" / "metrics.csv").exists()

    def test_config_file_and_flags(self, tmp_path):
        path = tmp_path / "run.txt"
        path.write_text("experiment=twospirals\nlambda=0.01\niters=50\n")
        argv = ["twospirals", "--config", str(path), "--iters", "0", "--out", str(tmp_path)]
        code = cli_main(argv)
        assert code == 0
        saved = RunConfig.load(tmp_path / "twospirals-target-scu-seed0" / "config.txt")
        assert (saved.lam, saved.iters) == (0.01, 0)

    @pytest.mark.parametrize(
        "argv",
        [
            ["twospirals", "--batch", "500"],
            ["adder", "--delay", "-1"],
            ["twospirals", "--config", "/nonexistent/run.txt"],
            ["sweep", "--axis", "lambda", "--values", "0.1"],
        ],
    )
    def test_configuration_errors_exit_2(self, argv, tmp_path):
        assert cli_main([*argv, "--out", str(tmp_path)]) == 2

    def test_unbuildable_network_exits_2(self, tmp_path, monkeypatch):
        _write_mnist(tmp_path)
        monkeypatch.setattr(cli, "App", lambda: App(data_dir=tmp_path))
        path = tmp_path / "run.txt"
        path.write_text(
            "experiment=mnist\nconv=3-8-3\ntrain_images=20\ntest_images=10\n"
            "batch=10\ntarget_batch=10\n"
        )
        assert cli_main(["mnist", "--config", str(path), "--out", str(tmp_path / "runs")]) == 2

    def test_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            cli_main(["twospirals", "--param", "hessian"])
        assert excinfo.value.code == 2

    def test_sweep_on_wrong_axis_exits_2(self, tmp_path):
        argv = ["sweep", "--experiment", "twospirals", "--axis", "N", "--values", "2"]
        assert cli_main([*argv, "--out", str(tmp_path)]) == 2

    def test_verify(self):
        assert cli_main(["verify", "--cases", "5"]) == 0


@pytest.mark.slow
def test_two_spirals_target_training_reduces_loss(tmp_path):
    result = run_experiment(_spirals(tmp_path, iters=300), tmp_path)
    assert not result.failed
    assert result.last.loss < result.initial.loss
