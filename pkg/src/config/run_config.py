"""Per-run experiment configuration.

Run configs are flat ``key=value`` text files (``#`` comments allowed) read with
python-dotenv. Command-line flags override file values, and every run writes its
effective config back out with ``dump()`` so it can be replayed exactly.
"""

from collections.abc import Mapping
from pathlib import Path
from typing import Any, Literal

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .Config import get_config

Experiment = Literal["twospirals", "bitstream", "adder", "mnist"]
Parameterization = Literal["weight", "target_scu", "target_ocu"]

EXPERIMENTS: tuple[str, ...] = ("twospirals", "bitstream", "adder", "mnist")

DEFAULT_DELAY = {"bitstream": 4, "adder": 2}


def _defaults(experiment: str, delay: int, param: str) -> dict[str, Any]:
    if experiment == "twospirals":
        return {
            "layers": "2-5-5-5-2",
            "all_shortcuts": True,
            "activation": "tanh",
            "lambda": 0.001,
            "sigma": 1.0,
            "batch": 194,
            "target_batch": 194,
            "opt": "adam",
            "lr": 0.01,
            "iters": 4000,
            "success_metric": "train_acc",
            "success_threshold": 1.0,
        }
    if experiment in ("bitstream", "adder"):
        hidden = delay + (3 if experiment == "bitstream" else 5)
        return {
            "layers": f"1-{hidden}-2",
            "activation": "tanh",
            "delay": delay,
            "lambda": 0.1,
            "sigma": 1.0,
            "batch": 100,
            "target_batch": 100,
            "opt": "adam",
            "lr": 0.001,
            "iters": 20000,
            "streams": 2000,
            "test_streams": 500,
            "stop_on_success": True,
        }
    if experiment == "mnist":
        return {
            "conv": "3-8-2,3-16-2",
            "layers": "32-10",
            "activation": "lrelu",
            "lambda": 0.1,
            "sigma": 0.1,
            "batch": 100,
            "target_batch": 100,
            "opt": "adam",
            "lr": 0.001 if param == "weight" else 0.01,
            "iters": 150,
            "success_threshold": 0.9,
        }
    raise ValueError(f"Unknown experiment '{experiment}'. Available: {', '.join(EXPERIMENTS)}")


def _canonical(values: dict[str, Any]) -> dict[str, Any]:
    if "lam" in values:
        values["lambda"] = values.pop("lam")
    return values


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ",".join("-".join(str(d) for d in triple) for triple in value)
        return "-".join(str(d) for d in value)
    return str(value)


class RunConfig(BaseModel):
    """Everything one training run depends on."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    experiment: Experiment
    param: Parameterization = "target_scu"
    layers: tuple[int, ...]
    all_shortcuts: bool = False
    activation: Literal["tanh", "lrelu"] = "tanh"
    conv: tuple[tuple[int, int, int], ...] = ()
    opt: Literal["sgd", "adam"] = "adam"
    lr: float = Field(gt=0.0)
    lam: float = Field(alias="lambda", ge=0.0)
    batch: int = Field(gt=0)
    target_batch: int = Field(gt=0)
    target_steps: int | None = Field(default=None, gt=0)
    sigma: float = Field(default=1.0, gt=0.0)
    dropout: float = Field(default=0.0, ge=0.0, lt=1.0)
    iters: int = Field(ge=0)
    seed: int = 0
    out: Path | None = None
    delay: int = Field(default=0, ge=0)
    streams: int = Field(default=2000, gt=0)
    test_streams: int = Field(default=500, gt=0)
    stream_length: int | None = Field(default=None, gt=0)
    train_images: int = Field(default=5000, gt=0)
    test_images: int = Field(default=1000, gt=0)
    eval_every: int | None = Field(default=None, gt=0)
    record_time: bool = True
    success_metric: Literal["train_acc", "test_acc"] = "test_acc"
    success_threshold: float = Field(default=0.99, gt=0.0, le=1.0)
    stop_on_success: bool = False

    @field_validator("param", mode="before")
    @classmethod
    def _dashes_to_underscores(cls, v: Any) -> Any:
        return v.replace("-", "_") if isinstance(v, str) else v

    @field_validator("layers", mode="before")
    @classmethod
    def _parse_layers(cls, v: Any) -> Any:
        if isinstance(v, str):
            return tuple(int(d) for d in v.split("-") if d.strip())
        return v

    @field_validator("conv", mode="before")
    @classmethod
    def _parse_conv(cls, v: Any) -> Any:
        if isinstance(v, str):
            triples = [part.strip() for part in v.split(",") if part.strip()]
            return tuple(tuple(int(d) for d in part.split("-")) for part in triples)
        return v

    @field_validator("target_steps", "stream_length", "eval_every", "out", mode="before")
    @classmethod
    def _blank_is_none(cls, v: Any) -> Any:
        if isinstance(v, str) and v.strip().lower() in ("", "none"):
            return None
        return v

    @model_validator(mode="after")
    def _check_architecture(self) -> "RunConfig":
        if any(d <= 0 for d in self.layers):
            raise ValueError(f"layer widths must be positive, got {self.layers}")
        if self.experiment == "twospirals":
            if len(self.layers) < 2 or self.layers[0] != 2 or self.layers[-1] != 2:
                raise ValueError(f"two-spirals needs a 2-...-2 network, got {self.layers}")
            if max(self.batch, self.target_batch) > 194:
                raise ValueError("batch sizes exceed the 194 training points")
        elif self.experiment in ("bitstream", "adder"):
            if len(self.layers) < 3 or self.layers[0] != 1 or self.layers[-1] != 2:
                raise ValueError(f"bit-stream tasks need a 1-...-2 network, got {self.layers}")
            if self.activation != "tanh":
                raise ValueError("recurrent networks use tanh")
            if self.dropout:
                raise ValueError("dropout is not supported for recurrent networks")
            if max(self.batch, self.target_batch) > self.streams:
                raise ValueError(f"batch sizes exceed the {self.streams} training streams")
            if self.target_steps is not None and self.target_steps > self.sequence_length:
                raise ValueError(
                    f"target_steps {self.target_steps} exceeds stream length {self.sequence_length}"
                )
            if self.sequence_length <= self.delay:
                raise ValueError(
                    f"stream length {self.sequence_length} leaves no step after delay {self.delay}"
                )
        elif self.experiment == "mnist":
            if not self.conv or self.layers[-1] != 10:
                raise ValueError("mnist needs conv blocks and dense layers ending in 10")
            if max(self.batch, self.target_batch) > self.train_images:
                raise ValueError(f"batch sizes exceed the {self.train_images} training images")
        return self

    @property
    def sequence_length(self) -> int:
        return self.stream_length or self.delay + 50

    @property
    def evaluation_interval(self) -> int | None:
        """Steps between evaluations; MNIST defaults to once per epoch of the reduced set."""
        if self.eval_every is None and self.experiment == "mnist":
            return max(1, self.train_images // self.batch)
        return self.eval_every

    @property
    def output_root(self) -> Path:
        """``out``, or the configured output directory when unset."""
        return self.out or get_config().output_dir

    @property
    def run_name(self) -> str:
        return f"{self.experiment}-{self.param.replace('_', '-')}-seed{self.seed}"

    def dump(self) -> str:
        """The config as ``key=value`` lines, loadable by ``RunConfig.load``."""
        values = self.model_dump(by_alias=True)
        return "".join(f"{key}={_format(value)}\n" for key, value in values.items())

    def replace(self, **changes: Any) -> "RunConfig":
        values = self.model_dump(by_alias=True)
        values.update(_canonical(dict(changes)))
        return RunConfig.model_validate(values)

    @classmethod
    def for_experiment(cls, experiment: str, **overrides: Any) -> "RunConfig":
        """Published defaults for ``experiment`` with ``overrides`` on top."""
        param = str(overrides.get("param", "target_scu")).replace("-", "_")
        delay = int(overrides.get("delay", DEFAULT_DELAY.get(experiment, 0)))
        values = _defaults(experiment, delay, param)
        values.update(_canonical(dict(overrides)))
        values["experiment"] = experiment
        return cls.model_validate(values)

    @classmethod
    def load(
        cls, path: Path | None = None, overrides: Mapping[str, Any] | None = None
    ) -> "RunConfig":
        """Read a key=value file, apply non-None ``overrides``, fill experiment defaults."""
        values: dict[str, Any] = {}
        if path is not None:
            if not Path(path).exists():
                raise FileNotFoundError(f"run config {path} not found")
            values.update({k: v for k, v in dotenv_values(path).items() if v is not None})
        values.update({k: v for k, v in (overrides or {}).items() if v is not None})
        experiment = values.pop("experiment", None)
        if experiment is None:
            raise ValueError("run config does not name an experiment")
        return cls.for_experiment(str(experiment), **values)
