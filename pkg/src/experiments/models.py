"""Trainable models: one network family in one parameterization.

A model owns its data and hands the training loop a flat list of matrices (weights or
targets) plus the loss and gradient with respect to them. The loop never needs to know
which parameterization it is driving.
"""

import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence

import numpy as np

from benchmarks import LabeledBatch, SequenceBatch
from cnn import (
    CnnSpec,
    CnnTargetParams,
    FeatureMap,
    cnn_dropout_masks,
    cnn_loss_and_accuracy,
    cnn_loss_and_target_gradient,
    cnn_loss_and_weight_gradient,
    cnn_targets_to_weights,
    init_cnn_targets,
    init_cnn_weights,
    project_cnn_targets,
)
from config.run_config import RunConfig
from ffnn import (
    NetworkSpec,
    TargetParams,
    WeightParams,
    forward,
    init_targets,
    init_weights,
    loss_and_accuracy,
    loss_and_target_gradient,
    loss_and_weight_gradient,
    output_probabilities,
    paired_layer_masks,
    project_targets,
    target_loss_and_gradient_autograd,
    targets_to_weights,
)
from ffnn.mapping import Untangling
from rnn import (
    RnnSpec,
    RnnTargetParams,
    init_rnn_weights,
    rnn_init_targets,
    rnn_loss_and_accuracy,
    rnn_loss_and_target_gradient,
    rnn_loss_and_weight_gradient,
    rnn_project_targets,
    rnn_targets_to_weights_ocu,
    rnn_targets_to_weights_scu,
)
from tensor import Matrix

logger = logging.getLogger(__name__)

MNIST_SIDE = 28

Evaluation = tuple[float, float, float]


def _sample_columns(size: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """All columns when ``n`` covers the set, otherwise ``n`` distinct columns in order."""
    if n >= size:
        return np.arange(size)
    return np.sort(rng.choice(size, n, replace=False))


class Model(ABC):
    """Loss, gradient and evaluation over a flat parameter list."""

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.untangling: Untangling = "ocu" if config.param == "target_ocu" else "scu"

    @property
    def in_target_space(self) -> bool:
        return self.config.param != "weight"

    @abstractmethod
    def initial_params(self, rng: np.random.Generator) -> list[Matrix]:
        """Initial weights, or initial targets after one projection."""

    @abstractmethod
    def loss_and_gradient(
        self, params: Sequence[Matrix], rng: np.random.Generator
    ) -> tuple[float, list[Matrix]]:
        """Loss on a freshly drawn minibatch and its gradient with respect to ``params``."""

    @abstractmethod
    def evaluate(self, params: Sequence[Matrix]) -> Evaluation:
        """(full training loss, training accuracy, test accuracy)."""


class FfnnModel(Model):
    def __init__(
        self, spec: NetworkSpec, train: LabeledBatch, test: LabeledBatch, config: RunConfig
    ) -> None:
        super().__init__(config)
        self.spec = spec
        self.train = train
        self.test = test
        self._xbar: Matrix | None = None

    def initial_params(self, rng: np.random.Generator) -> list[Matrix]:
        if not self.in_target_space:
            return init_weights(self.spec, rng, "glorot").as_list()
        columns = _sample_columns(self.train.size, self.config.target_batch, rng)
        self._xbar = self.train.inputs[:, columns]
        t = init_targets(
            self.spec, len(columns), self.config.sigma, rng, xbar=self._xbar
        )
        return project_targets(self.spec, t, self.config.lam).as_list()

    def _targets(self, params: Sequence[Matrix]) -> TargetParams:
        if self._xbar is None:
            raise ValueError("initial_params() must run before targets can be used")
        return TargetParams(tuple(params), self._xbar)

    def weights(self, params: Sequence[Matrix]) -> WeightParams:
        if not self.in_target_space:
            return WeightParams(tuple(params))
        return targets_to_weights(
            self.spec, self._targets(params), self.config.lam, self.untangling
        )

    def loss_and_gradient(
        self, params: Sequence[Matrix], rng: np.random.Generator
    ) -> tuple[float, list[Matrix]]:
        batch = self.train.subset(_sample_columns(self.train.size, self.config.batch, rng))
        nbar_b = self._xbar.shape[1] if self._xbar is not None else 0
        x_masks, xbar_masks = (None, None)
        if self.config.dropout > 0.0:
            x_masks, xbar_masks = paired_layer_masks(
                self.spec, batch.size, nbar_b, self.config.dropout, rng
            )
        if not self.in_target_space:
            return loss_and_weight_gradient(
                self.spec, WeightParams(tuple(params)), batch.inputs, batch.labels, x_masks
            )
        t = self._targets(params)
        if self.untangling == "scu":
            return loss_and_target_gradient(
                self.spec, t, self.config.lam, batch.inputs, batch.labels, x_masks, xbar_masks
            )
        return target_loss_and_gradient_autograd(
            self.spec, t, self.config.lam, batch.inputs, batch.labels, "ocu", x_masks, xbar_masks
        )

    def evaluate(self, params: Sequence[Matrix]) -> Evaluation:
        w = self.weights(params)
        loss, train_acc = loss_and_accuracy(self.spec, w, self.train.inputs, self.train.labels)
        _, test_acc = loss_and_accuracy(self.spec, w, self.test.inputs, self.test.labels)
        return loss, train_acc, test_acc

    def class_probabilities(self, params: Sequence[Matrix], points: Matrix) -> Matrix:
        y = forward(self.spec, self.weights(params), points).output
        return output_probabilities(self.spec, y)


class RnnModel(Model):
    def __init__(
        self, spec: RnnSpec, train: SequenceBatch, test: SequenceBatch, config: RunConfig
    ) -> None:
        super().__init__(config)
        self.spec = spec
        self.train = train
        self.test = test
        self._xbar: tuple[Matrix, ...] | None = None

    def initial_params(self, rng: np.random.Generator) -> list[Matrix]:
        if not self.in_target_space:
            return init_rnn_weights(self.spec, rng)
        columns = _sample_columns(self.train.size, self.config.target_batch, rng)
        self._xbar = self.train.subset(columns).inputs[: self.config.target_steps]
        t = rnn_init_targets(self.spec, self._xbar, self.config.sigma, rng)
        return rnn_project_targets(self.spec, t, self.config.lam).as_list()

    def _targets(self, params: Sequence[Matrix]) -> RnnTargetParams:
        if self._xbar is None:
            raise ValueError("initial_params() must run before targets can be used")
        return RnnTargetParams(tuple(params), self._xbar)

    def weights(self, params: Sequence[Matrix]) -> list[Matrix]:
        if not self.in_target_space:
            return list(params)
        if self.untangling == "scu":
            return rnn_targets_to_weights_scu(self.spec, self._targets(params), self.config.lam)
        return rnn_targets_to_weights_ocu(self.spec, self._targets(params), self.config.lam)

    def loss_and_gradient(
        self, params: Sequence[Matrix], rng: np.random.Generator
    ) -> tuple[float, list[Matrix]]:
        batch = self.train.subset(_sample_columns(self.train.size, self.config.batch, rng))
        if not self.in_target_space:
            return rnn_loss_and_weight_gradient(
                self.spec, params, batch.inputs, batch.labels, batch.loss_mask
            )
        return rnn_loss_and_target_gradient(
            self.spec,
            self._targets(params),
            self.config.lam,
            batch.inputs,
            batch.labels,
            batch.loss_mask,
            self.untangling,
        )

    def evaluate(self, params: Sequence[Matrix]) -> Evaluation:
        w = self.weights(params)
        loss, train_acc = rnn_loss_and_accuracy(
            self.spec, w, self.train.inputs, self.train.labels, self.train.loss_mask
        )
        _, test_acc = rnn_loss_and_accuracy(
            self.spec, w, self.test.inputs, self.test.labels, self.test.loss_mask
        )
        return loss, train_acc, test_acc


def as_images(x: Matrix) -> FeatureMap:
    return FeatureMap.from_columns(x, 1, MNIST_SIDE, MNIST_SIDE)


class CnnModel(Model):
    def __init__(
        self, spec: CnnSpec, train: LabeledBatch, test: LabeledBatch, config: RunConfig
    ) -> None:
        super().__init__(config)
        self.spec = spec
        self.train = train
        self.test = test
        self._xbar: FeatureMap | None = None

    def initial_params(self, rng: np.random.Generator) -> list[Matrix]:
        if not self.in_target_space:
            return init_cnn_weights(self.spec, rng)
        columns = _sample_columns(self.train.size, self.config.target_batch, rng)
        self._xbar = as_images(self.train.inputs[:, columns])
        t = init_cnn_targets(self.spec, self._xbar, self.config.sigma, rng)
        return project_cnn_targets(self.spec, t, self.config.lam).as_list()

    def _targets(self, params: Sequence[Matrix]) -> CnnTargetParams:
        if self._xbar is None:
            raise ValueError("initial_params() must run before targets can be used")
        return CnnTargetParams(tuple(params), self._xbar)

    def weights(self, params: Sequence[Matrix]) -> list[Matrix]:
        if not self.in_target_space:
            return list(params)
        return cnn_targets_to_weights(
            self.spec, self._targets(params), self.config.lam, self.untangling
        )

    def loss_and_gradient(
        self, params: Sequence[Matrix], rng: np.random.Generator
    ) -> tuple[float, list[Matrix]]:
        batch = self.train.subset(_sample_columns(self.train.size, self.config.batch, rng))
        images = as_images(batch.inputs)
        rate = self.config.dropout
        x_masks = cnn_dropout_masks(self.spec, batch.size, rate, rng) if rate else None
        if not self.in_target_space:
            return cnn_loss_and_weight_gradient(self.spec, params, images, batch.labels, x_masks)
        t = self._targets(params)
        xbar_masks = cnn_dropout_masks(self.spec, t.nbar_b, rate, rng) if rate else None
        return cnn_loss_and_target_gradient(
            self.spec,
            t,
            self.config.lam,
            images,
            batch.labels,
            self.untangling,
            x_masks,
            xbar_masks,
        )

    def evaluate(self, params: Sequence[Matrix]) -> Evaluation:
        w = self.weights(params)
        loss, train_acc = cnn_loss_and_accuracy(
            self.spec, w, as_images(self.train.inputs), self.train.labels
        )
        _, test_acc = cnn_loss_and_accuracy(
            self.spec, w, as_images(self.test.inputs), self.test.labels
        )
        return loss, train_acc, test_acc
