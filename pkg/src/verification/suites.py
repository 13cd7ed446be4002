"""Verification suites run by the ``verify`` subcommand.

Each suite draws its cases from a seeded generator and reports the worst error it saw
against a fixed tolerance.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from benchmarks.batches import one_hot
from cnn import ConvLayerSpec, FeatureMap, conv_forward, extract_patches
from ffnn.mapping import init_targets, project_targets
from ffnn.network import NetworkSpec, TargetParams
from ffnn.taped import target_loss, target_loss_and_gradient_autograd
from ffnn.target_gradient import loss_and_target_gradient
from tensor import Matrix

from .finite_diff import finite_diff_gradient, relative_error
from .flops import flop_estimate
from .identities import branch_disagreement, check_lemma_identity
from .preconditioner import DEFAULT_COLUMN_CAP, first_order_slope

logger = logging.getLogger(__name__)

# (kind, dims, nbar_b, n_b) -> exact count
FLOP_PINS: tuple[tuple[str, tuple[int, ...], int, int, int], ...] = (
    ("ffnn_layer", (2, 3), 5, 5, 78),
    ("ffnn_layer", (5, 5), 194, 194, 125 + 2 * 25 * 194 + 25 * 194),
    ("ffnn_layer", (10, 4), 6, 6, 216 + 2 * 36 * 10 + 40 * 6),
    ("ffnn_layer", (3, 3), 3, 3, 27 + 2 * 9 * 3 + 9 * 3),
    ("cnn_layer", (3, 3, 1, 8, 784), 100, 100, 729 + 2 * 81 * 78400 + 72 * 78400),
)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    cases: int
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance


@dataclass(frozen=True)
class FfnnProblem:
    spec: NetworkSpec
    targets: TargetParams
    lam: float
    x: Matrix
    labels: Matrix


def random_ffnn_problem(rng: np.random.Generator) -> FfnnProblem:
    """A small random network, random (sometimes projected) targets and a labelled batch."""
    n_weight_layers = int(rng.integers(2, 5))
    widths = tuple(int(d) for d in rng.integers(1, 7, size=n_weight_layers + 1))
    head = "softmax_xent" if rng.random() < 0.5 else "mse_linear"
    if head == "softmax_xent":
        widths = (*widths[:-1], max(2, widths[-1]))
    spec = NetworkSpec(
        widths,
        all_shortcuts=bool(rng.random() < 0.5),
        hidden_activation="tanh" if rng.random() < 0.5 else "lrelu",
        output_head=head,
    )
    nbar_b = int(rng.integers(3, 11))
    n_b = int(rng.integers(3, 9))
    lam = float(rng.choice([0.01, 0.1]))
    xbar = rng.standard_normal((widths[0], nbar_b))
    targets = init_targets(spec, nbar_b, 1.0, rng, xbar=xbar)
    if rng.random() < 0.5:
        targets = project_targets(spec, targets, lam)
    x = rng.standard_normal((widths[0], n_b))
    if head == "softmax_xent":
        labels = one_hot(rng.integers(0, widths[-1], size=n_b), widths[-1])
    else:
        labels = rng.standard_normal((widths[-1], n_b))
    return FfnnProblem(spec, targets, lam, x, labels)


def gradient_triangle(problem: FfnnProblem, h: float = 1e-5) -> tuple[float, float]:
    """Relative error of the closed-form target gradient against autograd, then against
    central finite differences."""
    spec, t, lam, x, labels = (
        problem.spec,
        problem.targets,
        problem.lam,
        problem.x,
        problem.labels,
    )
    _, manual = loss_and_target_gradient(spec, t, lam, x, labels)
    _, taped = target_loss_and_gradient_autograd(spec, t, lam, x, labels)
    numeric = finite_diff_gradient(
        lambda targets: target_loss(spec, t.with_targets(targets), lam, x, labels),
        t.as_list(),
        h,
    )
    return relative_error(manual, taped), relative_error(manual, numeric)


def naive_convolution(images: np.ndarray, w: Matrix, spec: ConvLayerSpec) -> np.ndarray:
    """Sliding-window "same" convolution, one output element at a time. Returns (N, O, H, W)."""
    n, channels, height, width = images.shape
    top, left = (spec.kernel_h - 1) // 2, (spec.kernel_w - 1) // 2
    out = np.zeros((n, spec.out_channels, height, width))
    for b in range(n):
        for o in range(spec.out_channels):
            for y in range(height):
                for x in range(width):
                    total = w[o, 0]
                    for ky in range(spec.kernel_h):
                        for kx in range(spec.kernel_w):
                            sy, sx = y + ky - top, x + kx - left
                            if not (0 <= sy < height and 0 <= sx < width):
                                continue
                            for c in range(channels):
                                row = 1 + (ky * spec.kernel_w + kx) * channels + c
                                total += w[o, row] * images[b, c, sy, sx]
                    out[b, o, y, x] = total
    return out


def _gradient_suites(rng: np.random.Generator, cases: int, h: float) -> list[SuiteResult]:
    worst_taped, worst_numeric = 0.0, 0.0
    for _ in range(cases):
        taped_err, numeric_err = gradient_triangle(random_ffnn_problem(rng), h)
        worst_taped = max(worst_taped, taped_err)
        worst_numeric = max(worst_numeric, numeric_err)
    return [
        SuiteResult("target gradient vs autograd", cases, worst_taped, 1e-8),
        SuiteResult("target gradient vs finite differences", cases, worst_numeric, 1e-4),
    ]


def _random_matrix(rng: np.random.Generator) -> Matrix:
    rows, cols = (int(d) for d in rng.integers(1, 9, size=2))
    if rng.random() < 0.3:
        rank = int(rng.integers(1, min(rows, cols) + 1))
        return rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))
    return rng.standard_normal((rows, cols))


def _pseudoinverse_suites(rng: np.random.Generator, cases: int) -> list[SuiteResult]:
    worst_branch, worst_lemma = 0.0, 0.0
    for i in range(cases):
        a = _random_matrix(rng)
        lam = 1e-3 if i % 2 else 0.1
        worst_branch = max(worst_branch, branch_disagreement(a, lam))
        residual = check_lemma_identity(a, lam)
        worst_lemma = max(worst_lemma, residual / (1.0 + float(np.linalg.norm(a))))
    return [
        SuiteResult("pseudoinverse branches", cases, worst_branch, 1e-9),
        SuiteResult("pseudoinverse lemma identity", cases, worst_lemma, 1e-8),
    ]


def _preconditioner_suite(rng: np.random.Generator, cap: int, cases: int = 3) -> SuiteResult:
    """Distance of the first-order slope from 2 on tiny 2-3-2 networks."""
    spec = NetworkSpec((2, 3, 2), output_head="mse_linear")
    worst = 0.0
    for _ in range(cases):
        xbar = rng.standard_normal((2, 4))
        t = init_targets(spec, 4, 1.0, rng, xbar=xbar)
        x = rng.standard_normal((2, 5))
        labels = rng.standard_normal((2, 5))
        worst = max(worst, abs(first_order_slope(spec, t, 0.1, x, labels, cap=cap) - 2.0))
    return SuiteResult("preconditioner first-order slope", cases, worst, 0.3)


def _flop_suite() -> SuiteResult:
    worst = 0.0
    for kind, dims, nbar_b, n_b, expected in FLOP_PINS:
        count = flop_estimate(kind, dims, nbar_b, n_b).count  # type: ignore[arg-type]
        worst = max(worst, float(abs(count - expected)))
    return SuiteResult("flop estimator pins", len(FLOP_PINS), worst, 0.0)


def _conv_suite(rng: np.random.Generator, cases: int) -> SuiteResult:
    worst = 0.0
    for _ in range(cases):
        kernel = int(rng.choice([1, 3, 5]))
        spec = ConvLayerSpec(kernel, kernel, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        side = int(rng.integers(1, 7))
        images = rng.standard_normal((int(rng.integers(1, 4)), spec.in_channels, side, side))
        w = rng.standard_normal(spec.kernel_shape)
        fmap = FeatureMap.from_tensor(images)
        fast = conv_forward(spec, w, extract_patches(fmap, spec), activation="identity")
        gap = np.abs(fast.to_tensor() - naive_convolution(images, w, spec))
        worst = max(worst, float(np.max(gap)))
    return SuiteResult("convolution vs sliding window", cases, worst, 1e-10)


def run_verification_suites(
    seed: int = 0, cases: int = 20, h: float = 1e-5, cap: int = DEFAULT_COLUMN_CAP
) -> list[SuiteResult]:
    """Run every suite; ``cases`` scales the random ones (matrix suites use 5x as many).

    ``h`` is the finite-difference step and ``cap`` bounds the Jacobian the preconditioner
    suite may assemble.
    """
    rng = np.random.default_rng(seed)
    runners: list[Callable[[], list[SuiteResult]]] = [
        lambda: _gradient_suites(rng, cases, h),
        lambda: [_preconditioner_suite(rng, cap)],
        lambda: _pseudoinverse_suites(rng, 5 * cases),
        lambda: [_flop_suite()],
        lambda: [_conv_suite(rng, cases)],
    ]
    results: list[SuiteResult] = []
    for run in runners:
        for result in run():
            logger.info(
                "%s: %s (worst %.3e, tolerance %.1e, %d cases)",
                result.name,
                "pass" if result.passed else "FAIL",
                result.worst,
                result.tolerance,
                result.cases,
            )
            results.append(result)
    return results
