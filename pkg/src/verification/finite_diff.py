"""Central finite differences and error measures used as independent gradient oracles."""

from collections.abc import Callable, Sequence

import numpy as np

from tensor import ArgumentError, Matrix


class NonFiniteLossError(ArithmeticError):
    """The function under test returned NaN or infinity."""


def _evaluate(f: Callable[[list[Matrix]], float], params: list[Matrix]) -> float:
    value = float(f(params))
    if not np.isfinite(value):
        raise NonFiniteLossError(f"loss evaluated to {value}")
    return value


def finite_diff_gradient(
    f: Callable[[list[Matrix]], float], params: Sequence[Matrix], h: float = 1e-5
) -> list[Matrix]:
    """(f(p + h·e) - f(p - h·e)) / 2h for every coordinate of every parameter matrix.

    Raises:
        ArgumentError: if ``h`` is not positive
        NonFiniteLossError: if any evaluation of ``f`` is not finite
    """
    if not h > 0.0:
        raise ArgumentError(f"step h must be positive, got {h}")
    work = [np.array(p, dtype=np.float64) for p in params]
    grads = [np.zeros_like(p) for p in work]
    for p, g in zip(work, grads, strict=True):
        flat, out = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            plus = _evaluate(f, work)
            flat[i] = original - h
            minus = _evaluate(f, work)
            flat[i] = original
            out[i] = (plus - minus) / (2.0 * h)
    return grads


def relative_error(a: Sequence[Matrix], b: Sequence[Matrix]) -> float:
    """‖a - b‖ / max(‖a‖, ‖b‖) over all matrices together; 0 when both are zero."""
    diff = np.sqrt(sum(float(np.sum((x - y) ** 2)) for x, y in zip(a, b, strict=True)))
    scale = max(
        np.sqrt(sum(float(np.sum(x * x)) for x in a)),
        np.sqrt(sum(float(np.sum(y * y)) for y in b)),
    )
    return 0.0 if scale == 0.0 else float(diff / scale)


def max_abs(matrices: Sequence[Matrix]) -> float:
    return max((float(np.max(np.abs(m))) for m in matrices if m.size), default=0.0)
