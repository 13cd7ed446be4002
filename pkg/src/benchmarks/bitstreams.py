"""Delayed-recall and delayed-addition bit streams for recurrent networks."""

import numpy as np

from .batches import SequenceBatch, one_hot


def delayed_bits(bits: np.ndarray, delay: int) -> np.ndarray:
    """Each column shifted ``delay`` steps later, zero-filled at the start."""
    out = np.zeros_like(bits)
    out[delay:] = bits[: bits.shape[0] - delay]
    return out


def delayed_sum_bits(bits: np.ndarray, delay: int) -> np.ndarray:
    """Little-endian sum of each stream and its ``delay``-step delayed copy, carry propagated."""
    other = delayed_bits(bits, delay)
    out = np.zeros_like(bits)
    carry = np.zeros(bits.shape[1:], dtype=bits.dtype)
    for t in range(bits.shape[0]):
        total = bits[t] + other[t] + carry
        out[t] = total % 2
        carry = total // 2
    return out


def _batch(bits: np.ndarray, labels: np.ndarray, delay: int) -> SequenceBatch:
    n_steps = bits.shape[0]
    return SequenceBatch(
        tuple(bits[t : t + 1].astype(np.float64) for t in range(n_steps)),
        tuple(one_hot(labels[t], 2) for t in range(n_steps)),
        tuple(t >= delay for t in range(n_steps)),
    )


def _random_bits(count: int, length: int, seed: int | np.random.Generator) -> np.ndarray:
    if count <= 0 or length <= 0:
        raise ValueError(f"need positive count and length, got {count} and {length}")
    return np.random.default_rng(seed).integers(0, 2, size=(length, count))


def gen_delay_bitstream(
    delay: int, count: int, length: int | None = None, seed: int | np.random.Generator = 0
) -> SequenceBatch:
    """``count`` uniform random streams; the label at step t is the input at t - delay.

    The first ``delay`` steps are masked out of the loss. ``length`` defaults to delay + 50.
    """
    if delay < 0:
        raise ValueError(f"delay must be nonnegative, got {delay}")
    bits = _random_bits(count, delay + 50 if length is None else length, seed)
    return _batch(bits, delayed_bits(bits, delay), delay)


def gen_delay_adder(
    delay: int, count: int, length: int | None = None, seed: int | np.random.Generator = 0
) -> SequenceBatch:
    """Label streams are the running binary sum of each stream with its delayed copy."""
    if delay < 0:
        raise ValueError(f"delay must be nonnegative, got {delay}")
    bits = _random_bits(count, delay + 50 if length is None else length, seed)
    return _batch(bits, delayed_sum_bits(bits, delay), delay)
