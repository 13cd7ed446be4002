"""Tape primitives for patch extraction, max-pooling and flattening."""

import numpy as np

from autodiff import register_primitive
from tensor import Matrix, ShapeError


def _padding(k: int) -> tuple[int, int]:
    before = (k - 1) // 2
    return before, k - 1 - before


def im2col_forward(
    a: Matrix, *, batch: int, height: int, width: int, kernel_h: int, kernel_w: int
) -> Matrix:
    channels = a.shape[0]
    if a.shape[1] != batch * height * width:
        raise ShapeError(f"im2col {batch}x{height}x{width}", a.shape)
    images = a.reshape(channels, batch, height, width)
    padded = np.pad(images, ((0, 0), (0, 0), _padding(kernel_h), _padding(kernel_w)))
    cols = batch * height * width
    rows = [np.ones((1, cols))]
    for ky in range(kernel_h):
        for kx in range(kernel_w):
            window = padded[:, :, ky : ky + height, kx : kx + width]
            rows.append(window.reshape(channels, cols))
    return np.vstack(rows)


def _im2col_bwd(
    g: Matrix,
    ops: list[Matrix],
    out: Matrix,
    *,
    batch: int,
    height: int,
    width: int,
    kernel_h: int,
    kernel_w: int,
) -> tuple[Matrix]:
    channels = ops[0].shape[0]
    top, bottom = _padding(kernel_h)
    left, right = _padding(kernel_w)
    padded = np.zeros((channels, batch, height + top + bottom, width + left + right))
    row = 1
    for ky in range(kernel_h):
        for kx in range(kernel_w):
            block = g[row : row + channels].reshape(channels, batch, height, width)
            padded[:, :, ky : ky + height, kx : kx + width] += block
            row += channels
    inner = padded[:, :, top : top + height, left : left + width]
    return (np.ascontiguousarray(inner.reshape(channels, batch * height * width)),)


def _windows(a: Matrix, batch: int, height: int, width: int, k: int) -> np.ndarray:
    if height % k or width % k:
        raise ShapeError(f"maxpool k={k}", (height, width))
    channels = a.shape[0]
    blocks = a.reshape(channels, batch, height // k, k, width // k, k)
    return blocks.transpose(0, 1, 2, 4, 3, 5).reshape(
        channels, batch, height // k, width // k, k * k
    )


def maxpool_forward(a: Matrix, *, batch: int, height: int, width: int, k: int) -> Matrix:
    pooled = _windows(a, batch, height, width, k).max(axis=-1)
    return np.ascontiguousarray(pooled.reshape(a.shape[0], -1))


def _maxpool_bwd(
    g: Matrix, ops: list[Matrix], out: Matrix, *, batch: int, height: int, width: int, k: int
) -> tuple[Matrix]:
    a = ops[0]
    channels = a.shape[0]
    windows = _windows(a, batch, height, width, k)
    # the first maximal entry of each window takes the whole adjoint
    winner = windows.argmax(axis=-1)[..., None]
    grad = np.zeros_like(windows)
    np.put_along_axis(grad, winner, g.reshape(windows.shape[:-1])[..., None], axis=-1)
    grad = grad.reshape(channels, batch, height // k, width // k, k, k)
    return (np.ascontiguousarray(grad.transpose(0, 1, 2, 4, 3, 5).reshape(a.shape)),)


def flatten_map_forward(a: Matrix, *, batch: int, area: int) -> Matrix:
    channels = a.shape[0]
    if a.shape[1] != batch * area:
        raise ShapeError("flatten_map", a.shape)
    return np.ascontiguousarray(
        a.reshape(channels, batch, area).transpose(0, 2, 1).reshape(channels * area, batch)
    )


def _flatten_map_bwd(
    g: Matrix, ops: list[Matrix], out: Matrix, *, batch: int, area: int
) -> tuple[Matrix]:
    channels = ops[0].shape[0]
    back = g.reshape(channels, area, batch).transpose(0, 2, 1).reshape(channels, batch * area)
    return (np.ascontiguousarray(back),)


register_primitive("im2col", im2col_forward, _im2col_bwd)
register_primitive("maxpool", maxpool_forward, _maxpool_bwd)
register_primitive("flatten_map", flatten_map_forward, _flatten_map_bwd)
