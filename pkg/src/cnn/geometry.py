"""Feature-map layout shared by the convolution, pooling and flattening operations.

A batch of C-channel H x W maps is held as a C x (N·H·W) matrix whose columns run
batch-major, then row-major over the spatial grid.
"""

from dataclasses import dataclass

import numpy as np

from tensor import Matrix, ShapeError


@dataclass(frozen=True)
class ConvLayerSpec:
    """One convolution: kernel size, channel counts and optional k x k max-pooling.

    Stride is 1 and padding is "same", so only pooling changes the spatial size.
    """

    kernel_h: int
    kernel_w: int
    in_channels: int
    out_channels: int
    pool_k: int = 1

    def __post_init__(self) -> None:
        dims = (self.kernel_h, self.kernel_w, self.in_channels, self.out_channels, self.pool_k)
        if any(d <= 0 for d in dims):
            raise ValueError(f"conv layer dimensions must be positive, got {dims}")

    @property
    def patch_rows(self) -> int:
        return 1 + self.kernel_h * self.kernel_w * self.in_channels

    @property
    def kernel_shape(self) -> tuple[int, int]:
        return self.out_channels, self.patch_rows

    def pooled_side(self, side: int) -> int:
        if side % self.pool_k:
            raise ShapeError(f"maxpool k={self.pool_k}", (side, side))
        return side // self.pool_k


@dataclass(frozen=True)
class FeatureMap:
    data: Matrix
    batch: int
    height: int
    width: int

    def __post_init__(self) -> None:
        if self.data.ndim != 2 or self.data.shape[1] != self.batch * self.height * self.width:
            raise ShapeError(
                f"feature map {self.batch}x{self.height}x{self.width}", self.data.shape
            )

    @property
    def channels(self) -> int:
        return int(self.data.shape[0])

    def to_tensor(self) -> np.ndarray:
        """As an (N, C, H, W) array."""
        return self.data.reshape(self.channels, self.batch, self.height, self.width).transpose(
            1, 0, 2, 3
        )

    @classmethod
    def from_tensor(cls, images: np.ndarray) -> "FeatureMap":
        n, c, h, w = images.shape
        data = np.ascontiguousarray(images.transpose(1, 0, 2, 3).reshape(c, n * h * w))
        return cls(data.astype(np.float64), n, h, w)

    @classmethod
    def from_columns(cls, x: Matrix, channels: int, height: int, width: int) -> "FeatureMap":
        """From a features x batch matrix with channel-major, row-major features."""
        if x.shape[0] != channels * height * width:
            raise ShapeError("FeatureMap.from_columns", x.shape, (channels * height * width, -1))
        n = x.shape[1]
        return cls.from_tensor(x.T.reshape(n, channels, height, width))

    def columns(self, start: int, stop: int) -> "FeatureMap":
        """Batch items ``start..stop`` as a new map."""
        area = self.height * self.width
        return FeatureMap(
            np.ascontiguousarray(self.data[:, start * area : stop * area]),
            stop - start,
            self.height,
            self.width,
        )


@dataclass(frozen=True)
class PatchMatrix:
    """Bias row of ones over one column per output position, kernel taps below it.

    Row ``1 + (ky·kernel_w + kx)·C + c`` holds channel ``c`` at kernel offset (ky, kx).
    """

    data: Matrix
    batch: int
    height: int
    width: int

    def __post_init__(self) -> None:
        if self.data.shape[1] != self.batch * self.height * self.width:
            raise ShapeError("PatchMatrix", self.data.shape)
