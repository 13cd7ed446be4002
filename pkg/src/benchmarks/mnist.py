"""IDX reader and writer for the MNIST digit files.

Images: big-endian magic 2051, count, rows, cols, then unsigned bytes row by row.
Labels: big-endian magic 2049, count, then one unsigned byte per label. Files ending in
``.gz`` are read and written through gzip.
"""

import gzip
import logging
import struct
from pathlib import Path
from typing import IO

import numpy as np

from .batches import LabeledBatch, one_hot

logger = logging.getLogger(__name__)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
N_CLASSES = 10

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}
DOWNLOAD_HINT = (
    "download the four MNIST IDX files (train-images-idx3-ubyte, train-labels-idx1-ubyte, "
    "t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte, optionally .gz) into TSDL_DATA_DIR"
)


class IdxFormatError(ValueError):
    """An IDX file could not be parsed."""


class BadMagicError(IdxFormatError):
    def __init__(self, path: Path, found: int, expected: int) -> None:
        super().__init__(f"{path}: magic number 0x{found:08x}, expected 0x{expected:08x}")


class TruncatedIdxError(IdxFormatError):
    def __init__(self, path: Path, needed: int, available: int) -> None:
        super().__init__(f"{path}: needs {needed} bytes, only {available} present")


class CountMismatchError(IdxFormatError):
    def __init__(self, images: int, labels: int) -> None:
        super().__init__(f"{images} images but {labels} labels")


class MissingDatasetError(FileNotFoundError):
    def __init__(self, path: Path) -> None:
        super().__init__(f"dataset file {path} not found; {DOWNLOAD_HINT}")


def _open(path: Path, mode: str) -> IO[bytes]:
    if path.suffix == ".gz":
        return gzip.open(path, mode)  # type: ignore[return-value]
    return open(path, mode)  # noqa: SIM115


def _read(path: Path, magic: int, n_dims: int) -> np.ndarray:
    if not path.exists():
        raise MissingDatasetError(path)
    with _open(path, "rb") as f:
        raw = f.read()
    header_size = 4 * (1 + n_dims)
    if len(raw) < header_size:
        raise TruncatedIdxError(path, header_size, len(raw))
    found, *dims = struct.unpack(f">{1 + n_dims}I", raw[:header_size])
    if found != magic:
        raise BadMagicError(path, found, magic)
    needed = header_size + int(np.prod(dims))
    if len(raw) < needed:
        raise TruncatedIdxError(path, needed, len(raw))
    body = np.frombuffer(raw, dtype=np.uint8, count=needed - header_size, offset=header_size)
    return body.reshape(dims)


def read_idx_images(path: Path) -> np.ndarray:
    """Raw (count, rows, cols) uint8 images."""
    return _read(Path(path), IMAGE_MAGIC, 3)


def read_idx_labels(path: Path) -> np.ndarray:
    return _read(Path(path), LABEL_MAGIC, 1)


def write_idx_images(path: Path, images: np.ndarray) -> None:
    images = np.asarray(images, dtype=np.uint8)
    with _open(Path(path), "wb") as f:
        f.write(struct.pack(">4I", IMAGE_MAGIC, *images.shape))
        f.write(images.tobytes())


def write_idx_labels(path: Path, labels: np.ndarray) -> None:
    labels = np.asarray(labels, dtype=np.uint8)
    with _open(Path(path), "wb") as f:
        f.write(struct.pack(">2I", LABEL_MAGIC, labels.size))
        f.write(labels.tobytes())


def load_mnist_idx(images_path: Path, labels_path: Path, limit: int | None = None) -> LabeledBatch:
    """784 x n pixel matrix scaled to [0, 1] with one-hot 10-class labels.

    Raises:
        MissingDatasetError: if either file is absent
        BadMagicError, TruncatedIdxError: if a file is malformed
        CountMismatchError: if the files disagree on the number of examples
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise CountMismatchError(images.shape[0], labels.shape[0])
    if limit is not None:
        images, labels = images[:limit], labels[:limit]
    pixels = images.reshape(images.shape[0], -1).T.astype(np.float64) / 255.0
    logger.info("Loaded %d images of %dx%d from %s", *images.shape, images_path)
    return LabeledBatch(np.ascontiguousarray(pixels), one_hot(labels, N_CLASSES))


def _resolve(data_dir: Path, name: str) -> Path:
    plain = data_dir / name
    packed = data_dir / f"{name}.gz"
    return packed if not plain.exists() and packed.exists() else plain


def load_mnist(data_dir: Path, split: str = "train", limit: int | None = None) -> LabeledBatch:
    """The standard MNIST split under ``data_dir``, plain or gzipped."""
    try:
        images_name, labels_name = MNIST_FILES[split]
    except KeyError:
        raise ValueError(f"Unknown split '{split}'. Available: train, test") from None
    return load_mnist_idx(_resolve(data_dir, images_name), _resolve(data_dir, labels_name), limit)
