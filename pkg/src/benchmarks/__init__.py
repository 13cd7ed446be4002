from .batches import LabeledBatch, SequenceBatch, one_hot
from .bitstreams import delayed_bits, delayed_sum_bits, gen_delay_adder, gen_delay_bitstream
from .mnist import (
    BadMagicError,
    CountMismatchError,
    IdxFormatError,
    MissingDatasetError,
    TruncatedIdxError,
    load_mnist,
    load_mnist_idx,
    read_idx_images,
    read_idx_labels,
    write_idx_images,
    write_idx_labels,
)
from .spirals import gen_two_spirals

__all__ = [
    "BadMagicError",
    "CountMismatchError",
    "IdxFormatError",
    "LabeledBatch",
    "MissingDatasetError",
    "SequenceBatch",
    "TruncatedIdxError",
    "delayed_bits",
    "delayed_sum_bits",
    "gen_delay_adder",
    "gen_delay_bitstream",
    "gen_two_spirals",
    "load_mnist",
    "load_mnist_idx",
    "one_hot",
    "read_idx_images",
    "read_idx_labels",
    "write_idx_images",
    "write_idx_labels",
]
