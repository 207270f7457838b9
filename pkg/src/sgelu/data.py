"""MNIST IDX parsing, one-hot encoding, and deterministic batch serving.

IDX layout (big endian): u32 magic, one u32 per dimension, raw u8 payload.
Image files use magic 2051, label files 2049. Files may be gzipped on
disk; transparent by .gz extension.
"""

import gzip
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataFormatError

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049

# conventional file names, searched under --data-dir
TRAIN_IMAGES = "train-images-idx3-ubyte"
TRAIN_LABELS = "train-labels-idx1-ubyte"
TEST_IMAGES = "t10k-images-idx3-ubyte"
TEST_LABELS = "t10k-labels-idx1-ubyte"


@dataclass
class Dataset:
    images: np.ndarray  # (N, D) in [0, 1]
    labels: np.ndarray | None = None  # (N, 10) one-hot, absent for auto-encoding

    @property
    def n(self):
        return self.images.shape[0]


def _read_bytes(path):
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as fh:
        return fh.read()


def _parse_header(raw, ndim, magic, path):
    header = 4 * (1 + ndim)
    if len(raw) < header:
        raise DataFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    fields = struct.unpack(f">{1 + ndim}i", raw[:header])
    if fields[0] != magic:
        raise DataFormatError(
            f"{path}: bad magic number, expected {magic}, got {fields[0]}"
        )
    return fields[1:], raw[header:]


def read_idx_images(path):
    """(N, rows*cols) float64 array, pixels scaled to [0, 1]."""
    raw = _read_bytes(path)
    (n, rows, cols), payload = _parse_header(raw, 3, IMAGE_MAGIC, path)
    expected = n * rows * cols
    if len(payload) != expected:
        raise DataFormatError(
            f"{path}: expected {expected} pixel bytes, got {len(payload)}"
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(n, rows * cols)
    return pixels.astype(np.float64) / 255.0


def read_idx_labels(path):
    """(N, 10) one-hot float64 array."""
    raw = _read_bytes(path)
    (n,), payload = _parse_header(raw, 1, LABEL_MAGIC, path)
    if len(payload) != n:
        raise DataFormatError(f"{path}: expected {n} label bytes, got {len(payload)}")
    digits = np.frombuffer(payload, dtype=np.uint8)
    if digits.size and digits.max() > 9:
        raise DataFormatError(f"{path}: label byte out of range 0-9")
    onehot = np.zeros((n, 10))
    onehot[np.arange(n), digits] = 1.0
    return onehot


def load_idx(images_path, labels_path=None):
    images = read_idx_images(images_path)
    labels = None
    if labels_path is not None:
        labels = read_idx_labels(labels_path)
        if labels.shape[0] != images.shape[0]:
            raise DataFormatError(
                f"image count {images.shape[0]} != label count {labels.shape[0]}"
            )
    return Dataset(images, labels)


def write_idx_images(path, images_01):
    """Inverse of read_idx_images for synthetic square images (tests)."""
    images_01 = np.asarray(images_01)
    n, d = images_01.shape
    side = int(round(d ** 0.5))
    if side * side != d:
        raise ConfigurationError(f"cannot infer square image side from {d} pixels")
    body = np.clip(np.round(images_01 * 255.0), 0, 255).astype(np.uint8).tobytes()
    blob = struct.pack(">4i", IMAGE_MAGIC, n, side, side) + body
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wb") as fh:
        fh.write(blob)


def write_idx_labels(path, digits):
    digits = np.asarray(digits, dtype=np.uint8)
    blob = struct.pack(">2i", LABEL_MAGIC, digits.size) + digits.tobytes()
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wb") as fh:
        fh.write(blob)


def find_file(data_dir, name):
    """Resolve `name` or `name.gz` under data_dir; None if neither exists."""
    for candidate in (name, name + ".gz"):
        path = os.path.join(data_dir, candidate)
        if os.path.exists(path):
            return path
    return None


def load_mnist(data_dir):
    """(train, test) Datasets from the four canonical files."""
    paths = {}
    for key, name in (
        ("train_x", TRAIN_IMAGES), ("train_y", TRAIN_LABELS),
        ("test_x", TEST_IMAGES), ("test_y", TEST_LABELS),
    ):
        path = find_file(data_dir, name)
        if path is None:
            raise FileNotFoundError(
                f"missing MNIST file {os.path.join(data_dir, name)}[.gz]"
            )
        paths[key] = path
    return (
        load_idx(paths["train_x"], paths["train_y"]),
        load_idx(paths["test_x"], paths["test_y"]),
    )


def take_subset(ds, n):
    """First n samples in file order."""
    if n > ds.n:
        raise ConfigurationError(f"subset of {n} from dataset of {ds.n}")
    labels = None if ds.labels is None else ds.labels[:n]
    return Dataset(ds.images[:n], labels)


def batches(ds, batch_size, rng=None, shuffle=False):
    """Yield (x, y) batches covering every sample exactly once.

    batch_size must divide N. y is the images themselves when the dataset
    has no labels (reconstruction task).
    """
    if ds.n % batch_size != 0:
        raise ConfigurationError(
            f"batch size {batch_size} does not divide dataset size {ds.n}"
        )
    order = rng.permutation(ds.n) if shuffle else np.arange(ds.n)
    targets = ds.images if ds.labels is None else ds.labels
    for start in range(0, ds.n, batch_size):
        idx = order[start:start + batch_size]
        yield ds.images[idx], targets[idx]
