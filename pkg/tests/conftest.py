import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from sgelu.data import Dataset, find_file, TRAIN_IMAGES, TRAIN_LABELS, TEST_IMAGES, TEST_LABELS


def mnist_dir():
    """Directory holding the four canonical IDX files, or None."""
    for candidate in (os.environ.get("SGELU_DATA_DIR"), "data", "/root/data/mnist"):
        if not candidate:
            continue
        if all(find_file(candidate, n) for n in
               (TRAIN_IMAGES, TRAIN_LABELS, TEST_IMAGES, TEST_LABELS)):
            return candidate
    return None


requires_mnist = pytest.mark.skipif(
    mnist_dir() is None,
    reason="real MNIST IDX files not available (set SGELU_DATA_DIR); "
    "this environment has no network access to fetch them",
)


def make_blob_dataset(n_per_class, n_classes, dim, spread=0.25, seed=0):
    """Separable Gaussian-blob classification data scaled into [0, 1]."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, 1.0, (n_classes, dim))
    images = np.vstack([
        centers[c] + spread * rng.normal(0.0, 1.0, (n_per_class, dim))
        for c in range(n_classes)
    ])
    lo, hi = images.min(), images.max()
    images = (images - lo) / (hi - lo)
    digits = np.repeat(np.arange(n_classes), n_per_class)
    labels = np.zeros((images.shape[0], 10))
    labels[np.arange(images.shape[0]), digits] = 1.0
    perm = rng.permutation(images.shape[0])
    return Dataset(images[perm], labels[perm])
