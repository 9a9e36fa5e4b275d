"""Small synthetic datasets with ground truth, for tests and demos."""

import numpy as np

from .dataset import Dataset


def gaussian_blobs(centers, n_per, std=1.0, rng=None, name="blobs") -> Dataset:
    rng = np.random.default_rng(rng)
    centers = np.asarray(centers, dtype=np.float64)
    counts = np.broadcast_to(np.asarray(n_per), (len(centers),))
    stds = np.broadcast_to(np.asarray(std, dtype=np.float64), (len(centers),))
    X = np.vstack([c + s * rng.standard_normal((m, centers.shape[1])) for c, m, s in zip(centers, counts, stds)])
    y = np.repeat(np.arange(len(centers)), counts)
    return Dataset(X, y, name)


def two_blobs(n=60, separation=20.0, rng=None) -> Dataset:
    half = n // 2
    return gaussian_blobs([[0.0, 0.0], [separation, 0.0]], [half, n - half], 1.0, rng, "two_blobs")


def overlapping_gaussians(n=600, distance=2.5, rng=None, d=2) -> Dataset:
    """Two unit-variance d-dimensional Gaussians whose centers are ``distance`` apart."""
    half = n // 2
    centers = np.zeros((2, d))
    centers[1, 0] = distance
    return gaussian_blobs(centers, [half, n - half], 1.0, rng, f"overlap2_d{d}")


def mixed_shapes(rng=None) -> Dataset:
    """A smile-shaped arc, an elongated bar and three globular clusters (n=588)."""
    rng = np.random.default_rng(rng)
    t = rng.uniform(np.pi * 1.1, np.pi * 1.9, 150)
    smile = np.c_[6 * np.cos(t), 6 * np.sin(t) + 2] + 0.3 * rng.standard_normal((150, 2))
    bar = np.c_[rng.uniform(-6, 6, 138), np.full(138, 9.0)] + 0.3 * rng.standard_normal((138, 2))
    globs = [c + 0.6 * rng.standard_normal((100, 2)) for c in ([-3.0, 2.5], [3.0, 2.5], [13.0, 2.0])]
    X = np.vstack([smile, bar, *globs])
    y = np.repeat(np.arange(5), [150, 138, 100, 100, 100])
    return Dataset(X, y, "mixed_shapes")
