"""Small synthetic point clouds used by the tests, examples and CLI."""

from __future__ import annotations

import numpy as np

from topogen.pointcloud import PointCloud


def two_moons(n: int = 500, noise: float = 0.05, seed=0, embed_dim: int = 2) -> PointCloud:
    """Two interleaved half circles, optionally padded with zero columns to ``embed_dim``."""
    rng = np.random.default_rng(seed)
    n_top = n // 2
    t = rng.uniform(0.0, np.pi, size=n)
    top = np.arange(n) < n_top
    xy = np.empty((n, 2))
    xy[top] = np.c_[np.cos(t[top]), np.sin(t[top])]
    xy[~top] = np.c_[1.0 - np.cos(t[~top]), 0.5 - np.sin(t[~top])]
    xy += rng.normal(scale=noise, size=xy.shape)
    pts = np.zeros((n, max(embed_dim, 2)))
    pts[:, :2] = xy
    return PointCloud(pts)


def circle(n: int = 20, radius: float = 1.0) -> PointCloud:
    """``n`` equally spaced points on a circle."""
    t = 2 * np.pi * np.arange(n) / n
    return PointCloud(radius * np.c_[np.cos(t), np.sin(t)])


def unit_square() -> PointCloud:
    return PointCloud(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
