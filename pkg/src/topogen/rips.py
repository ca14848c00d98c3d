"""Vietoris-Rips filtrations truncated at simplex dimension 2."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from topogen.errors import InputError
from topogen.pointcloud import DistanceMatrix


@dataclass(frozen=True)
class Simplex:
    vertices: tuple[int, ...]
    filtration_value: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


class FilteredComplex:
    """Simplices sorted by (filtration value, dimension, vertex tuple).

    Storage is columnar: ``vertices`` is an ``(N, 3)`` int array padded with
    ``-1``, ``values`` and ``dims`` are length ``N``. Iterating or indexing
    yields ``Simplex`` objects.
    """

    def __init__(self, vertices: np.ndarray, values: np.ndarray, dims: np.ndarray,
                 vertex_count: int, max_scale: float):
        self.vertices = np.asarray(vertices, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.float64)
        self.dims = np.asarray(dims, dtype=np.int64)
        self.vertex_count = int(vertex_count)
        self.max_scale = float(max_scale)
        for a in (self.vertices, self.values, self.dims):
            a.setflags(write=False)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Simplex:
        d = int(self.dims[i])
        return Simplex(tuple(int(v) for v in self.vertices[i, : d + 1]), float(self.values[i]))

    def __iter__(self) -> Iterator[Simplex]:
        for i in range(len(self)):
            yield self[i]

    @property
    def simplices(self) -> list[Simplex]:
        return list(self)

    def count(self, dim: int) -> int:
        return int(np.count_nonzero(self.dims == dim))

    def dump(self) -> str:
        """One simplex per line: ``value dim v0 [v1 [v2]]``."""
        lines = []
        for i in range(len(self)):
            d = int(self.dims[i])
            vs = " ".join(str(int(v)) for v in self.vertices[i, : d + 1])
            lines.append(f"{self.values[i]:.12f} {d} {vs}")
        return "\n".join(lines) + ("\n" if lines else "")


def max_pairwise_distance(dist: DistanceMatrix) -> float:
    return float(dist.values.max())


def build_vietoris_rips(dist: DistanceMatrix, max_scale: float, max_dim: int = 2) -> FilteredComplex:
    """Rips filtration of ``dist`` up to ``max_scale``.

    Edges enter at their length, triangles at their longest edge. Triangles
    are found per vertex by intersecting its forward neighbourhood with the
    neighbourhoods of its neighbours.
    """
    if max_dim not in (1, 2):
        raise InputError(f"max_dim must be 1 or 2, got {max_dim}")
    if not np.isfinite(max_scale) or max_scale < 0:
        raise InputError(f"max_scale must be finite and nonnegative, got {max_scale}")
    D = dist.values
    n = dist.n
    adj = D <= max_scale
    np.fill_diagonal(adj, False)

    ei, ej = np.nonzero(np.triu(adj, 1))
    edge_vals = D[ei, ej]

    tri_parts = []
    if max_dim == 2:
        for i in range(n):
            nbrs = np.flatnonzero(adj[i, i + 1:]) + i + 1
            if len(nbrs) < 2:
                continue
            sub = np.triu(adj[np.ix_(nbrs, nbrs)], 1)
            a, b = np.nonzero(sub)
            if len(a):
                j, k = nbrs[a], nbrs[b]
                tri_parts.append(np.column_stack([np.full(len(j), i), j, k]))
    tris = np.concatenate(tri_parts) if tri_parts else np.empty((0, 3), dtype=np.int64)
    tri_vals = np.maximum(np.maximum(D[tris[:, 0], tris[:, 1]], D[tris[:, 0], tris[:, 2]]),
                          D[tris[:, 1], tris[:, 2]])

    n_e, n_t = len(ei), len(tris)
    verts = np.full((n + n_e + n_t, 3), -1, dtype=np.int64)
    verts[:n, 0] = np.arange(n)
    verts[n:n + n_e, 0] = ei
    verts[n:n + n_e, 1] = ej
    verts[n + n_e:] = tris
    values = np.concatenate([np.zeros(n), edge_vals, tri_vals])
    dims = np.concatenate([np.zeros(n, np.int64), np.ones(n_e, np.int64), np.full(n_t, 2, np.int64)])

    # rows are already in (dim, lexicographic) order, so a stable sort on the
    # value alone realizes the full (value, dim, lex) order
    order = np.argsort(values, kind="stable")
    return FilteredComplex(verts[order], values[order], dims[order], n, max_scale)
