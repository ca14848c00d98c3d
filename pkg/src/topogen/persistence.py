"""Persistent homology over Z/2 in dimensions 0 and 1."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Union

import numpy as np

from topogen._reduction import reduce_boundary
from topogen.errors import InputError
from topogen.pointcloud import DistanceMatrix
from topogen.rips import FilteredComplex

INF = math.inf


@dataclass(frozen=True, order=True)
class PersistencePair:
    dim: int
    birth: float
    death: float
    birth_simplex: Optional[int] = field(default=None, compare=False)
    death_simplex: Optional[int] = field(default=None, compare=False)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.death)

    @property
    def persistence(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of persistence pairs, kept sorted by (dim, birth, death).

    ``zero_persistence`` counts, per dimension, the pairs with birth equal to
    death that the reduction produced but the diagram leaves out.
    """

    pairs: tuple[PersistencePair, ...]
    zero_persistence: dict = field(default_factory=dict, compare=False)
    field_tag: str = "Z/2Z"

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs)))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def dims(self) -> list[int]:
        return sorted({p.dim for p in self.pairs})

    def in_dim(self, dim: int) -> "PersistenceDiagram":
        return PersistenceDiagram(tuple(p for p in self.pairs if p.dim == dim),
                                  {dim: self.zero_persistence.get(dim, 0)})

    def finite(self, dim: int) -> np.ndarray:
        """``(k, 2)`` array of finite (birth, death) rows in dimension ``dim``."""
        rows = [(p.birth, p.death) for p in self.pairs if p.dim == dim and not p.is_infinite]
        return np.array(rows, dtype=np.float64).reshape(-1, 2)

    def infinite_births(self, dim: int) -> np.ndarray:
        return np.array([p.birth for p in self.pairs if p.dim == dim and p.is_infinite],
                        dtype=np.float64)

    def intervals(self, dim: Optional[int] = None) -> list[tuple[float, float]]:
        return [(p.birth, p.death) for p in self.pairs if dim is None or p.dim == dim]

    def rotated(self, dim: Optional[int] = None) -> list[tuple[float, float]]:
        """(birth, death - birth) coordinates; infinite bars keep ``inf``."""
        return [(b, d - b) for b, d in self.intervals(dim)]

    def to_csv(self, path: Union[str, os.PathLike], precision: int = 6) -> None:
        """Write ``dim,birth,death`` rows; ``death`` is ``inf`` for infinite bars."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(format_diagram_csv(self, precision))


def _fmt(v: float, precision: int) -> str:
    if math.isinf(v):
        return "inf"
    return format(v, f".{precision}g")


def format_diagram_csv(diagram: PersistenceDiagram, precision: int = 6) -> str:
    lines = ["dim,birth,death"]
    for p in diagram.pairs:
        lines.append(f"{p.dim},{_fmt(p.birth, precision)},{_fmt(p.death, precision)}")
    return "\n".join(lines) + "\n"


def read_diagram_csv(path: Union[str, os.PathLike]) -> PersistenceDiagram:
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise InputError(f"diagram file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0].replace(" ", "") != "dim,birth,death":
        raise InputError(f"{path}: expected header 'dim,birth,death'")
    pairs = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 3:
            raise InputError(f"{path}: row {lineno}: expected 3 fields")
        try:
            dim, birth, death = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError:
            raise InputError(f"{path}: row {lineno}: malformed value in {ln!r}") from None
        if math.isnan(birth) or math.isnan(death) or math.isinf(birth) or death < birth:
            raise InputError(f"{path}: row {lineno}: invalid interval ({birth}, {death})")
        pairs.append(PersistencePair(dim, birth, death))
    return PersistenceDiagram(tuple(pairs))


def boundary_columns(complex: FilteredComplex) -> tuple[np.ndarray, np.ndarray]:
    """Sparse Z/2 boundary matrix in filtration order (CSR over columns).

    Raises ``InputError`` if a face is missing or appears after its coface.
    """
    N = len(complex)
    n = complex.vertex_count
    dims, verts = complex.dims, complex.vertices
    if N and dims.max() > 2:
        raise InputError("only simplices of dimension <= 2 are supported")
    pos = np.arange(N, dtype=np.int64)

    vpos = np.full(n, -1, dtype=np.int64)
    vmask = dims == 0
    vv = verts[vmask, 0]
    if np.any((vv < 0) | (vv >= n)):
        raise InputError("vertex index out of range")
    vpos[vv] = pos[vmask]

    emask = dims == 1
    ea, eb = verts[emask, 0], verts[emask, 1]
    if np.any((ea < 0) | (eb >= n) | (ea >= eb)):
        raise InputError("edge vertices must be increasing and in range")
    efaces = np.column_stack([vpos[ea], vpos[eb]])
    epos = pos[emask]
    if np.any(efaces < 0) or np.any(efaces >= epos[:, None]):
        raise InputError("malformed complex: an edge precedes or lacks one of its vertices")

    tmask = dims == 2
    t = verts[tmask]
    tpos = pos[tmask]
    if len(t):
        if np.any((t[:, 0] < 0) | (t[:, 2] >= n) | (t[:, 0] >= t[:, 1]) | (t[:, 1] >= t[:, 2])):
            raise InputError("triangle vertices must be increasing and in range")
        lookup = np.full((n, n), -1, dtype=np.int64)
        lookup[ea, eb] = epos
        tfaces = np.column_stack([lookup[t[:, 0], t[:, 1]], lookup[t[:, 0], t[:, 2]],
                                  lookup[t[:, 1], t[:, 2]]])
        if np.any(tfaces < 0) or np.any(tfaces >= tpos[:, None]):
            raise InputError("malformed complex: a triangle precedes or lacks one of its edges")
        tfaces.sort(axis=1)
    else:
        tfaces = np.empty((0, 3), dtype=np.int64)

    indptr = np.zeros(N + 1, dtype=np.int64)
    np.cumsum(np.where(dims == 0, 0, dims + 1), out=indptr[1:])
    indices = np.empty(indptr[-1], dtype=np.int64)
    starts = indptr[:-1]
    es = starts[emask]
    indices[es] = efaces[:, 0]
    indices[es + 1] = efaces[:, 1]
    ts = starts[tmask]
    for c in range(3):
        indices[ts + c] = tfaces[:, c]
    return indptr, indices


@dataclass(frozen=True)
class ReductionStats:
    """Bookkeeping of how the filtration's simplices were accounted for."""

    births: int
    deaths: int
    infinite: dict
    zero_persistence: dict
    unpaired_top: int
    additions: int


def _gather_columns(order_sorted, starts, counts, faces):
    """CSR of the coboundary columns of ``faces``, in the given order."""
    lens = counts[faces]
    indptr = np.zeros(len(faces) + 1, dtype=np.int64)
    np.cumsum(lens, out=indptr[1:])
    offs = np.repeat(starts[faces] - indptr[:-1], lens) + np.arange(indptr[-1])
    return indptr, order_sorted[offs]


def _pairs_standard(indptr, indices):
    low, additions = reduce_boundary(indptr, indices)
    deaths = np.flatnonzero(low >= 0)
    return low[deaths], deaths, additions


def _pairs_dual(indptr, indices, dims):
    """Reduce the anti-transposed boundary matrix, one dimension at a time.

    Vertex columns are reduced first; the edges they pair with are cleared
    (their columns are known to vanish) before the edge columns are reduced.
    """
    N = len(dims)
    lens = np.diff(indptr)
    coface = np.repeat(np.arange(N, dtype=np.int64), lens)
    # group by face; within a face, anti-transposed rows N-1-coface ascending
    keys = np.sort(indices * N + ((N - 1) - coface))
    cof_sorted = keys % N
    counts = np.bincount(indices, minlength=N).astype(np.int64)
    starts = np.zeros(N, dtype=np.int64)
    np.cumsum(counts[:-1], out=starts[1:])

    births, deaths, additions = [], [], 0
    cleared = np.zeros(N, dtype=bool)
    for k in (0, 1):
        cols = np.flatnonzero((dims == k) & ~cleared)[::-1]
        if not len(cols):
            continue
        cptr, cidx = _gather_columns(cof_sorted, starts, counts, cols)
        low, adds = reduce_boundary(cptr, cidx, N)
        additions += int(adds)
        hit = low >= 0
        b = cols[hit]
        d = (N - 1) - low[hit]
        cleared[d] = True
        births.append(b)
        deaths.append(d)
    if births:
        births, deaths = np.concatenate(births), np.concatenate(deaths)
    else:
        births = deaths = np.empty(0, dtype=np.int64)
    return births, deaths, additions


def compute_persistence(complex: FilteredComplex, return_stats: bool = False,
                        algorithm: str = "dual"):
    """Persistence pairs of the filtration in dimensions 0 and 1.

    A reduced column whose pivot is row ``i`` kills the class born at simplex
    ``i``; positive simplices never killed give infinite bars and triangles
    left unpaired (H2 classes) are discarded.

    ``algorithm="standard"`` reduces the boundary matrix column by column in
    filtration order. ``"dual"`` (default) reduces its anti-transpose with
    clearing. Both give the same pairs, down to the simplex indices; the
    dual route avoids reducing hundreds of thousands of positive triangle
    columns to zero and is much faster on Rips complexes.
    """
    indptr, indices = boundary_columns(complex)
    values, dims = complex.values, complex.dims
    if algorithm == "standard":
        births, deaths, additions = _pairs_standard(indptr, indices)
    elif algorithm == "dual":
        births, deaths, additions = _pairs_dual(indptr, indices, dims)
    else:
        raise InputError(f"unknown persistence algorithm {algorithm!r}")
    N = len(complex)

    paired = np.zeros(N, dtype=bool)
    paired[deaths] = True
    paired[births] = True

    pairs = []
    zero = {0: 0, 1: 0}
    for b, d in zip(births.tolist(), deaths.tolist()):
        k = int(dims[b])
        vb, vd = float(values[b]), float(values[d])
        if vb == vd:
            zero[k] += 1
            continue
        pairs.append(PersistencePair(k, vb, vd, b, d))
    infinite = {0: 0, 1: 0}
    unpaired_top = int(np.count_nonzero(~paired & (dims >= 2)))
    for i in np.flatnonzero(~paired & (dims <= 1)).tolist():
        k = int(dims[i])
        infinite[k] += 1
        pairs.append(PersistencePair(k, float(values[i]), INF, i, None))

    diagram = PersistenceDiagram(tuple(pairs), zero)
    if return_stats:
        stats = ReductionStats(len(births), len(deaths), infinite, zero, unpaired_top, additions)
        return diagram, stats
    return diagram


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.components = n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        x, y = self.find(x), self.find(y)
        if x == y:
            return False
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        self.parent[y] = x
        if self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.components -= 1
        return True


def h0_via_union_find(dist: DistanceMatrix, max_scale: float) -> PersistenceDiagram:
    """Dimension-0 diagram from Kruskal merges; used to cross-check the reducer."""
    D = dist.values
    n = dist.n
    i, j = np.nonzero(np.triu(D <= max_scale, 1))
    w = D[i, j]
    uf = UnionFind(n)
    pairs = []
    zero = 0
    for k in np.argsort(w, kind="stable").tolist():
        if uf.union(int(i[k]), int(j[k])):
            if w[k] == 0:
                zero += 1
            else:
                pairs.append(PersistencePair(0, 0.0, float(w[k])))
    pairs.extend(PersistencePair(0, 0.0, INF) for _ in range(uf.components))
    return PersistenceDiagram(tuple(pairs), {0: zero})


class Bar(NamedTuple):
    dim: int
    birth: float
    death: float
    infinite: bool

    @property
    def length(self) -> float:
        return self.death - self.birth


def barcodes(diagram: PersistenceDiagram, scale_cap: float) -> list[Bar]:
    """Intervals sorted by (dim, birth, death) with infinite deaths clipped to ``scale_cap``."""
    bars = [Bar(p.dim, p.birth, scale_cap if p.is_infinite else p.death, p.is_infinite)
            for p in diagram.pairs]
    bars.sort(key=lambda b: (b.dim, b.birth, b.death, b.infinite))
    return bars


def group_by_dim(bars: Iterable[Bar]) -> dict[int, list[Bar]]:
    out: dict[int, list[Bar]] = {}
    for b in bars:
        out.setdefault(b.dim, []).append(b)
    return out
