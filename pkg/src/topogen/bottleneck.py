"""Exact bottleneck distance between persistence diagrams."""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from topogen.errors import InputError
from topogen.matching import hopcroft_karp
from topogen.persistence import PersistenceDiagram

DiagramLike = Union[PersistenceDiagram, np.ndarray, list]

BRUTEFORCE_LIMIT = 7


def _split(dgm: DiagramLike, dim) -> tuple[np.ndarray, np.ndarray]:
    """Finite ``(k, 2)`` points and sorted births of infinite bars."""
    if isinstance(dgm, PersistenceDiagram):
        if dim is None:
            dims = dgm.dims()
            if len(dims) > 1:
                raise InputError("diagram spans several dimensions; pass dim")
            dim = dims[0] if dims else 0
        return dgm.finite(dim), np.sort(dgm.infinite_births(dim))
    pts = np.asarray(dgm, dtype=np.float64).reshape(-1, 2)
    inf = np.isinf(pts[:, 1])
    return pts[~inf], np.sort(pts[inf, 0])


def _infinite_cost(ia: np.ndarray, ib: np.ndarray) -> float:
    if len(ia) != len(ib):
        return math.inf
    if not len(ia):
        return 0.0
    return float(np.max(np.abs(ia - ib)))


def _cost_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.maximum(np.abs(A[:, None, 0] - B[None, :, 0]), np.abs(A[:, None, 1] - B[None, :, 1]))


def candidate_radii(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Every point-to-point L-infinity distance and point-to-diagonal distance, sorted."""
    parts = [_cost_matrix(A, B).ravel(), (A[:, 1] - A[:, 0]) / 2, (B[:, 1] - B[:, 0]) / 2]
    return np.unique(np.concatenate(parts))


def _covers(cost: np.ndarray, must: np.ndarray, r: float) -> bool:
    """Can every row flagged in ``must`` be matched to a distinct column within ``r``?"""
    rows = np.flatnonzero(must)
    if not len(rows):
        return True
    if len(rows) > cost.shape[1]:
        return False
    ok = cost[rows] <= r
    if not np.all(ok.any(axis=1)):
        return False
    adj = [np.flatnonzero(row).tolist() for row in ok]
    size, _ = hopcroft_karp(adj, cost.shape[1])
    return size == len(rows)


def feasible(A: np.ndarray, B: np.ndarray, r: float, cost: np.ndarray = None) -> bool:
    """Is there a bijection of A+diagonal onto B+diagonal moving no point more than ``r``?

    Points whose diagonal distance exceeds ``r`` must be matched across.
    By the Mendelsohn-Dulmage theorem a single matching covering both such
    sets exists iff each set can be covered on its own, so the perfect
    matching test on the diagonal-augmented graph splits into two maximum
    matchings on the point-to-point graph.
    """
    if cost is None:
        cost = _cost_matrix(A, B)
    must_a = (A[:, 1] - A[:, 0]) / 2 > r
    must_b = (B[:, 1] - B[:, 0]) / 2 > r
    return _covers(cost, must_a, r) and _covers(cost.T, must_b, r)


def _finite_bottleneck(A: np.ndarray, B: np.ndarray) -> float:
    if not len(A) and not len(B):
        return 0.0
    cost = _cost_matrix(A, B)
    radii = candidate_radii(A, B)
    lo, hi = 0, len(radii) - 1  # radii[-1] is always feasible
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(A, B, radii[mid], cost):
            hi = mid
        else:
            lo = mid + 1
    return float(radii[lo])


def bottleneck_distance(dgm_a: DiagramLike, dgm_b: DiagramLike, dim=None) -> float:
    """Bottleneck distance in homology dimension ``dim``.

    Finite points are matched by binary search over the candidate radii with
    a matching-based feasibility test. Infinite bars are matched separately
    in order of birth; differing counts give ``inf``.
    """
    A, ia = _split(dgm_a, dim)
    B, ib = _split(dgm_b, dim)
    inf_cost = _infinite_cost(ia, ib)
    if math.isinf(inf_cost):
        return math.inf
    return max(_finite_bottleneck(A, B), inf_cost)


def bottleneck_bruteforce(dgm_a: DiagramLike, dgm_b: DiagramLike, dim=None) -> float:
    """Exhaustive search over all partial matchings (diagonal for the rest).

    Limited to ``BRUTEFORCE_LIMIT`` finite points per diagram. Branches whose
    running maximum already reaches the best complete matching are cut; this
    does not change the minimum.
    """
    A, ia = _split(dgm_a, dim)
    B, ib = _split(dgm_b, dim)
    if len(A) > BRUTEFORCE_LIMIT or len(B) > BRUTEFORCE_LIMIT:
        raise InputError(f"brute force limited to {BRUTEFORCE_LIMIT} points per diagram")
    inf_cost = _infinite_cost(ia, ib)
    if math.isinf(inf_cost):
        return math.inf

    a_pts = [tuple(map(float, p)) for p in A]
    b_pts = [tuple(map(float, p)) for p in B]
    diag_a = [(d - b) / 2 for b, d in a_pts]
    diag_b = [(d - b) / 2 for b, d in b_pts]
    cost = [[max(abs(pa[0] - pb[0]), abs(pa[1] - pb[1])) for pb in b_pts] for pa in a_pts]
    best = [math.inf]
    used = [False] * len(b_pts)

    def go(i: int, worst: float) -> None:
        if worst >= best[0]:
            return
        if i == len(a_pts):
            rest = max((diag_b[j] for j in range(len(b_pts)) if not used[j]), default=0.0)
            best[0] = min(best[0], max(worst, rest))
            return
        go(i + 1, max(worst, diag_a[i]))
        for j in range(len(b_pts)):
            if not used[j]:
                used[j] = True
                go(i + 1, max(worst, cost[i][j]))
                used[j] = False

    go(0, 0.0)
    return max(best[0], inf_cost)
