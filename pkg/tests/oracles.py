"""Independent reference implementations used only by the tests.

Each one is written the slow, obvious way and shares no code with the
package beyond plain numpy.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def distances_double_loop(x):
    x = np.asarray(x, dtype=float)
    n = len(x)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            d[i, j] = math.sqrt(sum((a - b) ** 2 for a, b in zip(x[i], x[j])))
    return d


def rips_bruteforce(dist, max_scale, max_dim=2):
    """Every simplex as (value, dim, vertices), sorted by (value, dim, vertices)."""
    n = len(dist)
    out = [(0.0, 0, (i,)) for i in range(n)]
    for k in range(2, max_dim + 2):
        for sigma in itertools.combinations(range(n), k):
            v = max(dist[a][b] for a, b in itertools.combinations(sigma, 2))
            if v <= max_scale:
                out.append((float(v), k - 1, sigma))
    out.sort()
    return out


def naive_persistence(simplices):
    """Textbook reduction of a dense Z/2 boundary matrix.

    ``simplices`` is a list of (value, dim, vertices) in filtration order.
    Returns (dim, birth, death) triples with zero-persistence pairs dropped;
    unpaired simplices of dimension <= 1 give infinite bars.
    """
    index = {s[2]: i for i, s in enumerate(simplices)}
    n = len(simplices)
    D = np.zeros((n, n), dtype=np.uint8)
    for j, (_, dim, verts) in enumerate(simplices):
        if dim > 0:
            for face in itertools.combinations(verts, dim):
                D[index[face], j] = 1

    def low(col):
        nz = np.flatnonzero(D[:, col])
        return nz[-1] if len(nz) else -1

    lows = [-1] * n
    for j in range(n):
        while True:
            lj = low(j)
            if lj < 0:
                break
            clash = [k for k in range(j) if lows[k] == lj]
            if not clash:
                break
            D[:, j] ^= D[:, clash[0]]
        lows[j] = low(j)

    paired = set()
    bars = []
    for j in range(n):
        i = lows[j]
        if i >= 0:
            paired.update((i, j))
            b, d = simplices[i][0], simplices[j][0]
            if d > b:
                bars.append((simplices[i][1], b, d))
    for j in range(n):
        if j not in paired and lows[j] < 0 and simplices[j][1] <= 1:
            bars.append((simplices[j][1], simplices[j][0], math.inf))
    return sorted(bars)


def h0_kruskal(dist, max_scale):
    """H0 bars from Kruskal with a plain dict-based component labelling."""
    n = len(dist)
    label = list(range(n))
    edges = sorted((dist[i][j], i, j) for i in range(n) for j in range(i + 1, n)
                   if dist[i][j] <= max_scale)
    bars = []
    for w, i, j in edges:
        a, b = label[i], label[j]
        if a != b:
            label = [a if x == b else x for x in label]
            if w > 0:
                bars.append((0, 0.0, float(w)))
    for _ in set(label):
        bars.append((0, 0.0, math.inf))
    return sorted(bars)


def mlp_forward(weights, biases, acts, x):
    """Straight-line forward pass with explicit loops over units."""
    h = [list(map(float, row)) for row in np.asarray(x, dtype=float)]
    fns = {
        "identity": lambda v: v,
        "relu": lambda v: v if v > 0 else 0.0,
        "tanh": math.tanh,
        "sigmoid": lambda v: 1.0 / (1.0 + math.exp(-v)),
    }
    for W, b, act in zip(weights, biases, acts):
        W = np.asarray(W)
        nxt = []
        for row in h:
            out = []
            for k in range(W.shape[1]):
                s = float(b[k])
                for i, v in enumerate(row):
                    s += v * float(W[i, k])
                out.append(fns[act](s))
            nxt.append(out)
        h = nxt
    return np.array(h)


def central_diff(f, x, h=1e-5):
    """Central finite-difference gradient of a scalar function of an array."""
    x = np.array(x, dtype=float)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        xp = x.copy()
        xm = x.copy()
        xp[idx] += h
        xm[idx] -= h
        g[idx] = (f(xp) - f(xm)) / (2 * h)
    return g


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a))))


def linf(p, q):
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


def bottleneck_by_permutation(A, B):
    """Bottleneck distance by trying every bijection of the diagonal-augmented sets.

    A and B are lists of finite (birth, death) points. Both sides are padded
    with diagonal slots so any point can be sent to the diagonal.
    """
    A, B = list(A), list(B)
    left = A + [None] * len(B)
    right = B + [None] * len(A)
    best = math.inf
    for perm in itertools.permutations(range(len(right))):
        worst = 0.0
        for i, j in enumerate(perm):
            p, q = left[i], right[j]
            if p is None and q is None:
                c = 0.0
            elif p is None:
                c = (q[1] - q[0]) / 2
            elif q is None:
                c = (p[1] - p[0]) / 2
            else:
                c = linf(p, q)
            worst = max(worst, c)
            if worst >= best:
                break
        best = min(best, worst)
    return best


def mmd2_by_hand(q, p, C):
    """Unbiased MMD^2 with the inverse-multiquadratic kernel, written as three plain sums."""
    m = len(q)

    def k(a, b):
        return C / (C + sum((x - y) ** 2 for x, y in zip(a, b)))

    s_qq = sum(k(q[i], q[j]) for i in range(m) for j in range(m) if i != j)
    s_pp = sum(k(p[i], p[j]) for i in range(m) for j in range(m) if i != j)
    s_qp = sum(k(q[i], p[j]) for i in range(m) for j in range(m))
    return (s_qq + s_pp) / (m * (m - 1)) - 2 * s_qp / (m * m)
