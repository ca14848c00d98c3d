"""Hopcroft-Karp maximum bipartite matching."""

from __future__ import annotations

from collections import deque
from typing import Sequence

UNMATCHED = -1
_INF = float("inf")


def hopcroft_karp(adj: Sequence[Sequence[int]], n_right: int) -> tuple[int, list[int]]:
    """Maximum matching of a bipartite graph given by left adjacency lists.

    Args:
        adj: ``adj[u]`` lists the right vertices adjacent to left vertex ``u``.
        n_right: number of right vertices.

    Returns:
        ``(size, match_left)`` with ``match_left[u]`` the partner of ``u`` or -1.
    """
    n_left = len(adj)
    match_l = [UNMATCHED] * n_left
    match_r = [UNMATCHED] * n_right
    size = 0

    # greedy start
    for u in range(n_left):
        for v in adj[u]:
            if match_r[v] == UNMATCHED:
                match_l[u] = v
                match_r[v] = u
                size += 1
                break

    dist = [0.0] * n_left
    while True:
        # layer the free left vertices
        q = deque()
        for u in range(n_left):
            if match_l[u] == UNMATCHED:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = _INF
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == UNMATCHED:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        if not found:
            return size, match_l

        # vertex-disjoint shortest augmenting paths, iterative DFS
        it = [0] * n_left
        for root in range(n_left):
            if match_l[root] != UNMATCHED:
                continue
            stack = [root]
            while stack:
                u = stack[-1]
                advanced = False
                nbrs = adj[u]
                while it[u] < len(nbrs):
                    v = nbrs[it[u]]
                    it[u] += 1
                    w = match_r[v]
                    if w == UNMATCHED:
                        # augment along the stack
                        for x in reversed(stack):
                            nxt = match_l[x]
                            match_l[x] = v
                            match_r[v] = x
                            v = nxt
                        size += 1
                        stack.clear()
                        advanced = True
                        break
                    if dist[w] == dist[u] + 1:
                        stack.append(w)
                        advanced = True
                        break
                if not advanced:
                    dist[u] = _INF
                    stack.pop()
