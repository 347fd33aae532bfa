"""Offline planar dominance counting via a Fenwick tree.

dominating_count answers, for each query point q, how many points p of a
set satisfy p >= q componentwise (closed comparisons).  Points and
queries are swept together in decreasing first coordinate; a Fenwick tree
over second-coordinate ranks counts the inserted points, giving
O((n + k) log(n + k)) overall instead of the quadratic pairwise scan.
"""

from __future__ import annotations

import numpy as np


class FenwickTree:
    """Prefix-sum tree over 1..size (1-indexed)."""

    def __init__(self, size):
        self.size = size
        self.tree = [0] * (size + 1)

    def update(self, i, delta=1):
        while i <= self.size:
            self.tree[i] += delta
            i += i & (-i)

    def query(self, i):
        """Sum over 1..i."""
        s = 0
        while i > 0:
            s += self.tree[i]
            i -= i & (-i)
        return s


def dominating_count(points, queries):
    """#{j : points[j] >= q componentwise} for each row q of queries."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    qs = np.asarray(queries, dtype=float).reshape(-1, 2)
    n, k = len(pts), len(qs)
    out = np.zeros(k, dtype=np.int64)
    if n == 0 or k == 0:
        return out

    all_y = np.unique(np.concatenate([pts[:, 1], qs[:, 1]]))
    # rank of y among distinct values, 1-indexed
    p_rank = np.searchsorted(all_y, pts[:, 1]) + 1
    q_rank = np.searchsorted(all_y, qs[:, 1]) + 1

    p_order = np.argsort(-pts[:, 0], kind="stable")
    q_order = np.argsort(-qs[:, 0], kind="stable")

    tree = FenwickTree(len(all_y))
    inserted = 0
    pi = 0
    px_sorted = pts[p_order, 0]
    for qi in q_order:
        qx = qs[qi, 0]
        while pi < n and px_sorted[pi] >= qx:
            tree.update(int(p_rank[p_order[pi]]))
            inserted += 1
            pi += 1
        # inserted points have x >= qx; count those with y >= qy
        out[qi] = inserted - tree.query(int(q_rank[qi]) - 1)
    return out


def dominating_count_naive(points, queries):
    """Reference quadratic scan; exact integer counts, used as the slow path."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    qs = np.asarray(queries, dtype=float).reshape(-1, 2)
    out = np.zeros(len(qs), dtype=np.int64)
    for i, (qx, qy) in enumerate(qs):
        out[i] = int(np.count_nonzero((pts[:, 0] >= qx) & (pts[:, 1] >= qy)))
    return out
