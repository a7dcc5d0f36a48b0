"""Slow, obviously-correct reference implementations used only by tests."""

from __future__ import annotations

import math
from collections import deque

import numpy as np

_NP_MODE = {"reflect": "reflect", "wrap": "wrap", "zero": "constant"}


def naive_ward(features):
    """O(n^3) greedy Ward: recompute every pairwise increase from means.

    Pairs are scanned in lexicographic (a, b) order and only a strictly
    smaller cost replaces the incumbent, so ties go to the lowest pair.
    """
    members = {i: [float(v)] for i, v in enumerate(features)}
    means = {i: v[0] for i, v in members.items()}
    merges = []
    next_id = len(members)
    while len(members) > 1:
        ids = sorted(members)
        best = None
        for ia, a in enumerate(ids):
            na, ma = len(members[a]), means[a]
            for b in ids[ia + 1:]:
                nb = len(members[b])
                cost = na * nb / (na + nb) * (ma - means[b]) ** 2
                if best is None or cost < best[0]:
                    best = (cost, a, b)
        cost, a, b = best
        merged = members.pop(a) + members.pop(b)
        del means[a], means[b]
        members[next_id] = merged
        means[next_id] = sum(merged) / len(merged)
        merges.append((a, b, cost, len(merged)))
        next_id += 1
    return merges


def within_ss(groups):
    total = 0.0
    for g in groups:
        m = sum(g) / len(g)
        total += sum((v - m) ** 2 for v in g)
    return total


def loop_convolve(img, kernel, mode):
    """Explicit double sum of out[p] = sum_z padded(p - z) psi(z)."""
    img = np.asarray(img, dtype=float)
    kernel = np.asarray(kernel)
    m, n = img.shape
    h, w = kernel.shape
    ch, cw = (h - 1) // 2, (w - 1) // 2
    top, left = h - 1 - ch, w - 1 - cw
    padded = np.pad(img, ((top, ch), (left, cw)), mode=_NP_MODE[mode])
    out = np.zeros((m, n), dtype=complex)
    for r in range(m):
        for c in range(n):
            acc = 0j
            for a in range(h):
                for b in range(w):
                    zy, zx = a - ch, b - cw
                    acc += padded[r - zy + top, c - zx + left] * kernel[a, b]
            out[r, c] = acc
    return out


def bfs_fill(bitmap):
    """Hole filling by 4-connected BFS of the background from the border."""
    fg = np.asarray(bitmap, dtype=bool)
    m, n = fg.shape
    outside = np.zeros_like(fg)
    q = deque()
    for r in range(m):
        for c in range(n):
            if (r in (0, m - 1) or c in (0, n - 1)) and not fg[r, c]:
                outside[r, c] = True
                q.append((r, c))
    while q:
        r, c = q.popleft()
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < m and 0 <= cc < n and not fg[rr, cc] and not outside[rr, cc]:
                outside[rr, cc] = True
                q.append((rr, cc))
    return ~outside


def crop_oracle(m, n, pc, pr):
    mc = pc * math.floor(m / pc)
    nc = pr * math.floor(n / pr)
    return mc, nc, [
        ("top_left", 0, 0),
        ("top_right", 0, n - nc),
        ("bottom_left", m - mc, 0),
        ("bottom_right", m - mc, n - nc),
    ]


def rectangle_union(shape, rects):
    """Solid union of (top, left, bottom, right) end-exclusive rectangles."""
    out = np.zeros(shape, dtype=bool)
    for t, l, b, r in rects:
        out[t:b, l:r] = True
    return out
