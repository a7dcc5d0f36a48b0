"""Ward agglomerative clustering of scalar block energies.

Leaves are numbered ``0..n-1`` and every merge creates the next id
(``n, n+1, ...``), as in SciPy's linkage convention. The merge cost is
the increase in total within-cluster sum of squares::

    delta(A, B) = |A| |B| / (|A| + |B|) * (mean_A - mean_B) ** 2

Ties go to the lowest ``(a, b)`` id pair with ``a < b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np


class Merge(NamedTuple):
    a: int
    b: int
    cost: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    merges: tuple[Merge, ...]
    n_leaves: int

    def leaves(self, cluster: int) -> list[int]:
        """Sorted leaf ids under ``cluster``."""
        out, stack = [], [cluster]
        while stack:
            c = stack.pop()
            if c < self.n_leaves:
                out.append(c)
            else:
                m = self.merges[c - self.n_leaves]
                stack.extend((m.a, m.b))
        return sorted(out)

    def as_rows(self) -> list[tuple[int, int, float, int]]:
        return [tuple(m) for m in self.merges]


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    defective_cluster: int
    sizes: tuple[int, int]

    @property
    def defective(self) -> np.ndarray:
        return self.labels == self.defective_cluster


def ward_cluster(features: Sequence[float]) -> Dendrogram:
    """Ward linkage on 1-D features using Lance-Williams updates.

    Costs live in a matrix indexed by cluster id, so the row-major argmin
    over the active upper triangle is exactly the lowest-pair tie rule.
    """
    x = np.asarray(features, dtype=np.float64).ravel()
    n = x.size
    if n < 2:
        raise ValueError("Ward clustering needs at least two features")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    total = 2 * n - 1
    cost = np.full((total, total), np.inf)
    cost[:n, :n] = 0.5 * (x[:, None] - x[None, :]) ** 2
    cost[np.tril_indices(total)] = np.inf
    size = np.zeros(total, dtype=np.int64)
    size[:n] = 1
    active = np.zeros(total, dtype=bool)
    active[:n] = True

    merges = []
    for new in range(n, total):
        flat = int(np.argmin(cost))
        a, b = divmod(flat, total)
        d_ab = cost[a, b]
        na, nb = size[a], size[b]
        active[a] = active[b] = False
        others = np.flatnonzero(active)
        # cost rows/cols of a and b, read from whichever triangle holds them
        d_ka = np.minimum(cost[others, a], cost[a, others])
        d_kb = np.minimum(cost[others, b], cost[b, others])
        nk = size[others]
        updated = ((nk + na) * d_ka + (nk + nb) * d_kb - nk * d_ab) / (nk + na + nb)
        cost[a, :] = cost[:, a] = np.inf
        cost[b, :] = cost[:, b] = np.inf
        cost[others, new] = np.maximum(updated, 0.0)
        size[new] = na + nb
        active[new] = True
        merges.append(Merge(a, b, float(max(d_ab, 0.0)), int(na + nb)))
    return Dendrogram(tuple(merges), n)


def cut_two(d: Dendrogram) -> tuple[list[int], list[int]]:
    """Undo the final merge.

    Returns the two leaf sets, the one holding leaf 0 first.
    """
    last = d.merges[-1]
    first, second = d.leaves(last.a), d.leaves(last.b)
    if second[0] < first[0]:
        first, second = second, first
    return first, second


def select_defective(partition: tuple[Sequence[int], Sequence[int]], energies) -> ClusterAssignment:
    """Label the minority cluster defective.

    Equal sizes fall back to the cluster whose mean is farther from the
    median of all energies, then to cluster 0 when the deviations agree
    to within rounding.
    """
    energies = np.asarray(energies, dtype=np.float64).ravel()
    groups = [np.asarray(p, dtype=np.int64) for p in partition]
    if len(groups) != 2 or any(g.size == 0 for g in groups):
        raise ValueError("partition must hold two non-empty clusters")
    labels = np.full(energies.size, -1, dtype=np.int64)
    for cid, g in enumerate(groups):
        labels[g] = cid
    if np.any(labels < 0) or sum(g.size for g in groups) != energies.size:
        raise ValueError("partition does not cover every leaf exactly once")
    sizes = (int(groups[0].size), int(groups[1].size))
    if sizes[0] != sizes[1]:
        defective = 0 if sizes[0] < sizes[1] else 1
    else:
        median = float(np.median(energies))
        dev = [abs(float(energies[g].mean()) - median) for g in groups]
        # relative tolerance so rounding cannot break a symmetric tie
        defective = 1 if dev[1] - dev[0] > 1e-9 * max(dev) else 0
    return ClusterAssignment(labels, defective, sizes)


def separated(d: Dendrogram, tau: float | None, rel_floor: float = 1e-12, scale: float = 1.0) -> bool:
    """Optional no-defect gate: is the final merge clearly above the rest?

    With ``tau`` unset the gate is off and every clustering counts as
    separated. Otherwise the final cost must exceed ``tau`` times the
    median merge cost and also ``rel_floor * scale`` so that numerically
    flat inputs read as unseparated.
    """
    if tau is None:
        return True
    costs = np.array([m.cost for m in d.merges])
    final = costs[-1]
    return bool(final > tau * float(np.median(costs)) and final > rel_floor * scale)


def cluster_blocks(energies, min_separation: float | None = None) -> tuple[Dendrogram, ClusterAssignment]:
    """Ward tree, two-way cut and defective-cluster choice for one block grid."""
    flat = np.asarray(energies, dtype=np.float64).ravel()
    tree = ward_cluster(flat)
    assignment = select_defective(cut_two(tree), flat)
    scale = float(flat.size * np.mean(flat * flat))
    if not separated(tree, min_separation, scale=scale):
        # gate closed: report both clusters but flag nothing
        assignment = ClusterAssignment(assignment.labels, -1, assignment.sizes)
    return tree, assignment
