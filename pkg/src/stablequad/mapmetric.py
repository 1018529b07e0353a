"""Graph-metric queries on quadrangulations and the label-based distance
bound, plus the two exact distance identities used as hard invariants.

Distances to the pointed vertex equal label differences, and the label
bound d_circ dominates the graph distance between any two tree vertices;
both are theorems of the construction, so any violation raises
InvariantViolation rather than being reported as a statistic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .cvs import QuadMap
from .errors import InvariantViolation, ParameterError
from .gwtree import LabelledTree


@dataclass(frozen=True)
class BallProfile:
    """Cumulative vertex counts of balls around one center."""

    center: int
    cumulative_counts: np.ndarray  # entry r = #{v : d(center, v) <= r}
    n_faces: int

    @property
    def r_max(self) -> int:
        return len(self.cumulative_counts) - 1


def bfs_distances(q: QuadMap, source: int, r_max: int | None = None) -> np.ndarray:
    """Exact hop distances from ``source``; -1 where the truncated search
    did not reach (with ``r_max=None`` every vertex is reached)."""
    if not (0 <= source < q.n_vertices):
        raise ParameterError(f"source {source} out of range for {q.n_vertices} vertices")
    indptr, indices = q.adjacency()
    return kernels.bfs_distances(indptr, indices, source, -1 if r_max is None else int(r_max))


def ball_profile(q: QuadMap, center: int, r_max: int) -> BallProfile:
    """Cumulative ball sizes around ``center`` for radii 0..r_max."""
    if r_max < 0:
        raise ParameterError("r_max must be nonnegative")
    dist = bfs_distances(q, center, r_max=r_max)
    reached = dist[dist >= 0]
    counts = np.bincount(reached, minlength=r_max + 1)[: r_max + 1]
    return BallProfile(center=center, cumulative_counts=np.cumsum(counts), n_faces=q.n_faces)


class LabelIntervalMinima:
    """Sparse-table range-minimum structure over the lexicographic labels.

    Built once per labelled tree in O(n log n); queries are O(1) and
    vectorize over index arrays.
    """

    def __init__(self, labels: np.ndarray):
        values = np.asarray(labels, dtype=np.int64)
        levels = max(int(np.floor(np.log2(len(values)))) + 1, 1)
        table = [values]
        span = 1
        for _ in range(1, levels):
            prev = table[-1]
            if len(prev) <= span:
                break
            table.append(np.minimum(prev[:-span], prev[span:]))
            span *= 2
        self._table = table

    def range_min(self, lo, hi):
        """Minimum over closed index ranges [lo, hi] (arrays or scalars)."""
        lo = np.asarray(lo, dtype=np.int64)
        hi = np.asarray(hi, dtype=np.int64)
        width = hi - lo + 1
        level = np.frexp(width.astype(np.float64))[1] - 1  # floor(log2(width))
        level = np.asarray(level, dtype=np.int64)
        out = np.empty(lo.shape, dtype=np.int64)
        for lev in np.unique(level):
            tab = self._table[int(lev)]
            mask = level == lev
            a = lo[mask]
            b = hi[mask] - (1 << int(lev)) + 1
            out[mask] = np.minimum(tab[a], tab[b])
        return out if out.shape else int(out)


def _interval_minima(lt: LabelledTree) -> LabelIntervalMinima:
    cache = getattr(lt, "_rmq", None)
    if cache is None:
        cache = LabelIntervalMinima(lt.labels)
        object.__setattr__(lt, "_rmq", cache)
    return cache


def d_circ(lt: LabelledTree, i, j, cyclic: bool = False):
    """Label bound: l(u_i) + l(u_j) - 2 min over the index interval, + 2.

    The default uses the plain interval [min(i,j), max(i,j)], which is the
    form whose domination of the graph distance is a theorem.  With
    ``cyclic=True`` the smaller of the two lexicographic intervals between
    i and j is used instead (exploratory variant; no domination claim).
    """
    n = lt.n_edges
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    if (i < 0).any() or (i > n).any() or (j < 0).any() or (j > n).any():
        raise ParameterError("vertex index out of range")
    lo = np.minimum(i, j)
    hi = np.maximum(i, j)
    rmq = _interval_minima(lt)
    inner = rmq.range_min(lo, hi)
    labels = lt.labels
    base = labels[i] + labels[j]
    direct = base - 2 * inner + 2
    if not cyclic:
        return direct if direct.shape else int(direct)
    # Complementary lexicographic interval [hi, lo + n + 1] on the doubled
    # index line.
    doubled = getattr(lt, "_rmq2", None)
    if doubled is None:
        doubled = LabelIntervalMinima(np.concatenate([labels, labels]))
        object.__setattr__(lt, "_rmq2", doubled)
    outer = doubled.range_min(hi, lo + n + 1)
    other = base - 2 * outer + 2
    best = np.minimum(direct, other)
    return best if best.shape else int(best)


@dataclass(frozen=True)
class DominationReport:
    """Slack statistics for d_graph <= d_circ over a sample of pairs."""

    n_pairs: int
    max_slack: int
    mean_slack: float
    slack_histogram: np.ndarray


def check_dcirc_dominates(q: QuadMap, lt: LabelledTree, pairs: np.ndarray) -> DominationReport:
    """Assert d_graph(u_i, u_j) <= d_circ(i, j) for every sampled pair.

    ``pairs`` is an (m, 2) integer array of lexicographic indices.  BFS
    runs once per distinct source.  Violations raise InvariantViolation.
    """
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ParameterError("pairs must have shape (m, 2)")
    bound = d_circ(lt, pairs[:, 0], pairs[:, 1])
    dvals = np.empty(len(pairs), dtype=np.int64)
    for src in np.unique(pairs[:, 0]):
        mask = pairs[:, 0] == src
        dist = bfs_distances(q, int(src))
        dvals[mask] = dist[pairs[mask, 1]]
    slack = bound - dvals
    if (slack < 0).any():
        bad = int(np.argmax(slack < 0))
        raise InvariantViolation(
            f"d_circ violated at pair {pairs[bad].tolist()}: "
            f"graph {dvals[bad]} > bound {bound[bad]}"
        )
    return DominationReport(
        n_pairs=len(pairs),
        max_slack=int(slack.max()),
        mean_slack=float(slack.mean()),
        slack_histogram=np.bincount(slack),
    )


@dataclass(frozen=True)
class PointedIdentityReport:
    n_vertices: int
    eccentricity: int


def check_identity_to_pointed(q: QuadMap, lt: LabelledTree) -> PointedIdentityReport:
    """Assert d(v, pointed) == label(v) - label(pointed) for every vertex."""
    dist = bfs_distances(q, q.pointed_vertex)
    labels = lt.labels
    expected = labels - (labels.min() - 1)
    if not np.array_equal(dist[: q.n_vertices - 1], expected) or dist[q.pointed_vertex] != 0:
        bad = int(np.argmax(dist[: q.n_vertices - 1] != expected))
        raise InvariantViolation(
            f"distance identity violated at vertex {bad}: "
            f"BFS {dist[bad]} vs labels {expected[bad]}"
        )
    return PointedIdentityReport(n_vertices=q.n_vertices, eccentricity=int(dist.max()))
