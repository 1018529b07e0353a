"""Pure numpy/Python implementations of the hot kernels.

These are the fallback for the compiled extension ``stablequad._ckernels``.
Both backends must produce bit-identical outputs for identical inputs and
RNG state; the compiled module mirrors the exact arithmetic used here
(same uniform consumption, same comparison order in the inversion search).
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"


def tail_inverse(u: float, alpha: float, c_phi: float, k_cut: int) -> int:
    """Resolve a tail draw: smallest k > k_cut with P(X <= k) > u.

    Uses the exact gamma-ratio tail mass
        T(x) = -c_phi * exp(lgamma(x - alpha) - lgamma(x)) / Gamma(1 - alpha)
    so the cost is logarithmic in the overshoot (the tail is heavy enough
    that a term-by-term walk would have unbounded expected length as alpha
    approaches 1).  Both kernel backends call this exact function, which
    keeps their draw streams bit-identical.
    """
    want = 1.0 - u  # accept k iff T(k + 1) < want
    scale = -c_phi / math.gamma(1.0 - alpha)

    def tail_ok(k: int) -> bool:
        x = float(k + 1)
        return scale * math.exp(math.lgamma(x - alpha) - math.lgamma(x)) < want

    lo = k_cut + 1  # smallest admissible outcome
    if tail_ok(lo):
        return lo
    hi = 2 * lo
    while not tail_ok(hi):
        lo = hi
        hi *= 2
        if hi > 1 << 62:
            return hi  # unreachable for u < 1; guards pathological input
    # invariant: not tail_ok(lo), tail_ok(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail_ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def draw_offspring(cum: np.ndarray, alpha: float, c_phi: float, u: np.ndarray) -> np.ndarray:
    """Invert uniforms ``u`` through the cumulative table (plus analytic tail)."""
    k_cut = len(cum) - 1
    out = np.searchsorted(cum, u, side="right").astype(np.int64)
    over = np.nonzero(out > k_cut)[0]
    for i in over:
        out[i] = tail_inverse(float(u[i]), alpha, c_phi, k_cut)
    return out


def sample_conditioned_offspring(
    cum: np.ndarray,
    alpha: float,
    c_phi: float,
    n: int,
    max_trials: int,
    rng: np.random.Generator,
):
    """Rejection-sample n+1 offspring counts conditioned to sum to n.

    Each trial consumes exactly n+1 uniforms whether or not it is
    accepted, so the stream position after the call depends only on the
    number of trials, never on where a trial was abandoned.

    Returns (offspring, trials) with offspring=None if the budget ran out.
    """
    buf = np.empty(n + 1)
    for trial in range(1, max_trials + 1):
        rng.random(out=buf)
        draws = draw_offspring(cum, alpha, c_phi, buf)
        if int(draws.sum()) == n:
            return draws, trial
    return None, max_trials


def parent_height_from_offspring(offspring: np.ndarray):
    """Decode lexicographic offspring counts into parent and height arrays."""
    n = len(offspring) - 1
    parent = np.empty(n + 1, dtype=np.int64)
    height = np.empty(n + 1, dtype=np.int64)
    parent[0] = -1
    height[0] = 0
    # stack of (vertex, remaining children)
    stack_v = np.empty(n + 1, dtype=np.int64)
    stack_r = np.empty(n + 1, dtype=np.int64)
    stack_v[0] = 0
    stack_r[0] = offspring[0]
    top = 0
    for j in range(1, n + 1):
        while stack_r[top] == 0:
            top -= 1
            if top < 0:
                raise ValueError("offspring sequence is not a valid tree coding")
        p = stack_v[top]
        stack_r[top] -= 1
        parent[j] = p
        height[j] = height[p] + 1
        top += 1
        stack_v[top] = j
        stack_r[top] = offspring[j]
    return parent, height


def contour_vertices(child_offsets: np.ndarray, children: np.ndarray) -> np.ndarray:
    """Vertex visited at each of the 2n corners of the contour exploration."""
    n = len(children)
    out = np.empty(2 * n, dtype=np.int64)
    pos = 0
    # stack of (vertex, index of next child to descend into)
    stack_v = np.empty(n + 2, dtype=np.int64)
    stack_c = np.empty(n + 2, dtype=np.int64)
    stack_v[0] = 0
    stack_c[0] = child_offsets[0]
    top = 0
    while top >= 0:
        v = stack_v[top]
        c = stack_c[top]
        if c < child_offsets[v + 1]:
            out[pos] = v  # corner of the edge descending to the next child
            pos += 1
            stack_c[top] += 1
            w = children[c]
            top += 1
            stack_v[top] = w
            stack_c[top] = child_offsets[w]
        else:
            top -= 1
            if top >= 0:
                out[pos] = v  # corner of the edge climbing back to the parent
                pos += 1
    return out


def successor_table(corner_labels: np.ndarray) -> np.ndarray:
    """First later corner (cyclically) whose label is one less; -1 at minima."""
    m = len(corner_labels)
    lmin = int(corner_labels.min())
    lmax = int(corner_labels.max())
    width = lmax - lmin + 1
    next_pos = np.full(width, -1, dtype=np.int64)
    succ = np.full(m, -1, dtype=np.int64)
    for t in range(2 * m - 1, -1, -1):
        i = t % m
        lab = int(corner_labels[i]) - lmin
        if lab > 0:
            j = next_pos[lab - 1]
            if t < m:
                succ[i] = j % m if j >= 0 else -1
        next_pos[lab] = t
    return succ


def bfs_distances(indptr: np.ndarray, indices: np.ndarray, source: int, r_max: int) -> np.ndarray:
    """Hop distances from ``source`` over a CSR adjacency; -1 = not reached.

    If r_max >= 0 the search stops after the r_max-th level.
    """
    n_vertices = len(indptr) - 1
    dist = np.full(n_vertices, -1, dtype=np.int32)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size and (r_max < 0 or level < r_max):
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        excl = np.cumsum(counts) - counts
        gather = np.arange(total, dtype=np.int64) + np.repeat(starts - excl, counts)
        neighbors = indices[gather]
        fresh = neighbors[dist[neighbors] < 0]
        if fresh.size == 0:
            break
        frontier = np.unique(fresh)
        level += 1
        dist[frontier] = level
    return dist
