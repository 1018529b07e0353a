# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Semantics (including RNG consumption and float arithmetic order) mirror
``stablequad._pykernels`` exactly, so the two backends are interchangeable
bit for bit.
"""

import numpy as np

BACKEND_NAME = "cython"


cdef inline Py_ssize_t _invert_one(const double* cum, Py_ssize_t k_cut, double u) noexcept nogil:
    # First index with cum[idx] > u (numpy searchsorted, side='right').
    # Small outcomes carry almost all the mass; count threshold crossings
    # branch-free before falling back to the binary search.
    cdef Py_ssize_t r, lo, hi, mid
    r = (u >= cum[0]) + (u >= cum[1]) + (u >= cum[2]) + (u >= cum[3]) \
        + (u >= cum[4]) + (u >= cum[5]) + (u >= cum[6]) + (u >= cum[7])
    if r < 8:
        return r
    if u >= cum[k_cut]:
        return k_cut + 1
    lo = 8
    hi = k_cut + 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    return lo


from stablequad._pykernels import tail_inverse as _tail_inverse


def draw_offspring(const double[::1] cum, double alpha, double c_phi, const double[::1] u):
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t k_cut = cum.shape[0] - 1
    out_arr = np.empty(m, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t i, r
    for i in range(m):
        r = _invert_one(&cum[0], k_cut, u[i])
        if r > k_cut:
            out[i] = _tail_inverse(u[i], alpha, c_phi, k_cut)
        else:
            out[i] = r
    return out_arr


def sample_conditioned_offspring(const double[::1] cum, double alpha, double c_phi,
                                 long long n, long long max_trials, rng):
    cdef Py_ssize_t k_cut = cum.shape[0] - 1
    out_arr = np.empty(n + 1, dtype=np.int64)
    buf_arr = np.empty(n + 1, dtype=np.float64)
    cdef long long[::1] out = out_arr
    cdef double[::1] u = buf_arr
    cdef Py_ssize_t i, r
    cdef long long trial, total
    cdef double uu
    cdef const double* c = &cum[0]
    rng_fill = rng.random
    for trial in range(1, max_trials + 1):
        rng_fill(out=buf_arr)
        total = 0
        for i in range(n + 1):
            uu = u[i]
            r = (uu >= c[0]) + (uu >= c[1]) + (uu >= c[2]) + (uu >= c[3]) \
                + (uu >= c[4]) + (uu >= c[5]) + (uu >= c[6]) + (uu >= c[7])
            if r == 8:
                r = _invert_one(c, k_cut, uu)
                if r > k_cut:
                    r = _tail_inverse(uu, alpha, c_phi, k_cut)
            out[i] = r
            total += r
            if total > n:
                total = -1
                break
        if total == n:
            return out_arr, trial
    return None, max_trials


def parent_height_from_offspring(const long long[::1] offspring):
    cdef Py_ssize_t n = offspring.shape[0] - 1
    parent_arr = np.empty(n + 1, dtype=np.int64)
    height_arr = np.empty(n + 1, dtype=np.int64)
    stack_v_arr = np.empty(n + 1, dtype=np.int64)
    stack_r_arr = np.empty(n + 1, dtype=np.int64)
    cdef long long[::1] parent = parent_arr
    cdef long long[::1] height = height_arr
    cdef long long[::1] stack_v = stack_v_arr
    cdef long long[::1] stack_r = stack_r_arr
    cdef Py_ssize_t j, top
    cdef long long p
    parent[0] = -1
    height[0] = 0
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
    return parent_arr, height_arr


def contour_vertices(const long long[::1] child_offsets, const long long[::1] children):
    cdef Py_ssize_t n = children.shape[0]
    out_arr = np.empty(2 * n, dtype=np.int64)
    stack_v_arr = np.empty(n + 2, dtype=np.int64)
    stack_c_arr = np.empty(n + 2, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef long long[::1] stack_v = stack_v_arr
    cdef long long[::1] stack_c = stack_c_arr
    cdef Py_ssize_t pos = 0, top = 0
    cdef long long v, c, w
    stack_v[0] = 0
    stack_c[0] = child_offsets[0]
    while top >= 0:
        v = stack_v[top]
        c = stack_c[top]
        if c < child_offsets[v + 1]:
            out[pos] = v
            pos += 1
            stack_c[top] += 1
            w = children[c]
            top += 1
            stack_v[top] = w
            stack_c[top] = child_offsets[w]
        else:
            top -= 1
            if top >= 0:
                out[pos] = v
                pos += 1
    return out_arr


def successor_table(const long long[::1] corner_labels):
    cdef Py_ssize_t m = corner_labels.shape[0]
    cdef Py_ssize_t t, i
    cdef long long lmin = corner_labels[0]
    cdef long long lmax = corner_labels[0]
    cdef long long lab, j
    for t in range(m):
        if corner_labels[t] < lmin:
            lmin = corner_labels[t]
        if corner_labels[t] > lmax:
            lmax = corner_labels[t]
    next_pos_arr = np.full(lmax - lmin + 1, -1, dtype=np.int64)
    succ_arr = np.full(m, -1, dtype=np.int64)
    cdef long long[::1] next_pos = next_pos_arr
    cdef long long[::1] succ = succ_arr
    for t in range(2 * m - 1, -1, -1):
        i = t % m
        lab = corner_labels[i] - lmin
        if lab > 0:
            j = next_pos[lab - 1]
            if t < m:
                succ[i] = j % m if j >= 0 else -1
        next_pos[lab] = t
    return succ_arr


def bfs_distances(const long long[::1] indptr, const long long[::1] indices,
                  long long source, long long r_max):
    cdef Py_ssize_t n_vertices = indptr.shape[0] - 1
    dist_arr = np.full(n_vertices, -1, dtype=np.int32)
    queue_arr = np.empty(n_vertices, dtype=np.int64)
    cdef int[::1] dist = dist_arr
    cdef long long[::1] queue = queue_arr
    cdef Py_ssize_t head = 0, tail = 0
    cdef long long v, w, e
    cdef int d
    dist[source] = 0
    queue[tail] = source
    tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        d = dist[v]
        if r_max >= 0 and d >= r_max:
            continue
        for e in range(indptr[v], indptr[v + 1]):
            w = indices[e]
            if dist[w] < 0:
                dist[w] = d + 1
                queue[tail] = w
                tail += 1
    return dist_arr
