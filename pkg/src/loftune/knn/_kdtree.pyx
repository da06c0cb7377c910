"""Compiled exact k-nearest-neighbor kernels.

Two query paths share one bounded max-heap keyed by (squared distance,
row id): a kd-tree traversal with bounding-box pruning, and a brute-force
scan. Squared distances accumulate one coordinate at a time and the heap
order is lexicographic on (d2, id), which makes results identical to the
pure-numpy fallback bit for bit. Pruning is strict (boxes at exactly the
heap-worst distance are still visited) so distance ties always resolve to
the smallest row id no matter how the tree is shaped.
"""

import numpy as np

from libc.math cimport sqrt

# stack bound: median splits keep depth <= ~log2(n); 512 covers any real n
cdef enum:
    STACK_CAP = 512


cdef inline bint _worse(double d2_a, long long id_a, double d2_b, long long id_b) noexcept nogil:
    if d2_a != d2_b:
        return d2_a > d2_b
    return id_a > id_b


cdef inline void _heap_swap(double* hd, long long* hi, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    cdef double td = hd[a]
    cdef long long ti = hi[a]
    hd[a] = hd[b]
    hi[a] = hi[b]
    hd[b] = td
    hi[b] = ti


cdef inline void _sift_up(double* hd, long long* hi, Py_ssize_t pos) noexcept nogil:
    cdef Py_ssize_t parent
    while pos > 0:
        parent = (pos - 1) >> 1
        if _worse(hd[pos], hi[pos], hd[parent], hi[parent]):
            _heap_swap(hd, hi, pos, parent)
            pos = parent
        else:
            return


cdef inline void _sift_down(double* hd, long long* hi, Py_ssize_t count, Py_ssize_t pos) noexcept nogil:
    cdef Py_ssize_t child
    while True:
        child = 2 * pos + 1
        if child >= count:
            return
        if child + 1 < count and _worse(hd[child + 1], hi[child + 1], hd[child], hi[child]):
            child += 1
        if _worse(hd[child], hi[child], hd[pos], hi[pos]):
            _heap_swap(hd, hi, pos, child)
            pos = child
        else:
            return


cdef inline void _offer(double* hd, long long* hi, Py_ssize_t* count, Py_ssize_t k,
                        double d2, long long ident) noexcept nogil:
    if count[0] < k:
        hd[count[0]] = d2
        hi[count[0]] = ident
        count[0] += 1
        _sift_up(hd, hi, count[0] - 1)
    elif _worse(hd[0], hi[0], d2, ident):
        hd[0] = d2
        hi[0] = ident
        _sift_down(hd, hi, k, 0)


cdef inline double _dist2(const double* point, const double* q, Py_ssize_t p) noexcept nogil:
    cdef double acc = 0.0
    cdef double diff
    cdef Py_ssize_t j
    for j in range(p):
        diff = point[j] - q[j]
        acc += diff * diff
    return acc


cdef inline double _box_dist2(const double* bmin, const double* bmax,
                              const double* q, Py_ssize_t p) noexcept nogil:
    cdef double acc = 0.0
    cdef double d
    cdef Py_ssize_t j
    for j in range(p):
        if q[j] < bmin[j]:
            d = bmin[j] - q[j]
        elif q[j] > bmax[j]:
            d = q[j] - bmax[j]
        else:
            d = 0.0
        acc += d * d
    return acc


cdef inline void _emit_sorted(double* hd, long long* hi, Py_ssize_t count,
                              long long* out_ids, double* out_dist) noexcept nogil:
    # insertion sort ascending by (d2, id); count is small (= k)
    cdef Py_ssize_t i, j
    cdef double d
    cdef long long ident
    for i in range(1, count):
        d = hd[i]
        ident = hi[i]
        j = i
        while j > 0 and _worse(hd[j - 1], hi[j - 1], d, ident):
            hd[j] = hd[j - 1]
            hi[j] = hi[j - 1]
            j -= 1
        hd[j] = d
        hi[j] = ident
    for i in range(count):
        out_ids[i] = hi[i]
        out_dist[i] = sqrt(hd[i])


cdef void _query_tree(const double* pts, const long long* ids, Py_ssize_t p,
                      const long long* start, const long long* end,
                      const long long* left, const long long* right,
                      const double* bmin, const double* bmax,
                      const double* q, long long exclude, Py_ssize_t k,
                      double* hd, long long* hi, long long* stack) noexcept nogil:
    cdef Py_ssize_t top = 1
    cdef Py_ssize_t count = 0
    cdef long long node, lc, rc
    cdef Py_ssize_t t
    cdef double d2, dl, dr
    stack[0] = 0
    while top > 0:
        top -= 1
        node = stack[top]
        if count == k and _box_dist2(bmin + node * p, bmax + node * p, q, p) > hd[0]:
            continue
        lc = left[node]
        if lc < 0:
            for t in range(start[node], end[node]):
                if ids[t] == exclude:
                    continue
                d2 = _dist2(pts + t * p, q, p)
                _offer(hd, hi, &count, k, d2, ids[t])
        else:
            rc = right[node]
            dl = _box_dist2(bmin + lc * p, bmax + lc * p, q, p)
            dr = _box_dist2(bmin + rc * p, bmax + rc * p, q, p)
            if dl <= dr:  # visit nearer child first
                stack[top] = rc
                stack[top + 1] = lc
            else:
                stack[top] = lc
                stack[top + 1] = rc
            top += 2


def tree_query_batch(const double[:, ::1] pts, const long long[::1] ids,
                     const long long[::1] node_start, const long long[::1] node_end,
                     const long long[::1] node_left, const long long[::1] node_right,
                     const double[:, ::1] box_min, const double[:, ::1] box_max,
                     const double[:, ::1] queries, exclude_ids, Py_ssize_t k):
    """k nearest neighbors of each query row; exclude_ids is None or per-query."""
    cdef Py_ssize_t nq = queries.shape[0]
    cdef Py_ssize_t p = queries.shape[1]
    out_ids_arr = np.empty((nq, k), dtype=np.int64)
    out_dist_arr = np.empty((nq, k), dtype=np.float64)
    cdef long long[:, ::1] out_ids = out_ids_arr
    cdef double[:, ::1] out_dist = out_dist_arr
    heap_d_arr = np.empty(k, dtype=np.float64)
    heap_i_arr = np.empty(k, dtype=np.int64)
    stack_arr = np.empty(STACK_CAP, dtype=np.int64)
    cdef double[::1] hd = heap_d_arr
    cdef long long[::1] hi = heap_i_arr
    cdef long long[::1] stack = stack_arr
    cdef const long long[::1] excl
    cdef bint has_excl = exclude_ids is not None
    if has_excl:
        excl = exclude_ids
    cdef Py_ssize_t i
    cdef long long e
    with nogil:
        for i in range(nq):
            e = excl[i] if has_excl else -1
            _query_tree(&pts[0, 0], &ids[0], p,
                        &node_start[0], &node_end[0], &node_left[0], &node_right[0],
                        &box_min[0, 0], &box_max[0, 0],
                        &queries[i, 0], e, k, &hd[0], &hi[0], &stack[0])
            _emit_sorted(&hd[0], &hi[0], k, &out_ids[i, 0], &out_dist[i, 0])
    return out_ids_arr, out_dist_arr


def brute_query_batch(const double[:, ::1] pts, const double[:, ::1] queries,
                      exclude_ids, Py_ssize_t k):
    """Brute-force variant over the original point order (row index = id)."""
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t nq = queries.shape[0]
    cdef Py_ssize_t p = queries.shape[1]
    out_ids_arr = np.empty((nq, k), dtype=np.int64)
    out_dist_arr = np.empty((nq, k), dtype=np.float64)
    cdef long long[:, ::1] out_ids = out_ids_arr
    cdef double[:, ::1] out_dist = out_dist_arr
    heap_d_arr = np.empty(k, dtype=np.float64)
    heap_i_arr = np.empty(k, dtype=np.int64)
    cdef double[::1] hd = heap_d_arr
    cdef long long[::1] hi = heap_i_arr
    cdef const long long[::1] excl
    cdef bint has_excl = exclude_ids is not None
    if has_excl:
        excl = exclude_ids
    cdef Py_ssize_t i, t, count
    cdef long long e
    cdef double d2
    with nogil:
        for i in range(nq):
            e = excl[i] if has_excl else -1
            count = 0
            for t in range(n):
                if t == e:
                    continue
                d2 = _dist2(&pts[t, 0], &queries[i, 0], p)
                _offer(&hd[0], &hi[0], &count, k, d2, t)
            _emit_sorted(&hd[0], &hi[0], count, &out_ids[i, 0], &out_dist[i, 0])
    return out_ids_arr, out_dist_arr
