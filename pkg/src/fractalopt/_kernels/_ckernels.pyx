# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the graph kernels in ``_fallback.py``."""
import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline long long _best_step(const long long[:] indptr, const long long[:] indices,
                                 const double[:] u, const long long[:] rank, long long x) noexcept nogil:
    cdef long long best = -1
    cdef double best_gain = 0.0
    cdef double ux = u[x]
    cdef double gain
    cdef long long k, y
    for k in range(indptr[x], indptr[x + 1]):
        y = indices[k]
        gain = u[y] - ux
        if gain > 0.0 and (best < 0 or gain > best_gain
                           or (gain == best_gain and rank[y] < rank[best])):
            best = y
            best_gain = gain
    return best


def greedy_successors(indptr, indices, u, rank):
    cdef const long long[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long long[:] ind = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[:] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef const long long[:] rk = np.ascontiguousarray(rank, dtype=np.int64)
    cdef Py_ssize_t n = uu.shape[0]
    out = np.empty(n, dtype=np.int64)
    cdef long long[:] o = out
    cdef Py_ssize_t x
    with nogil:
        for x in range(n):
            o[x] = _best_step(ip, ind, uu, rk, x)
    return out


def ascend(indptr, indices, u, rank, long long start):
    cdef const long long[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long long[:] ind = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[:] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef const long long[:] rk = np.ascontiguousarray(rank, dtype=np.int64)
    # strictly increasing values bound the path by the vertex count
    buf = np.empty(uu.shape[0] + 1, dtype=np.int64)
    cdef long long[:] b = buf
    cdef Py_ssize_t length = 1
    cdef long long x = start
    cdef long long y
    b[0] = start
    with nogil:
        while True:
            y = _best_step(ip, ind, uu, rk, x)
            if y < 0:
                break
            b[length] = y
            length += 1
            x = y
    return buf[:length].copy()


def bellman_sweep(indptr, indices, weights, v, double[:] out):
    cdef const long long[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long long[:] ind = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[:] dd = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[:] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0]
    cdef Py_ssize_t x
    cdef long long k
    cdef double best, gain, cand
    cdef long long changed = 0
    with nogil:
        for x in range(n):
            best = 0.0
            for k in range(ip[x], ip[x + 1]):
                gain = dd[k]
                if gain > 0.0:
                    cand = gain + vv[ind[k]]
                    if cand > best:
                        best = cand
            out[x] = best
            if best != vv[x]:
                changed += 1
    return changed


def vertex_laplacian(indptr, indices, u):
    cdef const long long[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long long[:] ind = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[:] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = uu.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[:] o = out
    cdef Py_ssize_t x
    cdef long long k
    cdef double s, ux
    with nogil:
        for x in range(n):
            s = 0.0
            ux = uu[x]
            for k in range(ip[x], ip[x + 1]):
                s += uu[ind[k]] - ux
            o[x] = s
    return out
