"""Pure-Python reference kernels.

Every function mirrors ``_ckernels.pyx`` argument for argument and must return
bit-identical results; the test suite runs both against each other.
Graphs arrive as symmetric CSR arrays ``(indptr, indices)``.
"""
import numpy as np


def _best_step(indptr, indices, u, rank, x):
    best = -1
    best_gain = 0.0
    ux = u[x]
    for k in range(indptr[x], indptr[x + 1]):
        y = indices[k]
        gain = u[y] - ux
        if gain > 0.0 and (best < 0 or gain > best_gain
                           or (gain == best_gain and rank[y] < rank[best])):
            best = y
            best_gain = gain
    return best


def greedy_successors(indptr, indices, u, rank):
    """Steepest strictly-ascending neighbour of each vertex, -1 at local maxima."""
    indptr = np.asarray(indptr).tolist()
    indices = np.asarray(indices).tolist()
    uu = np.asarray(u, dtype=float).tolist()
    rk = np.asarray(rank).tolist()
    return np.array([_best_step(indptr, indices, uu, rk, x) for x in range(len(uu))], dtype=np.int64)


def ascend(indptr, indices, u, rank, start):
    indptr = np.asarray(indptr).tolist()
    indices = np.asarray(indices).tolist()
    uu = np.asarray(u, dtype=float).tolist()
    rk = np.asarray(rank).tolist()
    path = [int(start)]
    x = int(start)
    while True:
        y = _best_step(indptr, indices, uu, rk, x)
        if y < 0:
            return np.array(path, dtype=np.int64)
        path.append(y)
        x = y


def bellman_sweep(indptr, indices, weights, v, out):
    """One application of the max-plus operator over strictly ascending arcs.

    ``weights[k]`` is the gain ``D`` of the arc stored in CSR slot k.  Writes
    ``out[x] = max(0, max_{k in row x, D_k > 0} (D_k + v[indices[k]]))`` and
    returns the number of entries that differ from ``v``.
    """
    changed = 0
    ip = np.asarray(indptr).tolist()
    ind = np.asarray(indices).tolist()
    dd = np.asarray(weights, dtype=float).tolist()
    vv = np.asarray(v, dtype=float).tolist()
    for x in range(len(vv)):
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
    """``sum_{y ~ x} (u[y] - u[x])`` for every vertex, summed in CSR order."""
    ip = np.asarray(indptr).tolist()
    ind = np.asarray(indices).tolist()
    uu = np.asarray(u, dtype=float).tolist()
    out = np.empty(len(uu))
    for x in range(len(uu)):
        s = 0.0
        ux = uu[x]
        for k in range(ip[x], ip[x + 1]):
            s += uu[ind[k]] - ux
        out[x] = s
    return out
