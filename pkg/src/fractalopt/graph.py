"""Level-m graph approximations ``F_m = (V_m, A_m)`` of a self-similar set."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .ifs import Address, IfsSystem, InvalidWordError, Word, check_word

DEFAULT_BUDGET = 5_000_000
DEDUP_RTOL = 1e-9


class GraphError(ValueError):
    pass


class BudgetExceededError(GraphError):
    pass


class InvalidVertexError(GraphError, IndexError):
    pass


@dataclass(frozen=True, eq=False)
class FractalGraph:
    """Deduplicated vertex set, oriented edges, and the cell decomposition.

    ``cells[k]`` lists the vertex ids of ``f_W(V_0)`` (boundary order) for the
    k-th word ``W`` of length ``level`` in lexicographic order.  ``edges`` are
    oriented pairs and ``edge_cells`` records the cell that generated each one.
    Neighbour queries go through the symmetric CSR arrays ``indptr``/``indices``.
    """

    ifs: IfsSystem
    level: int
    coords: np.ndarray
    cells: np.ndarray
    edges: np.ndarray
    edge_cells: np.ndarray
    boundary_ids: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.coords.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def dimension(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.n_vertices

    def __repr__(self) -> str:
        return (f"FractalGraph({self.ifs.name!r}, level={self.level}, "
                f"vertices={self.n_vertices}, edges={self.n_edges})")

    def check_vertex(self, x) -> int:
        if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
            raise InvalidVertexError(f"vertex id {x!r} is not an integer")
        if not 0 <= x < self.n_vertices:
            raise InvalidVertexError(f"vertex id {x} out of range [0, {self.n_vertices})")
        return int(x)

    def word_of(self, cell: int) -> Word:
        n = self.ifs.n_maps
        letters = []
        for _ in range(self.level):
            cell, r = divmod(cell, n)
            letters.append(r + 1)
        return tuple(reversed(letters))

    def cell_of(self, w: Sequence[int]) -> int:
        w = check_word(self.ifs, w)
        if len(w) != self.level:
            raise InvalidWordError(f"word {w} has length {len(w)}, graph level is {self.level}")
        k = 0
        for letter in w:
            k = k * self.ifs.n_maps + (letter - 1)
        return k

    def cell_vertices(self, w: Sequence[int]) -> np.ndarray:
        return self.cells[self.cell_of(w)]

    @property
    def cell_index(self) -> dict[Word, list[int]]:
        return {self.word_of(k): row.tolist() for k, row in enumerate(self.cells)}

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @cached_property
    def lex_rank(self) -> np.ndarray:
        """Position of each vertex when sorted by coordinates (x, then y, then z), then id."""
        keys = [np.arange(self.n_vertices)] + [self.coords[:, k] for k in reversed(range(self.dimension))]
        order = np.lexsort(keys)
        rank = np.empty(self.n_vertices, dtype=np.int64)
        rank[order] = np.arange(self.n_vertices)
        rank.setflags(write=False)
        return rank

    @cached_property
    def arc_sources(self) -> np.ndarray:
        """Tail vertex of every CSR slot, aligned with ``indices``."""
        return np.repeat(np.arange(self.n_vertices), self.degrees)

    @cached_property
    def pairs(self) -> np.ndarray:
        """Adjacent vertex pairs ``(x, y)`` with ``x < y``, each listed once."""
        rows = self.arc_sources
        keep = rows < self.indices
        return np.stack([rows[keep], self.indices[keep]], axis=1)

    @cached_property
    def _address_table(self) -> tuple[np.ndarray, np.ndarray]:
        # flattened (cell, boundary position) slots grouped by vertex id
        flat = self.cells.ravel()
        order = np.argsort(flat, kind="stable")
        ptr = np.concatenate([[0], np.cumsum(np.bincount(flat, minlength=self.n_vertices))])
        return ptr, order

    def addresses(self, x) -> list[Address]:
        x = self.check_vertex(x)
        ptr, order = self._address_table
        n0 = self.ifs.n_boundary
        letters = self.ifs.boundary_letters
        return [Address(self.word_of(int(s) // n0), letters[int(s) % n0])
                for s in order[ptr[x]:ptr[x + 1]]]

    @cached_property
    def address_counts(self) -> np.ndarray:
        return np.diff(self._address_table[0])

    def neighbor_array(self, x) -> np.ndarray:
        x = self.check_vertex(x)
        return self.indices[self.indptr[x]:self.indptr[x + 1]]

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary_ids] = True
        return mask

    @cached_property
    def interior_ids(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_mask)


def _cell_points(ifs: IfsSystem, m: int) -> np.ndarray:
    """Images of ``V_0`` under ``f_W`` for all words of length m, shape ``(N**m * N_0, d)``.

    ``f_W(p)`` is the sum of the per-level offsets ``A_{w_1..w_k} t_{w_{k+1}}``
    and ``A_W p``; summing those terms with correct rounding makes every
    coordinate the correctly rounded value of the exact sum when the offsets are
    exact (dyadic ratios), so e.g. the gasket vertex at ``(5/8, sqrt(3)/8)`` equals the
    float ``sqrt(3)/8`` bit for bit.
    """
    d, n0 = ifs.dimension, ifs.n_boundary
    As = np.array([f.linear_part for f in ifs.maps])
    bs = np.array([f.translation for f in ifs.maps])
    A = np.eye(d)[None]
    terms = np.zeros((1, 0, d))
    for _ in range(m):
        w, n = A.shape[0], len(ifs.maps)
        offsets = np.einsum("wij,kj->wki", A, bs).reshape(w * n, 1, d)
        terms = np.concatenate([np.repeat(terms, n, axis=0), offsets], axis=1)
        A = np.einsum("wij,kjl->wkil", A, As).reshape(-1, d, d)
    tail = np.einsum("wij,kj->wki", A, ifs.boundary_points)[:, :, None, :]
    full = np.concatenate([np.broadcast_to(terms[:, None], (A.shape[0], n0, m, d)), tail], axis=2)
    return _compensated_sum(full.reshape(-1, m + 1, d))


def _two_sum(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _compensated_sum(terms: np.ndarray) -> np.ndarray:
    """Correctly rounded sum along axis 1.

    The running sum and its error are both carried with TwoSum.  If no bits
    were lost in the error term, ``s + c`` equals the exact sum and one IEEE
    addition rounds it correctly; the remaining rows go through ``math.fsum``.
    """
    s = terms[:, 0].copy()
    c = np.zeros_like(s)
    lost = np.zeros(s.shape, dtype=bool)
    for k in range(1, terms.shape[1]):
        s, e = _two_sum(s, terms[:, k])
        c, e2 = _two_sum(c, e)
        lost |= e2 != 0
    out = s + c
    for idx in zip(*np.nonzero(lost)):
        i, rest = idx[0], idx[1:]
        out[idx] = math.fsum(terms[(i, slice(None), *rest)].tolist())
    return out


def _dedup(points: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Merge points closer than ``tol`` (max-norm); ids follow first occurrence.

    Returns the vertex id of every point and the index of each vertex's first point.
    """
    n = len(points)
    pairs = cKDTree(points).query_pairs(tol, p=np.inf, output_type="ndarray")
    adj = scipy.sparse.coo_array((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    ncomp, comp = connected_components(adj, directed=False)
    first = np.full(ncomp, n, dtype=np.int64)
    np.minimum.at(first, comp, np.arange(n))
    order = np.argsort(first)
    relabel = np.empty(ncomp, dtype=np.int64)
    relabel[order] = np.arange(ncomp)
    return relabel[comp], first[order]


def boundary_edge_pattern(ifs: IfsSystem) -> list[tuple[int, int]]:
    """Oriented edges of ``F_0`` as pairs of boundary positions.

    A closed boundary graph links every pair of boundary points in both
    directions; an open one is the chain ``P_1 -> P_2 -> ... -> P_{N_0}``.
    """
    n0 = ifs.n_boundary
    if ifs.closed:
        return [(i, j) for i in range(n0) for j in range(n0) if i != j]
    return [(i, i + 1) for i in range(n0 - 1)]


def build_graph(ifs: IfsSystem, m: int, budget: int = DEFAULT_BUDGET) -> FractalGraph:
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 0:
        raise GraphError(f"level must be a non-negative integer, got {m!r}")
    n, n0, d = ifs.n_maps, ifs.n_boundary, ifs.dimension
    if n**m * n0 > budget:
        raise BudgetExceededError(f"level {m} needs {n**m * n0} cell points, budget is {budget}")
    pts = _cell_points(ifs, m)
    labels, reps = _dedup(pts, DEDUP_RTOL * ifs.diameter)
    coords = pts[reps] + 0.0  # drop negative zeros
    coords.setflags(write=False)
    cells = labels.reshape(-1, n0)

    pattern = np.array(boundary_edge_pattern(ifs), dtype=np.int64).reshape(-1, 2)
    edges = cells[:, pattern].reshape(-1, 2)
    edge_cells = np.repeat(np.arange(cells.shape[0]), len(pattern))

    nv = len(reps)
    both = np.concatenate([edges, edges[:, ::-1]])
    flat = np.unique(both[:, 0] * nv + both[:, 1])
    rows, cols = np.divmod(flat, nv)
    indptr = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=nv))]).astype(np.int64)
    indices = cols.astype(np.int64)

    boundary_ids = cells[0] if m == 0 else np.array(
        [labels[_corner_cell(n, m, b) * n0 + k] for k, b in enumerate(ifs.boundary)], dtype=np.int64)
    for arr in (cells, edges, edge_cells, boundary_ids, indptr, indices):
        arr.setflags(write=False)
    return FractalGraph(ifs, int(m), coords, cells, edges, edge_cells, boundary_ids, indptr, indices)


def _corner_cell(n: int, m: int, map_index: int) -> int:
    # cell index of the word (b+1, b+1, ..., b+1)
    return sum(map_index * n**k for k in range(m))


def predicted_counts(ifs: IfsSystem, m: int) -> tuple[int, int]:
    """Vertex and oriented-edge counts from the counting recursion.

    The intersection count C and the base edge count are measured on the
    level-1 and level-0 builds rather than assumed.
    """
    n, n0 = ifs.n_maps, ifs.n_boundary
    c = n * n0 - build_graph(ifs, 1).n_vertices
    a0 = len(boundary_edge_pattern(ifs))
    vertices = n**m * n0 - (n**m - 1) // (n - 1) * c
    return vertices, n**m * a0


def neighbors(g: FractalGraph, x) -> set[int]:
    return set(g.neighbor_array(x).tolist())


def junction_points(g: FractalGraph) -> set[int]:
    return set(np.flatnonzero(g.address_counts >= 2).tolist())


def neighborhood_system(g: FractalGraph, x) -> set[Word]:
    return {a.word for a in g.addresses(x)}


def snap_to_vertex(g: FractalGraph, p) -> int:
    p = np.asarray(p, dtype=float)
    if p.shape != (g.dimension,):
        raise GraphError(f"point must have length {g.dimension}, got shape {p.shape}")
    dist = np.linalg.norm(g.coords - p, axis=1)
    return int(np.argmin(dist))
