"""Discrete gradient ascent and max-plus value iteration on ``F_m``.

Each arc ``X -> Y`` between adjacent vertices carries the gain
``D_XY = u(Y) - u(X)``.  Gradient ascent repeatedly moves along the arc of
largest strictly positive gain; value iteration computes, for every vertex,
the best total gain over strictly ascending paths.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .calculus import as_field
from .graph import DEFAULT_BUDGET, BudgetExceededError, FractalGraph
from .ifs import IfsSystem


def tolerance_to_level(ifs: IfsSystem, eps: float, budget: int = DEFAULT_BUDGET) -> int:
    """Smallest m whose edges are no longer than ``eps``.

    Edges of ``F_m`` have length at most ``R_max**m * diam(V_0)``.
    """
    if not eps > 0:
        raise ValueError(f"tolerance must be positive, got {eps}")
    rmax = float(np.max(ifs.ratios))
    diam = ifs.diameter
    m = 0
    while rmax**m * diam > eps * (1 + 1e-12):
        m += 1
        if ifs.n_maps**m * ifs.n_boundary > budget:
            raise BudgetExceededError(f"tolerance {eps} needs level {m}, beyond the budget")
    return m


@dataclass(frozen=True)
class AscentPath:
    vertices: np.ndarray
    values: np.ndarray
    terminated: bool = True

    @property
    def steps(self) -> int:
        return len(self.vertices) - 1

    @property
    def terminal(self) -> int:
        return int(self.vertices[-1])

    @property
    def terminal_value(self) -> float:
        return float(self.values[-1])

    def __len__(self) -> int:
        return len(self.vertices)


def gradient_ascent(g: FractalGraph, u, x0) -> AscentPath:
    """Follow the steepest strictly ascending arc until none is left.

    Equal gains are resolved in favour of the neighbour that comes first in
    coordinate order (then vertex id), so the path is deterministic.
    """
    x0 = g.check_vertex(x0)
    u = as_field(g, u)
    path = _kernels.ascend(g.indptr, g.indices, u, g.lex_rank, x0)
    return AscentPath(path, u[path])


def gradient_descent(g: FractalGraph, u, x0) -> AscentPath:
    x0 = g.check_vertex(x0)
    u = as_field(g, u)
    path = _kernels.ascend(g.indptr, g.indices, -u, g.lex_rank, x0)
    return AscentPath(path, u[path])


def greedy_terminals(g: FractalGraph, u) -> np.ndarray:
    """Terminal vertex of gradient ascent from every start vertex."""
    nxt = _kernels.greedy_successors(g.indptr, g.indices, as_field(g, u), g.lex_rank)
    term = np.where(nxt < 0, np.arange(g.n_vertices), -1)
    # successors strictly increase u, so resolving in decreasing-u order finishes in one pass
    for x in np.argsort(-np.asarray(u), kind="stable"):
        if term[x] < 0:
            term[x] = term[nxt[x]]
    return term


@dataclass(frozen=True, eq=False)
class EdgeWeights:
    """Gains ``D_XY = u(Y) - u(X)`` on every arc, aligned with the graph's CSR slots."""

    graph: FractalGraph
    values: np.ndarray

    def __getitem__(self, arc: tuple[int, int]) -> float:
        x, y = arc
        nbrs = self.graph.neighbor_array(x)
        k = np.searchsorted(nbrs, y)
        if k == len(nbrs) or nbrs[k] != y:
            return -np.inf
        return float(self.values[self.graph.indptr[x] + k])


def edge_weights(g: FractalGraph, u) -> EdgeWeights:
    u = as_field(g, u)
    d = u[g.indices] - u[g.arc_sources]
    d.setflags(write=False)
    return EdgeWeights(g, d)


@dataclass(frozen=True)
class ValueFunction:
    v: np.ndarray
    iterations: int


def bellman_step(g: FractalGraph, D: EdgeWeights, v) -> np.ndarray:
    """``B(v)_X = max(0, max over ascending arcs X -> Y of D_XY + v_Y)``.

    Arcs with ``D_XY <= 0`` count as absent, so the recursion runs over the
    acyclic ascending subgraph.
    """
    v = np.asarray(v, dtype=float)
    out = np.empty(g.n_vertices)
    _kernels.bellman_sweep(g.indptr, g.indices, D.values, v, out)
    return out


def value_iteration(g: FractalGraph, D: EdgeWeights) -> ValueFunction:
    """Iterate ``B`` from zero to its fixed point.

    ``iterations`` counts applications of ``B`` up to and including the one
    that reproduced its input; it is at most ``#V_m`` because ascending paths
    have fewer than ``#V_m`` arcs.
    """
    v = np.zeros(g.n_vertices)
    out = np.empty(g.n_vertices)
    for it in range(1, g.n_vertices + 2):
        changed = _kernels.bellman_sweep(g.indptr, g.indices, D.values, v, out)
        v, out = out, v
        if changed == 0:
            return ValueFunction(v, it)
    raise RuntimeError("value iteration failed to converge on an acyclic graph")


class Extrema(NamedTuple):
    argmin: np.ndarray
    argmax: np.ndarray
    min_value: float
    max_value: float


def exhaustive_extrema(g: FractalGraph, u) -> Extrema:
    u = as_field(g, u)
    lo, hi = float(u.min()), float(u.max())
    return Extrema(np.flatnonzero(u == lo), np.flatnonzero(u == hi), lo, hi)
