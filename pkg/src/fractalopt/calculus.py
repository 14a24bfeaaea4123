"""Graph energies, harmonic extension and Laplacians on level-m graphs.

Fields are plain float arrays indexed by vertex id of a :class:`FractalGraph`.
All edges carry unit conductance; the renormalised energy at level m is
``r**-m`` times the graph energy, where ``r`` in (0, 1) is the factor by which
harmonic extension to the next level shrinks the graph energy.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import _kernels
from .graph import FractalGraph, build_graph
from .ifs import IfsSystem, measure_weights

RATIO_TOL = 1e-10
DENSE_LIMIT = 5000
SPLINE_TOL = 1e-8
SPLINE_MAX_DEPTH = 12


class CalculusError(ValueError):
    pass


class GraphMismatchError(CalculusError):
    pass


class UnsupportedStructureError(CalculusError):
    """The IFS has no harmonic structure compatible with unit conductances."""


class SingularSystemError(CalculusError):
    pass


class SplineConvergenceError(CalculusError):
    pass


class InteriorVertexRequired(CalculusError):
    pass


def as_field(g: FractalGraph, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (g.n_vertices,):
        raise GraphMismatchError(f"field has shape {u.shape}, graph has {g.n_vertices} vertices")
    if not np.all(np.isfinite(u)):
        raise CalculusError("field values must be finite")
    return u


def graph_energy(g: FractalGraph, u, v=None) -> float:
    u = as_field(g, u)
    v = u if v is None else as_field(g, v)
    p = g.pairs
    return float(np.dot(u[p[:, 0]] - u[p[:, 1]], v[p[:, 0]] - v[p[:, 1]]))


def markov_clamp(u) -> np.ndarray:
    return np.clip(np.asarray(u, dtype=float), 0.0, 1.0)


def laplacian_matrix(g: FractalGraph) -> scipy.sparse.csr_array:
    n = g.n_vertices
    adj = scipy.sparse.csr_array((np.ones(len(g.indices)), g.indices, g.indptr), shape=(n, n))
    return (scipy.sparse.diags_array(g.degrees.astype(float)) - adj).tocsr()


def graph_laplacian(g: FractalGraph, u) -> np.ndarray:
    """``sum_{y ~ x} (u(y) - u(x))`` at every vertex."""
    return _kernels.vertex_laplacian(g.indptr, g.indices, as_field(g, u))


def discrete_laplacian(g: FractalGraph, u, x) -> float:
    x = g.check_vertex(x)
    u = as_field(g, u)
    return float(np.sum(u[g.neighbor_array(x)] - u[x]))


@dataclass(frozen=True, eq=False)
class HarmonicStructure:
    """Harmonic extension from ``V_0`` to ``V_1`` and the energy factor ``r``.

    ``extension_matrix`` has one row per vertex of ``V_1 \\ V_0`` (level-1 ids
    in ``interior_ids``) and one column per boundary point.  ``level1_matrix``
    maps boundary values to all of ``V_1``.
    """

    ifs: IfsSystem
    extension_matrix: np.ndarray
    interior_ids: np.ndarray
    level1_matrix: np.ndarray
    child_slots: np.ndarray
    r: float

    @property
    def r1(self) -> float:
        return 1.0 / self.r

    def report(self) -> dict:
        return {
            "ifs": self.ifs.name,
            "r": self.r,
            "r1": self.r1,
            "interior_vertices": self.interior_ids.tolist(),
            "extension_matrix": self.extension_matrix.tolist(),
        }


def _boundary_laplacian(ifs: IfsSystem) -> np.ndarray:
    g0 = build_graph(ifs, 0)
    L = laplacian_matrix(g0).toarray()
    b = g0.boundary_ids
    return L[np.ix_(b, b)]


def compute_harmonic_structure(ifs: IfsSystem) -> HarmonicStructure:
    """Minimise the level-1 energy for each unit boundary vector.

    The energy form is assembled edge by edge; the interior block is solved
    densely.  The resulting trace form must be a constant multiple ``r`` of the
    level-0 energy, otherwise the IFS is rejected.
    """
    g1 = build_graph(ifs, 1)
    n = g1.n_vertices
    Q = np.zeros((n, n))
    for x, y in g1.pairs.tolist():
        Q[x, x] += 1.0
        Q[y, y] += 1.0
        Q[x, y] -= 1.0
        Q[y, x] -= 1.0
    b = np.asarray(g1.boundary_ids)
    inner = g1.interior_ids
    Qii = Q[np.ix_(inner, inner)]
    Qib = Q[np.ix_(inner, b)]
    try:
        H = -np.linalg.solve(Qii, Qib)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("level-1 interior energy is degenerate") from exc

    full = np.zeros((n, len(b)))
    full[b, np.arange(len(b))] = 1.0
    full[inner] = H
    E1 = full.T @ Q @ full  # trace of the level-1 energy on V_0
    E0 = _boundary_laplacian(ifs)
    ratios = np.diag(E1) / np.diag(E0)
    r = float(np.mean(ratios))
    if np.max(np.abs(ratios - r)) > RATIO_TOL or np.max(np.abs(E1 - r * E0)) > RATIO_TOL:
        raise UnsupportedStructureError(
            f"energy ratios {ratios.tolist()} are not constant; no compatible harmonic structure")
    if not 0.0 < r < 1.0:
        raise UnsupportedStructureError(f"renormalisation factor {r} is not in (0, 1)")
    for arr in (H, full):
        arr.setflags(write=False)
    return HarmonicStructure(ifs, H, inner, full, g1.cells, r)


def harmonic_extension(hs: HarmonicStructure, u0, m: int, graph: FractalGraph | None = None) -> np.ndarray:
    """Extend boundary values ``u0`` harmonically to ``V_m``, one cell level at a time."""
    g = graph if graph is not None else build_graph(hs.ifs, m)
    if g.level != m or g.cells.shape != (hs.ifs.n_maps**m, hs.ifs.n_boundary):
        raise GraphMismatchError("graph does not match the harmonic structure and level")
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (hs.ifs.n_boundary,):
        raise CalculusError(f"expected {hs.ifs.n_boundary} boundary values")
    cell_vals = u0[None, :]
    for _ in range(m):
        on_v1 = cell_vals @ hs.level1_matrix.T
        cell_vals = on_v1[:, hs.child_slots].reshape(-1, hs.ifs.n_boundary)
    out = np.empty(g.n_vertices)
    out[g.cells.ravel()] = cell_vals.ravel()
    return out


def renormalized_energy(hs: HarmonicStructure, g: FractalGraph, u) -> float:
    return graph_energy(g, u) / hs.r**g.level


def solve_dirichlet(hs: HarmonicStructure, g: FractalGraph, boundary) -> np.ndarray:
    """Minimise the renormalised energy with prescribed values on ``V_0``.

    Dense Cholesky up to ``DENSE_LIMIT`` interior vertices, conjugate gradients above.
    """
    boundary = np.asarray(boundary, dtype=float)
    if boundary.shape != (len(g.boundary_ids),):
        raise CalculusError(f"expected {len(g.boundary_ids)} boundary values")
    # the factor r**-m scales the whole form and leaves the minimiser unchanged
    L = laplacian_matrix(g) / hs.r**g.level
    b = np.asarray(g.boundary_ids)
    inner = g.interior_ids
    u = np.empty(g.n_vertices)
    u[b] = boundary
    if len(inner) == 0:
        return u
    Lii = L[inner][:, inner]
    rhs = -(L[inner][:, b] @ boundary)
    if len(inner) <= DENSE_LIMIT:
        try:
            factor = scipy.linalg.cho_factor(Lii.toarray())
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError("interior Laplacian is not positive definite") from exc
        u[inner] = scipy.linalg.cho_solve(factor, rhs)
    else:
        sol, info = scipy.sparse.linalg.cg(Lii, rhs, rtol=1e-14, atol=0.0, maxiter=20 * len(inner))
        if info != 0 or np.linalg.norm(Lii @ sol - rhs) >= 1e-12 * max(1.0, np.linalg.norm(rhs)):
            raise SingularSystemError(f"conjugate gradients did not converge (info={info})")
        u[inner] = sol
    return u


@lru_cache(maxsize=16)
def _spline_weights(hs: HarmonicStructure) -> np.ndarray:
    """Integral over F of the harmonic extension of each unit boundary vector.

    The depth-k estimate sums cell measure times the mean of the cell's vertex
    values over all depth-k cells.  By self-similarity it equals ``a_k . u0``
    with ``a_0 = 1/N_0`` and ``a_{k+1} = sum_j mu_j T_j^T a_k``, where ``T_j``
    maps boundary values to those of child cell j; depth is increased until two
    successive estimates agree to ``SPLINE_TOL``.
    """
    ifs = hs.ifs
    n0 = ifs.n_boundary
    mu = measure_weights(ifs)
    T = hs.level1_matrix[hs.child_slots]  # (N, N_0, N_0)
    a = np.full(n0, 1.0 / n0)
    for _ in range(SPLINE_MAX_DEPTH):
        nxt = np.einsum("j,jbc,b->c", mu, T, a)
        if np.max(np.abs(nxt - a)) < SPLINE_TOL:
            return nxt
        a = nxt
    raise SplineConvergenceError(f"spline quadrature not converged within depth {SPLINE_MAX_DEPTH}")


def cell_measures(ifs: IfsSystem, m: int) -> np.ndarray:
    """Measures of all level-m cells in lexicographic word order."""
    mu = measure_weights(ifs)
    out = np.ones(1)
    for _ in range(m):
        out = np.outer(out, mu).ravel()
    return out


def spline_integrals(hs: HarmonicStructure, g: FractalGraph) -> np.ndarray:
    """``integral of psi_x^m dmu`` for every vertex x of ``g``."""
    a = _spline_weights(hs)
    weights = cell_measures(hs.ifs, g.level)[:, None] * a[None, :]
    out = np.zeros(g.n_vertices)
    np.add.at(out, g.cells.ravel(), weights.ravel())
    return out


def spline_integral(hs: HarmonicStructure, g: FractalGraph, x) -> float:
    x = g.check_vertex(x)
    a = _spline_weights(hs)
    mu = measure_weights(hs.ifs)
    total = 0.0
    for addr in g.addresses(x):
        w = float(np.prod([mu[k - 1] for k in addr.word])) if addr.word else 1.0
        total += w * a[hs.ifs.boundary_letters.index(addr.point)]
    return total


def pointwise_laplacian_estimate(hs: HarmonicStructure, g: FractalGraph, u, x) -> float:
    """``r**-m * Delta_m u(x) / integral(psi_x^m)`` at an interior vertex."""
    x = g.check_vertex(x)
    if g.boundary_mask[x]:
        raise InteriorVertexRequired(f"vertex {x} lies in V_0")
    return discrete_laplacian(g, u, x) / hs.r**g.level / spline_integral(hs, g, x)


def pointwise_laplacian(hs: HarmonicStructure, g: FractalGraph, u) -> np.ndarray:
    """Vectorised estimate at every vertex; entries on ``V_0`` are NaN."""
    est = graph_laplacian(g, u) / hs.r**g.level / spline_integrals(hs, g)
    est[g.boundary_ids] = np.nan
    return est


class Verdict(enum.Enum):
    CONSISTENT_MAX = "consistent_max"
    CONSISTENT_MIN = "consistent_min"
    INCONSISTENT = "inconsistent"
    INTERIORLESS = "interiorless"


@dataclass(frozen=True)
class ExtremumCheck:
    verdict: Verdict
    laplacian: float
    is_local_max: bool
    is_local_min: bool


def laplacian_extremum_test(g: FractalGraph, u, x) -> ExtremumCheck:
    """Check the Laplacian sign condition at a discrete local extremum.

    A vertex without neighbours is ``INTERIORLESS``; a vertex that is neither
    a local max nor a local min (or violates the sign condition) is
    ``INCONSISTENT``.  When x is both (locally constant) it is reported as a max.
    """
    x = g.check_vertex(x)
    u = as_field(g, u)
    nbrs = g.neighbor_array(x)
    lap = discrete_laplacian(g, u, x)
    if len(nbrs) == 0:
        return ExtremumCheck(Verdict.INTERIORLESS, lap, False, False)
    is_max = bool(np.all(u[nbrs] <= u[x]))
    is_min = bool(np.all(u[nbrs] >= u[x]))
    if is_max and lap <= 0:
        verdict = Verdict.CONSISTENT_MAX
    elif is_min and lap >= 0:
        verdict = Verdict.CONSISTENT_MIN
    else:
        verdict = Verdict.INCONSISTENT
    return ExtremumCheck(verdict, lap, is_max, is_min)
