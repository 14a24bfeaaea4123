"""Optimization on graph approximations of self-similar sets.

Build the level-m graph of an IFS attractor, put a function on its vertices,
and look for extrema by discrete gradient ascent or max-plus value iteration;
energies, harmonic extension and Laplacians certify the results.
"""
from ._kernels import BACKEND
from .calculus import (
    HarmonicStructure,
    Verdict,
    compute_harmonic_structure,
    discrete_laplacian,
    graph_energy,
    harmonic_extension,
    laplacian_extremum_test,
    markov_clamp,
    pointwise_laplacian_estimate,
    renormalized_energy,
    solve_dirichlet,
    spline_integral,
)
from .expr import evaluate, field_from_expr, parse_expression
from .graph import (
    FractalGraph,
    build_graph,
    junction_points,
    neighborhood_system,
    neighbors,
    predicted_counts,
    snap_to_vertex,
)
from .ifs import (
    Address,
    IfsSystem,
    SimilarityMap,
    apply_word,
    cell_measure,
    load_preset,
    moran_dimension,
    parse_ifs_spec,
    word_predecessor,
    word_successor,
)
from .optimizer import (
    AscentPath,
    bellman_step,
    edge_weights,
    exhaustive_extrema,
    gradient_ascent,
    gradient_descent,
    tolerance_to_level,
    value_iteration,
)

__version__ = "0.1.0"
