"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
written straight to the terminal even when output is captured.
"""
import math
import time
import warnings

import numpy as np
import pytest

from fractalopt.calculus import (
    Verdict, compute_harmonic_structure, graph_energy, harmonic_extension, laplacian_extremum_test,
    markov_clamp, pointwise_laplacian, renormalized_energy, solve_dirichlet, spline_integrals,
)
from fractalopt.expr import field_from_expr, parse_expression, parse_point
from fractalopt.graph import build_graph, predicted_counts, snap_to_vertex
from fractalopt.ifs import load_preset
from fractalopt.optimizer import (
    edge_weights, exhaustive_extrema, gradient_ascent, greedy_terminals, value_iteration,
)

SQRT3 = math.sqrt(3.0)

RUNS = {
    "gasket run 1": ("gasket", 6, "x^2+y^2", "5/8, sqrt(3)/8"),
    "gasket run 2": ("gasket", 6, "-(x-1/2)^2-(y-sqrt(3)/4)^2", "3/4, sqrt(3)/4"),
    "tetrahedron run": ("tetrahedron", 6, "x^2+y^2+z^2", "41/64, 1/64+sqrt(3)/8, 1/64"),
    "minkowski run": ("minkowski", 3, "x^2+y^2", "0, 0"),
}


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return emit


def worked_run(key):
    """Build, evaluate, snap and ascend exactly as the CLI does; returns timing too."""
    name, m, fn, start = RUNS[key]
    t0 = time.perf_counter()
    g = build_graph(load_preset(name), m)
    u = field_from_expr(parse_expression(fn), g)
    p = parse_point(start, g.dimension)
    x0 = snap_to_vertex(g, p)
    path = gradient_ascent(g, u, x0)
    elapsed = time.perf_counter() - t0
    snap = float(np.linalg.norm(g.coords[x0] - p))
    return g, u, path, snap, elapsed


def test_criterion_01_gasket_run1(report):
    g, u, path, snap, t = worked_run("gasket run 1")
    end = g.coords[path.terminal]
    ok = (snap == 0.0 and np.array_equal(end, [1.0, 0.0])
          and abs(path.terminal_value - 1.0) <= 1e-12 and t < 2.0)
    report(1, ok, f"terminal {end.tolist()} value {path.terminal_value!r} snap {snap} time {t:.3f}s")
    assert ok


def test_criterion_02_gasket_run2(report):
    g, u, path, snap, t = worked_run("gasket run 2")
    end = g.coords[path.terminal]
    ok = (np.array_equal(end, [0.5, SQRT3 / 4]) and abs(path.terminal_value) <= 1e-12)
    report(2, ok, f"terminal {end.tolist()} value {path.terminal_value!r}")
    assert ok


def test_criterion_03_tetrahedron_run(report):
    g, u, path, snap, t = worked_run("tetrahedron run")
    end = g.coords[path.terminal]
    ok = np.array_equal(end, [1.0, 0.0, 0.0]) and abs(path.terminal_value - 1.0) <= 1e-12 and t < 10.0
    report(3, ok, f"terminal {end.tolist()} value {path.terminal_value!r} snap {snap:.6g} time {t:.3f}s")
    assert ok


def test_criterion_04_minkowski_run(report):
    g, u, path, snap, t = worked_run("minkowski run")
    end = g.coords[path.terminal]
    ok = np.array_equal(end, [1 / 32, 1 / 64]) and abs(path.terminal_value - 5 / 4096) <= 1e-15
    report(4, ok, f"terminal {end.tolist()} value {path.terminal_value!r}")
    assert ok


def test_criterion_05_counting(report):
    bad = []
    gasket = load_preset("gasket")
    for m in range(7):
        g = build_graph(gasket, m)
        if (g.n_vertices, g.n_edges) != ((3 ** (m + 1) + 3) // 2, 2 * 3 ** (m + 1)):
            bad.append(("gasket", m))
    for name in ("tetrahedron", "minkowski"):
        ifs = load_preset(name)
        n = ifs.n_maps
        c = n * ifs.n_boundary - build_graph(ifs, 1).n_vertices
        expected = ifs.n_boundary
        for m in range(5):
            if m:
                expected = n * expected - c
            g = build_graph(ifs, m)
            if g.n_vertices != expected or predicted_counts(ifs, m) != (g.n_vertices, g.n_edges):
                bad.append((name, m))
    report(5, not bad, "all builds match" if not bad else f"mismatches {bad}")
    assert not bad


def test_criterion_06_harmonic_structure(report):
    ifs = load_preset("gasket")
    hs = compute_harmonic_structure(ifs)
    g0, g1 = build_graph(ifs, 0), build_graph(ifs, 1)
    b = g1.boundary_ids
    expected = np.empty((len(g1.interior_ids), 3))
    for row, x in enumerate(g1.interior_ids):
        near = [k for k in range(3) if np.linalg.norm(g1.coords[x] - g1.coords[b[k]]) < 0.51]
        expected[row] = [2 / 5 if k in near else 1 / 5 for k in range(3)]
    err_direct = np.max(np.abs(hs.extension_matrix - expected))
    # second route: sparse Dirichlet solve with each unit boundary vector, r from the energy ratio
    cols, ratios = [], []
    for k in range(3):
        e = np.eye(3)[k]
        h = solve_dirichlet(hs, g1, e)
        cols.append(h[g1.interior_ids])
        ratios.append(graph_energy(g1, h) / graph_energy(g0, e[np.argsort(g0.boundary_ids)]))
    err_solve = np.max(np.abs(np.column_stack(cols) - expected))
    r_err = max(abs(hs.r - 0.6), *(abs(r - 0.6) for r in ratios))
    ok = err_direct <= 1e-10 and err_solve <= 1e-10 and r_err <= 1e-10
    report(6, ok, f"matrix err {err_direct:.1e} / {err_solve:.1e}, r = {hs.r!r}, r err {r_err:.1e}")
    assert ok


def test_criterion_07_energy_invariance(report):
    rng = np.random.default_rng(0)
    worst = 0.0
    for name in ("gasket", "minkowski"):
        ifs = load_preset(name)
        hs = compute_harmonic_structure(ifs)
        g0 = build_graph(ifs, 0)
        order = np.argsort(g0.boundary_ids)
        for m in range(1, 6):
            g = build_graph(ifs, m)
            for _ in range(50):
                u0 = rng.uniform(-1, 1, ifs.n_boundary)
                e0 = graph_energy(g0, u0[order])
                worst = max(worst, abs(renormalized_energy(hs, g, harmonic_extension(hs, u0, m, g)) - e0))
    ok = worst <= 1e-9
    report(7, ok, f"max |r^-m E_m - E_0| = {worst:.2e}")
    assert ok


def test_criterion_08_dirichlet_axioms(report):
    rng = np.random.default_rng(1)
    failures = 0
    checked = 0
    for name in ("gasket", "tetrahedron", "minkowski"):
        ifs = load_preset(name)
        for m in range(5):
            g = build_graph(ifs, m)
            for _ in range(100):
                u, v = rng.uniform(-2, 2, (2, g.n_vertices))
                a, c = rng.uniform(-3, 3, 2)
                scale = 1.0 + graph_energy(g, u) + graph_energy(g, v)
                tol = 1e-10 * scale * 10
                conds = (
                    graph_energy(g, u) >= 0,
                    abs(graph_energy(g, u, v) - graph_energy(g, v, u)) <= tol,
                    abs(graph_energy(g, a * u + v, v) - (a * graph_energy(g, u, v) + graph_energy(g, v))) <= tol,
                    abs(graph_energy(g, u + c) - graph_energy(g, u)) <= tol,
                    graph_energy(g, np.full(g.n_vertices, c)) == 0.0,
                    graph_energy(g, markov_clamp(u)) <= graph_energy(g, u) + 1e-12,
                )
                failures += not all(conds)
                checked += 1
    report(8, failures == 0, f"{failures} failures in {checked} random fields")
    assert failures == 0


def test_criterion_09_pointwise_laplacian(report):
    rng = np.random.default_rng(0)
    worst = 0.0
    for name in ("gasket", "tetrahedron", "minkowski"):
        ifs = load_preset(name)
        hs = compute_harmonic_structure(ifs)
        for m in range(1, 5):
            g = build_graph(ifs, m)
            for _ in range(50):
                u = harmonic_extension(hs, rng.uniform(-1, 1, ifs.n_boundary), m, g)
                est = pointwise_laplacian(hs, g, u)[g.interior_ids]
                worst = max(worst, float(np.max(np.abs(est))) if len(est) else 0.0)
    hs = compute_harmonic_structure(load_preset("gasket"))
    norm_err = 0.0
    for m in range(1, 6):
        g = build_graph(hs.ifs, m)
        factor = hs.r**-m / spline_integrals(hs, g)[g.interior_ids]
        norm_err = max(norm_err, float(np.max(np.abs(factor / (1.5 * 5.0**m) - 1))))
    ok = worst < 1e-8 and norm_err <= 1e-5
    report(9, ok, f"max |estimate| on harmonic fields {worst:.2e}; gasket normalisation rel err {norm_err:.1e}")
    assert ok


def test_criterion_10_extremum_test(report):
    bad = []
    for key in RUNS:
        g, u, path, snap, t = worked_run(key)
        terminals = set(greedy_terminals(g, u).tolist()) | {path.terminal}
        maxima = set(exhaustive_extrema(g, u).argmax.tolist())
        for x in sorted(terminals | maxima):
            check = laplacian_extremum_test(g, u, x)
            if check.verdict is not Verdict.CONSISTENT_MAX:
                bad.append((key, x, check.verdict.value))
    report(10, not bad, "all terminals and argmax vertices consistent" if not bad else f"violations {bad[:5]}")
    assert not bad


def _best_ascending_gain(g, u, x0):
    best = 0.0
    stack = [(x0, ())]
    while stack:
        x, gains = stack.pop()
        total = 0.0
        for d in reversed(gains):
            total = d + total
        best = max(best, total)
        for y in g.neighbor_array(x).tolist():
            if u[y] - u[x] > 0:
                stack.append((y, gains + (u[y] - u[x],)))
    return best


def test_criterion_11_dp_consistency(report):
    rng = np.random.default_rng(2)
    mismatches, sweeps_ok, dominance_ok = 0, True, True
    for name in ("gasket", "minkowski"):
        ifs = load_preset(name)
        for m in range(4):
            g = build_graph(ifs, m)
            for u in ((g.coords**2).sum(axis=1), rng.uniform(-1, 1, g.n_vertices)):
                vf = value_iteration(g, edge_weights(g, u))
                brute = np.array([_best_ascending_gain(g, u, x) for x in range(g.n_vertices)])
                mismatches += int(np.sum(vf.v != brute))
                sweeps_ok &= vf.iterations <= g.n_vertices
        g = build_graph(ifs, 6)
        for u in ((g.coords**2).sum(axis=1), rng.uniform(-1, 1, g.n_vertices)):
            vf = value_iteration(g, edge_weights(g, u))
            t = greedy_terminals(g, u)
            dominance_ok &= bool(np.all(u[t] <= u + vf.v + 1e-12))
    ok = mismatches == 0 and sweeps_ok and dominance_ok
    report(11, ok, f"{mismatches} value mismatches; sweeps bounded {sweeps_ok}; greedy dominance {dominance_ok}")
    assert ok


def _preprocess_time(ifs, m, repeats=5):
    u_expr = parse_expression("x^2+y^2")
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        g = build_graph(ifs, m)
        u = field_from_expr(u_expr, g)
        _ = g.lex_rank
        edge_weights(g, u)
        best = min(best, time.perf_counter() - t0)
    return best


def test_criterion_12_scaling_trend(report):
    """Informational only: wall-clock ratios depend on the machine and are never asserted."""
    ifs = load_preset("gasket")
    times = [_preprocess_time(ifs, m) for m in range(4, 8)]
    factors = [b / a for a, b in zip(times, times[1:])]
    n = ifs.n_maps
    ok = all(0.5 * n <= f <= 4 * n for f in factors)
    report(12, ok, "(informational) per-level factors " + ", ".join(f"{f:.2f}" for f in factors)
           + f" vs [{0.5 * n}, {4 * n}]")
    if not ok:
        warnings.warn(f"scaling factors {factors} outside [{0.5 * n}, {4 * n}]")
