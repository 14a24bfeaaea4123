"""Command-line entry point: build a graph, evaluate an objective, run one mode."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from . import calculus, export, optimizer
from .expr import field_from_expr, parse_expression, parse_point
from .graph import build_graph, snap_to_vertex
from .ifs import PRESETS, load_ifs, load_preset

MODES = ("max", "min", "scan", "dp", "harmonic", "laplacian")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    preset: str | None = None
    ifs_file: str | None = None
    level: int | None = None
    tolerance: float | None = None
    function: str | None = None
    start: str | None = None
    mode: str = "max"
    csv: str | None = None
    json: str | None = None
    svg: str | None = None

    def validate(self) -> None:
        if (self.preset is None) == (self.ifs_file is None):
            raise ConfigError("give exactly one of --preset or --ifs")
        if (self.level is None) == (self.tolerance is None):
            raise ConfigError("give exactly one of --level or --tolerance")
        if self.level is not None and self.level < 0:
            raise ConfigError("--level must be non-negative")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode != "harmonic" and self.function is None:
            raise ConfigError(f"mode {self.mode} needs --function")
        if self.mode in ("max", "min") and self.start is None:
            raise ConfigError(f"mode {self.mode} needs --start")
        if self.svg and self.function is None:
            raise ConfigError("--svg needs --function")


@dataclass
class RunReport:
    exit_code: int
    lines: list[str] = field(default_factory=list)
    result: object = None


def fmt(v: float) -> str:
    """Short human-readable number: 12 significant digits, no negative zero."""
    return format(float(np.round(v, 12)) + 0.0, ".12g")


def fmt_point(p) -> str:
    return "(" + ", ".join(fmt(c) for c in p) + ")"


def _provenance(exc: Exception) -> str:
    mod = type(exc).__module__
    return mod.rsplit(".", 1)[-1] if mod.startswith("fractalopt") else type(exc).__name__


def run(config: RunConfig) -> RunReport:
    try:
        config.validate()
        return _run(config)
    except (ValueError, OSError, RuntimeError) as exc:
        return RunReport(1, [f"error [{_provenance(exc)}]: {exc}"])


def _run(cfg: RunConfig) -> RunReport:
    ifs = load_preset(cfg.preset) if cfg.preset else load_ifs(cfg.ifs_file)
    m = cfg.level if cfg.level is not None else optimizer.tolerance_to_level(ifs, cfg.tolerance)
    g = build_graph(ifs, m)
    lines = [f"{ifs.name}: level {m}, {g.n_vertices} vertices, {g.n_edges} oriented edges"]

    u = field_from_expr(parse_expression(cfg.function), g) if cfg.function else None
    x0 = None
    if cfg.start is not None:
        p = parse_point(cfg.start, g.dimension)
        x0 = snap_to_vertex(g, p)
        dist = float(np.linalg.norm(g.coords[x0] - p))
        lines.append(f"start {fmt_point(p)} -> vertex {x0} at {fmt_point(g.coords[x0])} (snap distance {fmt(dist)})")

    result = None
    path = None
    if cfg.mode in ("max", "min"):
        step = optimizer.gradient_ascent if cfg.mode == "max" else optimizer.gradient_descent
        path = result = step(g, u, x0)
        t = path.terminal
        check = calculus.laplacian_extremum_test(g, u, t)
        lines.append(f"terminal {fmt_point(g.coords[t])} value {fmt(path.terminal_value)}")
        lines.append(f"steps {path.steps}; vertex {t}; Laplacian test {check.verdict.value} "
                     f"(Delta_m = {fmt(check.laplacian)})")
        if cfg.csv:
            export.export_csv(g, path, cfg.csv)
    elif cfg.mode == "scan":
        result = optimizer.exhaustive_extrema(g, u)
        for kind, ids, val in (("max", result.argmax, result.max_value), ("min", result.argmin, result.min_value)):
            pts = ", ".join(fmt_point(g.coords[i]) for i in ids[:10])
            more = f" (+{len(ids) - 10} more)" if len(ids) > 10 else ""
            lines.append(f"global {kind} value {fmt(val)} at {len(ids)} vertices: {pts}{more}")
        if cfg.csv:
            export.atomic_write(cfg.csv, export.extrema_csv(g, result))
    elif cfg.mode == "dp":
        result = optimizer.value_iteration(g, optimizer.edge_weights(g, u))
        lines.append(f"value iteration converged in {result.iterations} sweeps; max gain {fmt(result.v.max())}")
        if x0 is not None:
            lines.append(f"best ascending value from start {fmt(u[x0] + result.v[x0])} (gain {fmt(result.v[x0])})")
        if cfg.csv:
            export.atomic_write(cfg.csv, export.value_function_csv(result))
    elif cfg.mode == "harmonic":
        result = calculus.compute_harmonic_structure(ifs)
        lines.append(f"r = {fmt(result.r)}, r1 = {fmt(result.r1)}")
        for row in result.extension_matrix:
            lines.append("  [" + ", ".join(fmt(w) for w in row) + "]")
        if cfg.csv:
            if u is None:
                raise ConfigError("--csv in harmonic mode needs --function for the boundary values")
            ext = calculus.harmonic_extension(result, u[g.boundary_ids], m, g)
            export.export_field_csv(ext, cfg.csv)
    else:  # laplacian
        hs = calculus.compute_harmonic_structure(ifs)
        est = calculus.pointwise_laplacian(hs, g, u)
        inner = est[g.interior_ids]
        result = est
        if len(inner):
            lines.append(f"pointwise Laplacian on {len(inner)} interior vertices: "
                         f"min {fmt(inner.min())}, max {fmt(inner.max())}")
        if x0 is not None:
            check = calculus.laplacian_extremum_test(g, u, x0)
            lines.append(f"vertex {x0}: {check.verdict.value} (Delta_m = {fmt(check.laplacian)})")
        if cfg.csv:
            export.atomic_write(cfg.csv, _laplacian_csv(est, g))

    if cfg.json:
        if cfg.mode == "harmonic":
            export.export_json(result.report(), cfg.json)
        else:
            export.export_graph_json(g, cfg.json)
    if cfg.svg:
        export.export_svg(g, u, path, cfg.svg)
    return RunReport(0, lines, result)


def _laplacian_csv(est: np.ndarray, g) -> str:
    rows = "".join(f"{i},{export.fmt17(est[i])}\n" for i in g.interior_ids)
    return "vertex_id,value\n" + rows


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fractalopt",
        description="Discrete gradient optimisation and analysis on graph approximations of self-similar sets.",
        epilog="SVG colour ramp: red = high values, blue = low values.",
    )
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--ifs", dest="ifs_file", metavar="FILE", help="IFS description in JSON")
    lvl = p.add_mutually_exclusive_group(required=True)
    lvl.add_argument("--level", type=int, metavar="M")
    lvl.add_argument("--tolerance", type=float, metavar="EPS",
                     help="choose the smallest level whose edges are no longer than EPS")
    p.add_argument("--function", metavar="EXPR", help='objective in x, y, z, e.g. "x^2+y^2"')
    p.add_argument("--start", metavar="EXPR_LIST", help='start point, e.g. "5/8, sqrt(3)/8"')
    p.add_argument("--mode", choices=MODES, default="max")
    p.add_argument("--csv", metavar="FILE")
    p.add_argument("--json", metavar="FILE")
    p.add_argument("--svg", metavar="FILE",
                   help="plot vertices coloured red (high) to blue (low), with the path overlaid")
    p.add_argument("--seed-free", action="store_true",
                   help="no-op: nothing in this tool uses random numbers")
    return p


_EXPR_OPTIONS = ("--function", "--start")


def _attach_expression_values(argv: list[str]) -> list[str]:
    # "--function -(x-1)^2" would otherwise read the expression as an option
    out = []
    it = iter(argv)
    for a in it:
        if a in _EXPR_OPTIONS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_attach_expression_values(argv))
    cfg = RunConfig(
        preset=args.preset, ifs_file=args.ifs_file, level=args.level, tolerance=args.tolerance,
        function=args.function, start=args.start, mode=args.mode,
        csv=args.csv, json=args.json, svg=args.svg,
    )
    report = run(cfg)
    stream = sys.stdout if report.exit_code == 0 else sys.stderr
    for line in report.lines:
        print(line, file=stream)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
