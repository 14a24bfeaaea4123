"""CSV, JSON and SVG writers.  All writes go to a temporary file that is renamed into place."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .graph import FractalGraph
from .optimizer import AscentPath, Extrema, ValueFunction


def fmt17(v: float) -> str:
    return format(float(v) + 0.0, ".17g")


def atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _axes(d: int) -> list[str]:
    return ["x", "y", "z"][:d]


def path_csv(g: FractalGraph, path: AscentPath) -> str:
    rows = ([str(k), *(fmt17(c) for c in g.coords[x]), fmt17(val)]
            for k, (x, val) in enumerate(zip(path.vertices, path.values)))
    return _csv_text(["step", *_axes(g.dimension), "value"], rows)


def export_csv(g: FractalGraph, path: AscentPath, file) -> None:
    atomic_write(file, path_csv(g, path))


def field_csv(u) -> str:
    return _csv_text(["vertex_id", "value"], ([str(i), fmt17(x)] for i, x in enumerate(u)))


def export_field_csv(u, file) -> None:
    atomic_write(file, field_csv(u))


def read_field_csv(file, n_vertices: int | None = None) -> np.ndarray:
    with open(file, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["vertex_id", "value"]:
            raise ValueError(f"{file}: expected header 'vertex_id,value'")
        pairs = [(int(a), float(b)) for a, b in reader]
    n = n_vertices if n_vertices is not None else len(pairs)
    u = np.full(n, np.nan)
    for i, val in pairs:
        if not 0 <= i < n:
            raise ValueError(f"{file}: vertex id {i} out of range")
        u[i] = val
    if np.isnan(u).any():
        raise ValueError(f"{file}: missing values for {int(np.isnan(u).sum())} vertices")
    return u


def value_function_csv(vf: ValueFunction) -> str:
    return _csv_text(["vertex_id", "v"], ([str(i), fmt17(x)] for i, x in enumerate(vf.v)))


def extrema_csv(g: FractalGraph, ext: Extrema) -> str:
    rows = []
    for kind, ids, val in (("min", ext.argmin, ext.min_value), ("max", ext.argmax, ext.max_value)):
        for x in ids:
            rows.append([kind, str(x), *(fmt17(c) for c in g.coords[x]), fmt17(val)])
    return _csv_text(["kind", "vertex_id", *_axes(g.dimension), "value"], rows)


def graph_dict(g: FractalGraph) -> dict:
    vertices = []
    for i in range(g.n_vertices):
        vertices.append({
            "id": i,
            "xy": [float(c) for c in g.coords[i]],
            "addresses": [{"word": list(a.word), "point": a.point} for a in g.addresses(i)],
        })
    return {"level": g.level, "vertices": vertices, "edges": g.edges.tolist()}


def export_graph_json(g: FractalGraph, file) -> None:
    atomic_write(file, json.dumps(graph_dict(g), indent=1) + "\n")


def export_json(data: dict, file) -> None:
    atomic_write(file, json.dumps(data, indent=2) + "\n")


# fixed isometric view for 3-D sets
_ISO = np.array([[1.0, -1.0, 0.0], [-1.0, -1.0, 2.0]]) / np.array([[math.sqrt(2)], [math.sqrt(6)]])

SVG_SIZE = 600
SVG_MARGIN = 20


def project(coords: np.ndarray) -> np.ndarray:
    """2-D drawing coordinates; 3-D points are projected orthographically."""
    d = coords.shape[1]
    if d == 1:
        return np.column_stack([coords[:, 0], np.zeros(len(coords))])
    if d == 2:
        return coords.copy()
    return coords @ _ISO.T


def ramp_color(t: float) -> str:
    """Linear red (t = 1, high) to blue (t = 0, low) ramp."""
    t = min(max(t, 0.0), 1.0)
    return f"#{round(255 * t):02x}00{round(255 * (1 - t)):02x}"


def svg_text(g: FractalGraph, u, path: AscentPath | None = None) -> str:
    u = np.asarray(u, dtype=float)
    xy = project(g.coords)
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    scale = (SVG_SIZE - 2 * SVG_MARGIN) / span

    def screen(p):
        return (SVG_MARGIN + (p[0] - lo[0]) * scale, SVG_SIZE - SVG_MARGIN - (p[1] - lo[1]) * scale)

    pts = [screen(p) for p in xy]
    umin, umax = float(u.min()), float(u.max())
    ts = np.full(len(u), 0.5) if umax == umin else (u - umin) / (umax - umin)
    radius = max(0.8, min(4.0, 0.25 * scale * span / max(1.0, math.sqrt(g.n_vertices))))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
           f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
           '<rect width="100%" height="100%" fill="white"/>',
           '<g stroke="#d3d3d3" stroke-width="0.5">']
    for x, y in g.pairs.tolist():
        (x1, y1), (x2, y2) = pts[x], pts[y]
        out.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}"/>')
    out.append("</g>")
    out.append("<g>")
    for i, (px, py) in enumerate(pts):
        out.append(f'<circle class="v" cx="{px:.3f}" cy="{py:.3f}" r="{radius:.3f}" fill="{ramp_color(ts[i])}"/>')
    out.append("</g>")
    if path is not None and len(path) > 0:
        line = " ".join(f"{pts[x][0]:.3f},{pts[x][1]:.3f}" for x in path.vertices)
        out.append(f'<polyline fill="none" stroke="red" stroke-width="1.5" points="{line}"/>')
        out.append('<g fill="red" stroke="black" stroke-width="0.5">')
        for x in path.vertices:
            px, py = pts[x]
            out.append(f'<circle class="p" cx="{px:.3f}" cy="{py:.3f}" r="{1.6 * radius:.3f}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_svg(g: FractalGraph, u, path: AscentPath | None, file) -> None:
    atomic_write(file, svg_text(g, u, path))
