"""Iterated function systems of contractive similarities.

Words are tuples of 1-based letters, most significant letter first, so that
``apply_word(ifs, (a, b), p) == f_a(f_b(p))``.  Boundary points are named by
the letter of the map they are the fixed point of.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

SIMILARITY_TOL = 1e-10

Word = tuple[int, ...]


class IFSError(ValueError):
    """Malformed or unsupported IFS description."""


class InvalidWordError(IFSError):
    pass


class OrderBoundaryError(IFSError):
    """Raised when stepping past the first or last word of a given length."""


class Address(NamedTuple):
    """A vertex named as ``f_word(P_point)``; ``point`` is a 1-based map letter."""

    word: Word
    point: int

    def __str__(self) -> str:
        return "".join(f"{k}." for k in self.word) + f"P{self.point}"


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SimilarityMap:
    linear_part: np.ndarray
    translation: np.ndarray
    ratio: float = field(init=False)
    fixed_point: np.ndarray = field(init=False)

    def __post_init__(self):
        A = _frozen(self.linear_part)
        t = _frozen(self.translation)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise IFSError(f"linear part must be square, got shape {A.shape}")
        d = A.shape[0]
        if t.shape != (d,):
            raise IFSError(f"translation must have length {d}, got shape {t.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(t))):
            raise IFSError("map coefficients must be finite")
        gram = A.T @ A
        ratio = float(np.sqrt(np.trace(gram) / d))
        if not 0.0 < ratio < 1.0:
            raise IFSError(f"contraction ratio {ratio} is not in (0, 1)")
        if np.max(np.abs(gram - ratio**2 * np.eye(d))) > SIMILARITY_TOL:
            raise IFSError("linear part is not a scaled orthogonal matrix")
        fixed = np.linalg.solve(np.eye(d) - A, t)
        if np.max(np.abs(A @ fixed + t - fixed)) > SIMILARITY_TOL:
            raise IFSError("could not locate the fixed point of a map")
        object.__setattr__(self, "linear_part", A)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "ratio", ratio)
        object.__setattr__(self, "fixed_point", _frozen(fixed))

    @property
    def dimension(self) -> int:
        return self.translation.shape[0]

    def __call__(self, p) -> np.ndarray:
        return self.linear_part @ np.asarray(p, dtype=float) + self.translation


@dataclass(frozen=True, eq=False)
class IfsSystem:
    """A finite family of similarities together with the boundary seed ``V_0``.

    ``boundary`` holds 0-based map indices (the JSON convention); the public
    word/address API uses the matching 1-based letters.
    """

    maps: tuple[SimilarityMap, ...]
    boundary: tuple[int, ...]
    closed: bool = True
    name: str = "custom"

    def __post_init__(self):
        maps = tuple(self.maps)
        if len(maps) < 2:
            raise IFSError("an IFS needs at least two maps")
        dims = {f.dimension for f in maps}
        if len(dims) != 1:
            raise IFSError(f"maps disagree on dimension: {sorted(dims)}")
        (d,) = dims
        if d not in (1, 2, 3):
            raise IFSError(f"dimension must be 1, 2 or 3, got {d}")
        boundary = tuple(int(b) for b in self.boundary)
        if len(boundary) < 2:
            raise IFSError("the boundary needs at least two points")
        if len(set(boundary)) != len(boundary):
            raise IFSError("boundary indices must be distinct")
        if any(not 0 <= b < len(maps) for b in boundary):
            raise IFSError(f"boundary indices must lie in [0, {len(maps)})")
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "boundary", boundary)

    @property
    def n_maps(self) -> int:
        return len(self.maps)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary)

    @property
    def dimension(self) -> int:
        return self.maps[0].dimension

    @property
    def ratios(self) -> np.ndarray:
        return np.array([f.ratio for f in self.maps])

    @property
    def boundary_letters(self) -> tuple[int, ...]:
        return tuple(b + 1 for b in self.boundary)

    @property
    def boundary_points(self) -> np.ndarray:
        """``V_0`` as an ``(N_0, d)`` array, in boundary order."""
        return np.array([self.maps[b].fixed_point for b in self.boundary])

    @property
    def diameter(self) -> float:
        pts = self.boundary_points
        return float(np.max(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)))

    def map(self, letter: int) -> SimilarityMap:
        return self.maps[_check_letter(self, letter) - 1]


def _check_letter(ifs: IfsSystem, letter) -> int:
    if isinstance(letter, bool) or not isinstance(letter, (int, np.integer)):
        raise InvalidWordError(f"letter {letter!r} is not an integer")
    if not 1 <= letter <= ifs.n_maps:
        raise InvalidWordError(f"letter {letter} outside 1..{ifs.n_maps}")
    return int(letter)


def check_word(ifs: IfsSystem, w: Sequence[int]) -> Word:
    return tuple(_check_letter(ifs, k) for k in w)


def apply_word(ifs: IfsSystem, w: Sequence[int], p) -> np.ndarray:
    """Evaluate ``f_{w_1} o ... o f_{w_m}`` at ``p``."""
    w = check_word(ifs, w)
    x = np.asarray(p, dtype=float)
    if x.shape != (ifs.dimension,):
        raise IFSError(f"point must have length {ifs.dimension}")
    for k in reversed(w):
        x = ifs.maps[k - 1](x)
    return x


def address_point(ifs: IfsSystem, addr: Address) -> np.ndarray:
    if addr.point - 1 not in ifs.boundary:
        raise IFSError(f"P{addr.point} is not a boundary point")
    return apply_word(ifs, addr.word, ifs.map(addr.point).fixed_point)


def moran_dimension(ifs: IfsSystem) -> float:
    """Solve ``sum_i R_i**s == 1`` for ``s > 0``."""
    r = ifs.ratios

    def residual(s):
        return float(np.sum(r**s)) - 1.0

    # residual(0) = N - 1 > 0 and residual decreases strictly to -1
    hi = 1.0
    while residual(hi) > 0:
        hi *= 2.0
    s = brentq(residual, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return float(s)


def measure_weights(ifs: IfsSystem) -> np.ndarray:
    return ifs.ratios ** moran_dimension(ifs)


def cell_measure(ifs: IfsSystem, w: Sequence[int]) -> float:
    w = check_word(ifs, w)
    mu = measure_weights(ifs)
    return float(np.prod([mu[k - 1] for k in w])) if w else 1.0


def word_successor(ifs: IfsSystem, w: Sequence[int]) -> Word:
    """Next word of the same length in lexicographic order."""
    return _step_word(ifs, w, +1)


def word_predecessor(ifs: IfsSystem, w: Sequence[int]) -> Word:
    return _step_word(ifs, w, -1)


def _step_word(ifs: IfsSystem, w, step: int) -> Word:
    if ifs.n_boundary != 2:
        raise IFSError("word order stepping is only defined for curves (two boundary points)")
    letters = list(check_word(ifs, w))
    first, last = (1, ifs.n_maps) if step > 0 else (ifs.n_maps, 1)
    i = len(letters) - 1
    while i >= 0 and letters[i] == last:
        letters[i] = first
        i -= 1
    if i < 0:
        which = "last" if step > 0 else "first"
        raise OrderBoundaryError(f"{tuple(w)} is the {which} word of its length")
    letters[i] += step
    return tuple(letters)


def parse_ifs_spec(text: str) -> IfsSystem:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IFSError(f"invalid JSON: {exc}") from exc
    return ifs_from_dict(data)


def ifs_from_dict(data: dict) -> IfsSystem:
    if not isinstance(data, dict):
        raise IFSError("IFS description must be a JSON object")
    for key in ("dimension", "maps"):
        if key not in data:
            raise IFSError(f"missing field {key!r}")
    d = data["dimension"]
    if not isinstance(d, int) or isinstance(d, bool):
        raise IFSError("'dimension' must be an integer")
    raw_maps = data["maps"]
    if not isinstance(raw_maps, list):
        raise IFSError("'maps' must be a list")
    maps = []
    for i, m in enumerate(raw_maps):
        if not isinstance(m, dict) or "matrix" not in m or "translation" not in m:
            raise IFSError(f"map {i} needs 'matrix' and 'translation'")
        try:
            f = SimilarityMap(np.array(m["matrix"], dtype=float), np.array(m["translation"], dtype=float))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, IFSError):
                raise IFSError(f"map {i}: {exc}") from exc
            raise IFSError(f"map {i}: non-numeric coefficients") from exc
        if f.dimension != d:
            raise IFSError(f"map {i} has dimension {f.dimension}, expected {d}")
        maps.append(f)
    boundary = data.get("boundary", list(range(len(maps))))
    if not isinstance(boundary, list) or not all(isinstance(b, int) and not isinstance(b, bool) for b in boundary):
        raise IFSError("'boundary' must be a list of map indices")
    closed = data.get("closed", True)
    if not isinstance(closed, bool):
        raise IFSError("'closed' must be a boolean")
    return IfsSystem(tuple(maps), tuple(boundary), closed, str(data.get("name", "custom")))


PRESETS = ("gasket", "tetrahedron", "minkowski")


def load_preset(name: str) -> IfsSystem:
    if name not in PRESETS:
        raise IFSError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = (resources.files("fractalopt") / "presets" / f"{name}.json").read_text()
    return parse_ifs_spec(text)


def load_ifs(path: str | Path) -> IfsSystem:
    return parse_ifs_spec(Path(path).read_text())
