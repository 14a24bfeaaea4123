import numpy as np
import pytest

from fractalopt.graph import build_graph
from fractalopt.ifs import load_preset

SQRT3 = np.sqrt(3.0)


@pytest.fixture(scope="session")
def gasket():
    return load_preset("gasket")


@pytest.fixture(scope="session")
def tetrahedron():
    return load_preset("tetrahedron")


@pytest.fixture(scope="session")
def minkowski():
    return load_preset("minkowski")


@pytest.fixture(scope="session")
def presets(gasket, tetrahedron, minkowski):
    return {"gasket": gasket, "tetrahedron": tetrahedron, "minkowski": minkowski}


_GRAPHS = {}


@pytest.fixture(scope="session")
def graph(presets):
    """Cached ``graph(name, m)`` builder shared across the session."""
    def get(name, m):
        key = (name, m)
        if key not in _GRAPHS:
            _GRAPHS[key] = build_graph(presets[name], m)
        return _GRAPHS[key]
    return get


def vertex_at(g, p):
    """Id of the vertex at exactly ``p`` (within 1e-12)."""
    d = np.linalg.norm(g.coords - np.asarray(p, dtype=float), axis=1)
    i = int(np.argmin(d))
    assert d[i] < 1e-12, f"no vertex at {p}"
    return i
