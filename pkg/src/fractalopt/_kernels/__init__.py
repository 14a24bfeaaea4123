"""Hot graph kernels: compiled when the extension is built, pure Python otherwise.

``BACKEND`` names the implementation that was selected at import time.  Both
implementations stay importable as ``fallback`` and (if built) ``compiled`` so
they can be compared directly.
"""
from . import _fallback as fallback

try:
    from . import _ckernels as compiled
except ImportError:  # extension not built
    compiled = None

_impl = compiled if compiled is not None else fallback
BACKEND = "cython" if compiled is not None else "python"

greedy_successors = _impl.greedy_successors
ascend = _impl.ascend
bellman_sweep = _impl.bellman_sweep
vertex_laplacian = _impl.vertex_laplacian

__all__ = ["BACKEND", "fallback", "compiled", "greedy_successors", "ascend",
           "bellman_sweep", "vertex_laplacian"]
