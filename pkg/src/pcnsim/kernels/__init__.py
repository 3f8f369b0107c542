"""Route-search kernels with backend selection at import.

The compiled extension is preferred when present; PCNSIM_PURE=1 forces the
pure-Python fallback. Both backends implement the same integer algorithm and
return identical results.
"""
import os

from .pathfind_py import INF_DIST

if os.environ.get("PCNSIM_PURE"):
    from .pathfind_py import bfs_dist, feasible_route

    BACKEND = "python"
else:
    try:
        from ._pathfind import bfs_dist, feasible_route  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from .pathfind_py import bfs_dist, feasible_route  # type: ignore[no-redef]

        BACKEND = "python"

__all__ = ["bfs_dist", "feasible_route", "INF_DIST", "BACKEND"]
