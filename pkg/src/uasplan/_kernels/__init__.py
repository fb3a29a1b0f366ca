"""Hot-loop kernels with a compiled backend and a pure-Python fallback.

The compiled extension is used when it imports; set ``UASPLAN_PURE_PYTHON=1``
to force the fallback. :func:`get_backend` returns either module explicitly,
which the parity tests and the benchmark use.
"""

import os
from types import ModuleType

from . import _pykernels

KERNEL_NAMES = ("trace_cells", "segment_cost", "edt_sq", "astar", "segments_hit", "lidar_returns")

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None


def available_backends() -> list[str]:
    names = ["python"]
    if _ckernels is not None:
        names.insert(0, "cython")
    return names


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name`` (``"cython"`` or ``"python"``).

    ``None`` selects the default: compiled unless unavailable or disabled by
    the environment.
    """
    if name is None:
        if _ckernels is not None and os.environ.get("UASPLAN_PURE_PYTHON", "") in ("", "0"):
            return _ckernels
        return _pykernels
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


_active = get_backend()
BACKEND: str = _active.BACKEND
STATUS_SOLVED = _pykernels.STATUS_SOLVED
STATUS_NO_PATH = _pykernels.STATUS_NO_PATH
STATUS_TIMEOUT = _pykernels.STATUS_TIMEOUT

trace_cells = _active.trace_cells
segment_cost = _active.segment_cost
edt_sq = _active.edt_sq
astar = _active.astar
segments_hit = _active.segments_hit
lidar_returns = _active.lidar_returns
