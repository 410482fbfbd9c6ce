"""Backend selection for the path-enumeration kernels.

The compiled extension is used when it imports; set ``EPE_PURE_PYTHON=1``
to force the pure-Python reference kernels.
"""

import os

from . import _pykernels as python_backend

try:
    if os.environ.get("EPE_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = active.BACKEND

neumaier_sum = active.neumaier_sum
path_block = active.path_block
class_block = active.class_block


def get_backend(name: str | None = None):
    """Return a kernel module by name (``"cython"``, ``"python"``) or the active one."""
    if name is None:
        return active
    if name == "python":
        return python_backend
    if name == "cython":
        if compiled_backend is None:
            raise ImportError("compiled kernels are not built")
        return compiled_backend
    raise ValueError(f"unknown kernel backend {name!r}")
