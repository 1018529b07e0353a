"""Kernel backend selection.

The compiled extension is preferred when it imports cleanly; setting the
environment variable ``STABLEQUAD_FORCE_PY=1`` forces the pure-Python
kernels (useful for the backend benchmark and for debugging).
"""

import os

from . import _pykernels

if os.environ.get("STABLEQUAD_FORCE_PY", "") == "1":
    kernels = _pykernels
else:
    try:
        from . import _ckernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _pykernels


def backend_name() -> str:
    """Name of the active kernel backend: 'cython' or 'python'."""
    return kernels.BACKEND_NAME
