"""Kernel backend selection.

The compiled extension is used when it imports cleanly. Setting the
environment variable ``POLYAWEB_PURE=1`` forces the numpy fallback.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

if os.environ.get("POLYAWEB_PURE", "") not in ("", "0") or _ckernels is None:
    kernels = _pykernels
    BACKEND = "python"
else:
    kernels = _ckernels
    BACKEND = "compiled"


def get_backend(name=None):
    """Return the kernel module called ``name`` ("compiled" or "python").

    ``None`` returns the module selected at import.
    """
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _ckernels is None:
            raise ImportError("the compiled extension is not built")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    return ["compiled", "python"] if _ckernels is not None else ["python"]
