"""Pick the kernel backend at import time.

``PARTIALACO_BACKEND`` may be ``auto`` (default), ``cython`` or ``python``.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels


def load(name: str = "auto") -> ModuleType:
    if name == "python":
        return _pykernels
    try:
        from . import _kernels
    except ImportError:
        if name == "cython":
            raise
        return _pykernels
    return _kernels


def available() -> list[str]:
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return names
    return ["cython", *names]


kernels = load(os.environ.get("PARTIALACO_BACKEND", "auto").lower())
