"""Kernel backend selection.

The compiled extension is preferred when it imports cleanly; otherwise the
pure-Python kernels take over. Set ORTHOREG_BACKEND=python (or =compiled)
to force a choice; forcing `compiled` raises if the extension is missing,
rather than silently falling back.
"""

import os

from . import _kernels_py

_FORCED = os.environ.get("ORTHOREG_BACKEND", "").strip().lower()

if _FORCED == "python":
    kernels = _kernels_py
elif _FORCED == "compiled":
    from . import _kernels as kernels  # ImportError is the point
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.BACKEND_NAME


def get_kernels(name=None):
    """Return a kernels module by name ('compiled' | 'python'), default active."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
