"""Kernel backend selection.

The compiled extension (plqkit._kernels, built from Cython) is preferred
when importable; otherwise the pure-numpy module is used.  Set
PLQKIT_PURE_PYTHON=1 to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("PLQKIT_PURE_PYTHON", "") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

contains_batch = _impl.contains_batch
plq_eval_batch = _impl.plq_eval_batch


def backend_name() -> str:
    return _impl.BACKEND_NAME


def available_backends():
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["compiled"] = _kernels
    except ImportError:
        pass
    return out
