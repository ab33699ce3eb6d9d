"""Backend selection for the Sturm-sequence kernels.

The compiled extension is used when it imports; otherwise the pure-Python
twin is used. Setting ``HARDY_LT_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("HARDY_LT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

sturm_count = _impl.sturm_count
bisect_eigenvalues = _impl.bisect_eigenvalues

__all__ = ["BACKEND", "sturm_count", "bisect_eigenvalues"]
