"""Backend selection for the hot kernels.

The compiled module is used when it imports; set ``PRESS_PURE_PYTHON=1`` to
force the pure-Python fallback (the test-suite runs both).
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("PRESS_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # no compiler at install time
        _compiled = None
    else:
        _impl = _compiled
        BACKEND = "cython"
else:
    _compiled = None

# int64 accumulators in the compiled decoder
_MAX_COMPILED_CODE_LEN = 62

build_sp_tables = _impl.build_sp_tables
sp_compress = _impl.sp_compress
sp_expand = _impl.sp_expand
decompose = _impl.decompose


def canonical_decode(data, bit_count, counts, symbols):
    if len(counts) - 1 > _MAX_COMPILED_CODE_LEN:
        return _kernels_py.canonical_decode(data, bit_count, counts, symbols)
    return _impl.canonical_decode(data, bit_count, counts, symbols)


def available_backends():
    """Map backend name to kernel module for every importable backend."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    else:
        try:
            from . import _kernels as mod
        except ImportError:
            pass
        else:
            out["cython"] = mod
    return out
