"""Kernel backend selection.

The compiled extension is used when it imported successfully and the
environment variable EPEC_PURE_PYTHON is unset; otherwise the NumPy
fallback is selected. Both expose eval_point / eval_batch / eval_grad with
identical semantics; see benchmarks/bench_kernels.py for the comparison.
"""

import os

from . import _fallback

if os.environ.get("EPEC_PURE_PYTHON"):
    _impl = _fallback
    BACKEND = "fallback"
else:
    try:
        from . import _speedups as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "fallback"

eval_point = _impl.eval_point
eval_batch = _impl.eval_batch
eval_grad = _impl.eval_grad


def backend_name() -> str:
    return BACKEND
