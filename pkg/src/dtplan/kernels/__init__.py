"""Hot numeric kernels.

The numba backend is used when numba imports cleanly; set
``DTPLAN_DISABLE_NUMBA=1`` to force the pure-numpy path.  Both backends expose
the same functions and agree to the last ulp up to summation order.
"""

import os

from . import numpy_impl

BACKEND = "numpy"
_impl = numpy_impl

if os.environ.get("DTPLAN_DISABLE_NUMBA", "").strip().lower() not in ("1", "true", "yes"):
    try:
        from . import numba_impl as _impl  # noqa: F811

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba missing
        _impl = numpy_impl

add_down = _impl.add_down
add_up = _impl.add_up
mul_down = _impl.mul_down
mul_up = _impl.mul_up
imul = _impl.imul
affine_eval = _impl.affine_eval
affine_apply = _impl.affine_apply
group_sum = _impl.group_sum
water_fill = _impl.water_fill

__all__ = [
    "BACKEND", "add_down", "add_up", "mul_down", "mul_up", "imul",
    "affine_eval", "affine_apply", "group_sum", "water_fill",
]
