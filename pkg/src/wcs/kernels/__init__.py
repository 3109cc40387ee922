"""Hot-loop kernels: compiled Cython core with a pure-numpy fallback.

The compiled backend is preferred when the extension built; set
``WCS_FORCE_NUMPY_KERNELS=1`` to force the fallback (used by the parity tests
and the benchmark). Both backends produce bit-identical float64 output.
"""

import os

from . import warp_numpy

if os.environ.get("WCS_FORCE_NUMPY_KERNELS") == "1":
    _impl = warp_numpy
    KERNEL_BACKEND = "numpy"
else:
    try:
        from . import _warp_cy as _impl
        KERNEL_BACKEND = "cython"
    except ImportError:
        _impl = warp_numpy
        KERNEL_BACKEND = "numpy"


def warp_backward_u8(src, flow):
    return _impl.warp_backward_u8(src, flow)
