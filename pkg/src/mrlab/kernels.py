"""Kernel dispatch: compiled extension when available, numpy otherwise.

Set ``MRLAB_PURE_PYTHON=1`` to force the numpy implementation.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("MRLAB_PURE_PYTHON", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def recovery_sweep(sqrt_rho, s, ut, y, lq, b_index, label, t, w):
    return _impl.recovery_sweep(sqrt_rho, s, ut, y, lq, b_index, label, t, w)


recovery_sweep.__doc__ = _kernels_py.recovery_sweep.__doc__
