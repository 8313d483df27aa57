"""Select the compiled kernels when available, the numpy fallback otherwise.

Set ``SECRECY_RFUOWC_PURE=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("SECRECY_RFUOWC_PURE", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

gammainc_lower = _impl.gammainc_lower
expoly_sum = _impl.expoly_sum

__all__ = ["BACKEND", "gammainc_lower", "expoly_sum"]
