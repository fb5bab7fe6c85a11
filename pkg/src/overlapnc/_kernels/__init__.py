"""Hot kernels: compiled extension when available, numpy fallback otherwise.

Set ``OVERLAPNC_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels

if _ckernels is not None and not os.environ.get("OVERLAPNC_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]
gf_rref = _impl.gf_rref
gf_insert_row = _impl.gf_insert_row
IdealCore = _impl.IdealCore

__all__ = ["BACKEND", "BACKENDS", "gf_rref", "gf_insert_row", "IdealCore"]
