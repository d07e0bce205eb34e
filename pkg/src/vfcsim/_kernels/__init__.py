"""Hot numerical kernels, compiled when available.

The Cython extension ``_ckernels`` is used if it was built; otherwise the
pure-Python module is loaded. Set ``VFCSIM_PURE_PYTHON=1`` to force the
fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("VFCSIM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

sp1_kkt = _impl.sp1_kkt
pava_clip = _impl.pava_clip
deferred_acceptance = _impl.deferred_acceptance


def available_backends():
    """Map backend name -> module for every backend importable here."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


__all__ = ["BACKEND", "available_backends", "sp1_kkt", "pava_clip", "deferred_acceptance"]
