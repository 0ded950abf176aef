"""Hot kernels (level expansion, greedy quantizer) with a compiled backend and a numpy fallback.

The compiled extension is used when it was built and imports cleanly. Set
``SEQBELL_PURE_PYTHON=1`` to force the numpy implementation.
"""

import os

from . import _reference

try:
    if os.environ.get("SEQBELL_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _fast as _impl
except ImportError:
    _impl = _reference

expand = _impl.expand
quantize = _impl.quantize
BACKEND = _impl.BACKEND


def _module(name):
    if name is None:
        return _impl
    if name == "numpy":
        return _reference
    if name == "cython":
        from . import _fast

        return _fast
    raise ValueError(f"unknown backend {name!r}")


def get_backend(name=None):
    """Return the ``expand`` function for ``"cython"``, ``"numpy"``, or the active one."""
    return _module(name).expand


def get_quantizer(name=None):
    """Return the ``quantize`` function for ``"cython"``, ``"numpy"``, or the active one."""
    return _module(name).quantize


__all__ = ["expand", "quantize", "BACKEND", "get_backend", "get_quantizer"]
