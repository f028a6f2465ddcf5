"""Flip-kernel backend selection.

The compiled extension is used when it was built; otherwise the pure-Python
kernel is loaded. Set ``FLIPCHAIN_PURE_PYTHON=1`` to force the fallback.
Both backends expose the same ``FlipKernel`` class and are bit-identical on
a PCG64 stream.
"""

import os

from . import _pykernel

try:
    if os.environ.get("FLIPCHAIN_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernel requested")
    from . import _ckernel as _active
except ImportError:
    _active = _pykernel

FlipKernel = _active.FlipKernel
anneal_beta = _active.anneal_beta
BACKEND = _active.BACKEND
PRERUN, PLAIN, METROPOLIS, ANNEAL = 0, 1, 2, 3
LINEAR, GEOMETRIC = 0, 1


def available_backends():
    names = {"python": _pykernel}
    try:
        from . import _ckernel

        names["cython"] = _ckernel
    except ImportError:
        pass
    return names


def get_backend(name=None):
    """Return the kernel module ``name`` ("python"/"cython"), or the active one."""
    if name is None:
        return _active
    backends = available_backends()
    if name not in backends:
        raise ImportError(f"kernel backend {name!r} is not available")
    return backends[name]
