"""Kernel backend selection.

Hot numeric kernels exist in two flavors: numba-compiled loops
(:mod:`mpteleop.njit_kernels`) and vectorized pure-numpy fallbacks
(:mod:`mpteleop.numpy_kernels`) with identical signatures.

The active lane is chosen at import time from the ``MPTELEOP_NUMBA``
environment variable:

* ``MPTELEOP_NUMBA=1`` force numba (ImportError if unavailable)
* ``MPTELEOP_NUMBA=0`` force the pure-numpy fallback
* unset / ``auto``     use numba when importable, else fall back

Tests and the benchmark can switch lanes at runtime with :func:`use`.
"""

import importlib
import os

_LANES = ("numba", "numpy")

kern = None
active_lane = None


def _numba_available():
    try:
        importlib.import_module("numba")
        return True
    except ImportError:
        return False


def use(lane):
    """Select the kernel lane ("numba" or "numpy"). Returns the module."""
    global kern, active_lane
    if lane not in _LANES:
        raise ValueError(f"unknown kernel lane {lane!r}, expected one of {_LANES}")
    if lane == "numba":
        kern = importlib.import_module("mpteleop.njit_kernels")
    else:
        kern = importlib.import_module("mpteleop.numpy_kernels")
    active_lane = lane
    return kern


def _default_lane():
    flag = os.environ.get("MPTELEOP_NUMBA", "auto").strip().lower()
    if flag in ("1", "true", "on", "yes"):
        return "numba"
    if flag in ("0", "false", "off", "no"):
        return "numpy"
    return "numba" if _numba_available() else "numpy"


use(_default_lane())
