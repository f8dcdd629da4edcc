"""Enumeration kernels, compiled when available.

The Cython build (``semifix._ckernels``) is used if it imports; otherwise
the pure-Python twin.  Set ``SEMIFIX_PURE_PYTHON=1`` to force the fallback.
``BACKEND`` names the active implementation.
"""
import os

import numpy as np

from . import _pykernels

PHI_CODES = {"sum": 0, "max": 1, "scaled_sum": 2, "power": 3}

BANACH, KANNAN, CHATTERJEA, PERIMETER = 0, 1, 2, 3


def _load_compiled():
    if os.environ.get("SEMIFIX_PURE_PYTHON", "").strip() not in ("", "0"):
        return None
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()
_impl = _compiled if _compiled is not None else _pykernels
BACKEND = "cython" if _compiled is not None else "python"


def backends():
    """Available implementations by name (for benchmarks and parity tests)."""
    out = {"python": _pykernels}
    if _compiled is not None:
        out["cython"] = _compiled
    else:
        try:
            from . import _ckernels
            out["cython"] = _ckernels
        except ImportError:
            pass
    return out


def as_matrix(d):
    return np.ascontiguousarray(d, dtype=np.float64)


def as_table(m):
    return np.ascontiguousarray(m, dtype=np.int64)


def ratio_constant(d, m, mode, impl=None):
    return (impl or _impl).ratio_constant(as_matrix(d), as_table(m), mode)


def coefficient_excess(d, m, mode, c, impl=None):
    return (impl or _impl).coefficient_excess(as_matrix(d), as_table(m), mode, float(c))


def perimeter_constant(d, m, impl=None):
    return (impl or _impl).perimeter_constant(as_matrix(d), as_table(m))


def crr_excess(d, m, a, b, g, impl=None):
    return (impl or _impl).crr_excess(as_matrix(d), as_table(m), float(a), float(b), float(g))


def tr_excess(d, code, K=1.0, q=1.0, impl=None):
    return (impl or _impl).tr_excess(as_matrix(d), code, float(K), float(q))


def tr_ratio(d, impl=None):
    return (impl or _impl).tr_ratio(as_matrix(d))
