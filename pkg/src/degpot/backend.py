"""Selects the compiled kernel core when available, else the numpy fallback.

Set DEGPOT_BACKEND=numpy to force the fallback (used by the benchmark).
"""

import os

if os.environ.get("DEGPOT_BACKEND", "").lower() == "numpy":
    from . import _fallback as _impl
else:
    try:
        from . import _corex as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _fallback as _impl

import numpy as _np

from ._fallback import heat_kernel  # vectorized; not a hot path

BACKEND_NAME = _impl.BACKEND_NAME


def _c(a):
    a = _np.ascontiguousarray(a, dtype=float)
    return a if a.flags.writeable else a.copy()


def dlayer_sum(n, d2, ratio, w, z_edges, dens):
    return _impl.dlayer_sum(n, _c(d2), _c(ratio), _c(w), _c(z_edges), _c(dens))


def slayer_sum(n, d2, w, z_edges, dens):
    return _impl.slayer_sum(n, _c(d2), _c(w), _c(z_edges), _c(dens))


def dlayer_panels(n, d2, ratio, w, z_edges):
    return _impl.dlayer_panels(n, _c(d2), _c(ratio), _c(w), _c(z_edges))


def slayer_panels(n, d2, w, z_edges):
    return _impl.slayer_panels(n, _c(d2), _c(w), _c(z_edges))
