"""Cube-scan kernel selection: compiled core with a numpy fallback.

The compiled extension is chosen at import time when present; setting
PARAKIT_FORCE_FALLBACK forces the numpy path. Both backends implement the
same scan contract and agree to roundoff, which tests/benchmarks check by
importing the modules directly.
"""

import numpy as np

from .. import config
from . import fallback

_compiled = None
if not config.force_fallback():
    try:
        from . import _cubescan as _compiled
    except ImportError:
        _compiled = None

HAVE_COMPILED = _compiled is not None


def backend_name():
    return "compiled" if _compiled is not None else "numpy"


def _as_kernel_args(values, starts, weights):
    values = np.ascontiguousarray(values, dtype=np.float64)
    starts = [np.ascontiguousarray(s, dtype=np.int64) for s in starts]
    weights = [np.ascontiguousarray(w, dtype=np.float64) for w in weights]
    return values, starts, weights


def scan_level(values, starts, weights, mode, impl=None):
    """Scan one cube level; see the backend modules for the contract.

    `impl` optionally forces "compiled" or "numpy" for this call.
    """
    values, starts, weights = _as_kernel_args(values, starts, weights)
    use_compiled = _compiled is not None
    if impl == "numpy":
        use_compiled = False
    elif impl == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled cube-scan core is not available")
        use_compiled = True
    if use_compiled:
        if values.ndim == 2:
            return _compiled.scan2(
                values, starts[0], starts[1], weights[0], weights[1], mode
            )
        if values.ndim == 3:
            return _compiled.scan3(
                values,
                starts[0],
                starts[1],
                starts[2],
                weights[0],
                weights[1],
                weights[2],
                mode,
            )
        raise ValueError(f"unsupported dimensionality {values.ndim}")
    return fallback.scan_level(values, starts, weights, mode)
