"""Kernel backend selection.

The compiled extension is optional; set ``DIRFRAMES_PURE_PYTHON=1`` to force
the numpy fallback (used by the benchmark and the dual-path tests).
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("DIRFRAMES_PURE_PYTHON"):
    _impl = _kernels_py
    HAVE_COMPILED = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        HAVE_COMPILED = True
    except ImportError:
        _impl = _kernels_py
        HAVE_COMPILED = False


def backend_name():
    return "compiled" if HAVE_COMPILED else "python"


def _as_pow2_f64(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    if n == 0 or n & (n - 1):
        raise ValueError(f"length must be a power of two, got {n}")
    return x


def fwht(x, impl=None):
    """Unnormalized Walsh-Hadamard transform of a power-of-two vector."""
    out = _as_pow2_f64(x).copy()
    (impl or _impl).fwht_inplace(out)
    return out


def noiselet(x, impl=None):
    """Unitary Coifman-butterfly transform (complex output)."""
    z = np.ascontiguousarray(x, dtype=np.complex128).copy()
    n = z.shape[0]
    if n == 0 or n & (n - 1):
        raise ValueError(f"length must be a power of two, got {n}")
    (impl or _impl).noiselet_inplace(z)
    return z


def noiselet_adjoint(x, impl=None):
    """Conjugate transpose of :func:`noiselet`."""
    z = np.ascontiguousarray(x, dtype=np.complex128).copy()
    n = z.shape[0]
    if n == 0 or n & (n - 1):
        raise ValueError(f"length must be a power of two, got {n}")
    (impl or _impl).noiselet_adjoint_inplace(z)
    return z
