"""Backend selection for the RK4 kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback is used. Setting ``JACOBICOMP_PURE_PYTHON=1`` forces the fallback.

Both backends integrate the linear system ``Y' = P, P' = -R(t) Y`` with the
classical four-stage Runge-Kutta rule. ``R`` is passed pre-sampled on the
half-step grid ``t_0, t_0 + h/2, t_1, ...`` with shape ``(2N + 1, m, m)``;
the state ``Y, P`` has shape ``(m, c)``.
"""

import os

import numpy as np

from . import _rk4_py

BACKEND = "python"
_impl = _rk4_py

if os.environ.get("JACOBICOMP_PURE_PYTHON") != "1":
    try:
        from . import _rk4_ext
    except ImportError:
        pass
    else:
        _impl = _rk4_ext
        BACKEND = "cython"


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython", "python" or None for the active one)."""
    if name is None:
        return _impl
    if name == "python":
        return _rk4_py
    if name == "cython":
        from . import _rk4_ext

        return _rk4_ext
    raise ValueError(f"unknown backend {name!r}")


def _prepare(R, Y0, P0):
    R = np.ascontiguousarray(R, dtype=np.float64)
    if R.ndim != 3 or R.shape[0] < 3 or R.shape[0] % 2 == 0:
        raise ValueError("R must have shape (2N + 1, m, m) with N >= 1")
    Y0 = np.atleast_2d(np.asarray(Y0, dtype=np.float64))
    P0 = np.atleast_2d(np.asarray(P0, dtype=np.float64))
    if Y0.shape != P0.shape or Y0.shape[0] != R.shape[1]:
        raise ValueError("initial state shape does not match curvature samples")
    return R, Y0, P0


def rk4_trajectory(R, h, Y0, P0, backend=None):
    R, Y0, P0 = _prepare(R, Y0, P0)
    return get_backend(backend).rk4_trajectory(R, float(h), Y0, P0)


def rk4_endpoint(R, h, Y0, P0, backend=None):
    R, Y0, P0 = _prepare(R, Y0, P0)
    return get_backend(backend).rk4_endpoint(R, float(h), Y0, P0)
