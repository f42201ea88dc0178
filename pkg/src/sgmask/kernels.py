"""Hot-loop kernels with a compiled backend and a numpy fallback.

The backend is chosen once, at import. Set ``SGMASK_PURE_PYTHON=1`` to force
the numpy implementation even when the extension is built.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("SGMASK_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels


def _flat(z):
    # complex128, C-contiguous -> interleaved float64 view
    return z.reshape(-1).view(np.float64)


def _planes(z):
    T, N, M = z.shape
    return z.view(np.float64).reshape(T, N, 2 * M)


def soft_threshold_(coef, thresh):
    """In-place complex soft-threshold of a C-contiguous complex128 array."""
    if _impl is _pykernels:
        return _pykernels.soft_threshold_(coef, thresh)
    _impl.soft_threshold_(_flat(coef), float(thresh))
    return coef


def l1_norm(coef):
    if _impl is _pykernels:
        return _pykernels.l1_norm(coef)
    return _impl.l1_norm(_flat(coef))


def prox_step_(coef, grad, step, thresh):
    """Fused gradient step, complex soft-threshold and l1 norm (in place on `coef`)."""
    if _impl is _pykernels:
        return _pykernels.prox_step_(coef, grad, step, thresh)
    return _impl.prox_step_(_flat(coef), _flat(grad), float(step), float(thresh))


def masked_residual(kspace, rowmask, y, out):
    """Write ``rowmask * kspace - y`` into `out`; return half its squared norm."""
    if _impl is _pykernels:
        return _pykernels.masked_residual(kspace, rowmask, y, out)
    return _impl.masked_residual(
        _planes(kspace), rowmask, _planes(y), _planes(out)
    )


def ssim_mean_2d(a, b, win, c1, c2):
    return _impl.ssim_mean_2d(a, b, win, c1, c2)


def available_backends():
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401

        names.append("cython")
    except ImportError:
        pass
    return names


def use_backend(name):
    """Switch backend at runtime (benchmarks and cross-checks only)."""
    global _impl, BACKEND
    if name == "python":
        _impl = _pykernels
    elif name == "cython":
        from . import _ckernels

        _impl = _ckernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
