"""Backend selection for the patch kernels.

The compiled extension is preferred; the numpy fallback is used when it is
missing or when ``CHROMASR_PURE_PYTHON=1`` is set in the environment.
"""
import os

import numpy as np

if os.environ.get("CHROMASR_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as _impl
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        from . import _pykernels as _impl
        BACKEND = "python"


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def patch_ssd(planes, tpatch, r0, r1, c0, c1):
    return _impl.patch_ssd(_c(planes), _c(tpatch), int(r0), int(r1), int(c0), int(c1))


def extract_patches(planes, rows, cols, m):
    return _impl.extract_patches(_c(planes), rows, cols, int(m))


def accumulate_patches(canvas, weights, rows, cols, patches):
    """In-place add of ``patches`` (n, 3, m, m) into ``canvas`` and overlap
    counts into ``weights``. Both targets must be C-contiguous float64."""
    _impl.accumulate_patches(canvas, weights, rows, cols, _c(patches))
