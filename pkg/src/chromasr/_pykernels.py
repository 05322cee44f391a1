"""Pure numpy implementations of the hot patch kernels.

Same signatures and semantics as the compiled ``_ckernels`` module; used when
the extension is not built or ``CHROMASR_PURE_PYTHON`` is set.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def patch_ssd(planes, tpatch, r0, r1, c0, c1):
    """Squared l2 distance from ``tpatch`` (3, m, m) to every patch whose
    top-left corner lies in rows ``r0..r1`` and cols ``c0..c1`` (inclusive).
    """
    m = tpatch.shape[1]
    region = planes[:, r0:r1 + m, c0:c1 + m]
    win = sliding_window_view(region, (m, m), axis=(1, 2))
    diff = win - tpatch[:, None, None, :, :]
    return np.einsum("cijkl,cijkl->ij", diff, diff)


def extract_patches(planes, rows, cols, m):
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    off = np.arange(m)
    rr = rows[:, None, None] + off[None, :, None]
    cc = cols[:, None, None] + off[None, None, :]
    # (3, n, m, m) -> (n, 3, m, m)
    return np.ascontiguousarray(planes[:, rr, cc].transpose(1, 0, 2, 3))


def accumulate_patches(canvas, weights, rows, cols, patches):
    m = patches.shape[2]
    for k in range(len(rows)):
        r, c = int(rows[k]), int(cols[k])
        canvas[:, r:r + m, c:c + m] += patches[k]
        weights[r:r + m, c:c + m] += 1.0
