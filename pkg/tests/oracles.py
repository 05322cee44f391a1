"""Independent reference computations used by the tests.

Nothing here calls the code paths under test: resampling is recomputed by
explicit per-sample loops straight from the kernel formula, searches are
exhaustive sorts, and the prox is checked by generic numerical minimization.
"""
import math

import numpy as np
from scipy.optimize import minimize


def keys(x, a=-0.5):
    x = abs(x)
    if x <= 1:
        return (a + 2) * x ** 3 - (a + 3) * x ** 2 + 1
    if x <= 2:
        return a * x ** 3 - 5 * a * x ** 2 + 8 * a * x - 4 * a
    return 0.0


def resize_weights_loop(n_in, n_out, antialias=True, scale=None):
    """Dense (n_out, n_in) weights, one output sample at a time (0-based
    centers, clamp-to-edge)."""
    s = n_out / n_in if scale is None else scale
    widen = s < 1 and antialias
    support = 2.0 / s if widen else 2.0
    W = np.zeros((n_out, n_in))
    for i in range(n_out):
        u = (i + 0.5) / s - 0.5
        lo = math.floor(u - support) - 1
        hi = math.ceil(u + support) + 1
        acc = {}
        total = 0.0
        for j in range(lo, hi + 1):
            wt = s * keys((u - j) * s) if widen else keys(u - j)
            if wt == 0.0:
                continue
            jj = min(max(j, 0), n_in - 1)
            acc[jj] = acc.get(jj, 0.0) + wt
            total += wt
        for jj, wt in acc.items():
            W[i, jj] = wt / total
    return W


def resize_direct(plane, out_h, out_w, antialias=True):
    """Row-then-column direct convolution on a single plane."""
    Wr = resize_weights_loop(plane.shape[0], out_h, antialias)
    Wc = resize_weights_loop(plane.shape[1], out_w, antialias)
    tmp = np.array([[sum(Wr[i, k] * plane[k, j] for k in range(plane.shape[0]))
                     for j in range(plane.shape[1])] for i in range(out_h)])
    return np.array([[sum(Wc[j, k] * tmp[i, k] for k in range(plane.shape[1]))
                      for j in range(out_w)] for i in range(out_h)])


def dense_degrade_matrix(h, w, factor):
    """Explicit DH for one (h, w) plane in row-major vectorization, built
    pixel by pixel from the loop weights."""
    Wr = resize_weights_loop(h, h // factor, True, scale=1.0 / factor)
    Wc = resize_weights_loop(w, w // factor, True, scale=1.0 / factor)
    lh, lw = h // factor, w // factor
    A = np.zeros((lh * lw, h * w))
    for i in range(lh):
        for j in range(lw):
            for p in range(h):
                for q in range(w):
                    A[i * lw + j, p * w + q] = Wr[i, p] * Wc[j, q]
    return A


def brute_force_search(planes, target, window, s, m):
    """All candidates in the window, sorted by (distance, target-first,
    row-major order)."""
    _, H, W = planes.shape
    tr, tc = target
    half = window // 2
    t = planes[:, tr:tr + m, tc:tc + m]
    cands = []
    for r in range(H - m + 1):
        for c in range(W - m + 1):
            if abs(r - tr) <= half and abs(c - tc) <= half:
                d = float(np.sum((planes[:, r:r + m, c:c + m] - t) ** 2))
                cands.append((d, 0 if (r, c) == (tr, tc) else 1, r, c))
    cands.sort(key=lambda x: (x[1], x[0], x[2], x[3]))
    return [(r, c) for _, _, r, c in cands[:s]], [d for d, _, _, _ in cands[:s]]


def brute_force_level_topk(planes, tvec_block, k, m):
    _, H, W = planes.shape
    cands = []
    for r in range(H - m + 1):
        for c in range(W - m + 1):
            d = float(np.sum((planes[:, r:r + m, c:c + m] - tvec_block) ** 2))
            cands.append((d, r, c))
    cands.sort()
    return [(r, c) for _, r, c in cands[:k]]


def minimize_weighted_nuclear(M, w, tau, deltas=(1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)):
    """Numerically minimize tau/2 ||Z - M||^2 + sum w_k sigma_k(Z).

    Each sigma_k is smoothed to sqrt(sigma_k^2 + delta^2) and L-BFGS is run
    with warm-started continuation delta -> 0. Starts at M.
    """
    shape = M.shape
    w = np.asarray(w, dtype=np.float64)

    def make(delta):
        def f(z):
            Z = z.reshape(shape)
            U, sig, Vt = np.linalg.svd(Z, full_matrices=False)
            sm = np.sqrt(sig ** 2 + delta ** 2)
            val = 0.5 * tau * np.sum((Z - M) ** 2) + np.sum(w * sm)
            grad = tau * (Z - M) + (U * (w * sig / sm)) @ Vt
            return val, grad.ravel()
        return f

    z = M.ravel().copy()
    for delta in deltas:
        res = minimize(make(delta), z, jac=True, method="L-BFGS-B",
                       options={"maxiter": 20000, "gtol": 1e-13, "ftol": 1e-16})
        z = res.x
    return z.reshape(shape)


def dense_fusion_solve(weights, rhs_patch, lr_plane, beta, factor):
    h, w = weights.shape
    A_dh = dense_degrade_matrix(h, w, factor)
    A = np.diag(weights.ravel()) + beta * A_dh.T @ A_dh
    b = rhs_patch.ravel() + beta * A_dh.T @ lr_plane.ravel()
    return np.linalg.solve(A, b).reshape(h, w)
