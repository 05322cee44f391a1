# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled patch kernels. Mirrors ``_pykernels`` exactly in signature."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def patch_ssd(const double[:, :, ::1] planes, const double[:, :, ::1] tpatch,
              Py_ssize_t r0, Py_ssize_t r1, Py_ssize_t c0, Py_ssize_t c1):
    cdef Py_ssize_t m = tpatch.shape[1]
    cdef Py_ssize_t nr = r1 - r0 + 1
    cdef Py_ssize_t nc = c1 - c0 + 1
    out = np.empty((nr, nc), dtype=np.float64)
    cdef double[:, ::1] d = out
    cdef Py_ssize_t i, j, ch, a, b
    cdef double acc, t
    with nogil:
        for i in range(nr):
            for j in range(nc):
                acc = 0.0
                for ch in range(3):
                    for a in range(m):
                        for b in range(m):
                            t = planes[ch, r0 + i + a, c0 + j + b] - tpatch[ch, a, b]
                            acc = acc + t * t
                d[i, j] = acc
    return out


def extract_patches(const double[:, :, ::1] planes, rows, cols, Py_ssize_t m):
    cdef const long long[::1] rv = np.ascontiguousarray(rows, dtype=np.int64)
    cdef const long long[::1] cv = np.ascontiguousarray(cols, dtype=np.int64)
    cdef Py_ssize_t n = rv.shape[0]
    out = np.empty((n, 3, m, m), dtype=np.float64)
    cdef double[:, :, :, ::1] o = out
    cdef Py_ssize_t k, ch, a, b, r, c
    with nogil:
        for k in range(n):
            r = rv[k]
            c = cv[k]
            for ch in range(3):
                for a in range(m):
                    for b in range(m):
                        o[k, ch, a, b] = planes[ch, r + a, c + b]
    return out


def accumulate_patches(double[:, :, ::1] canvas, double[:, ::1] weights,
                       rows, cols, const double[:, :, :, ::1] patches):
    cdef const long long[::1] rv = np.ascontiguousarray(rows, dtype=np.int64)
    cdef const long long[::1] cv = np.ascontiguousarray(cols, dtype=np.int64)
    cdef Py_ssize_t n = rv.shape[0]
    cdef Py_ssize_t m = patches.shape[2]
    cdef Py_ssize_t k, ch, a, b, r, c
    with nogil:
        for k in range(n):
            r = rv[k]
            c = cv[k]
            for ch in range(3):
                for a in range(m):
                    for b in range(m):
                        canvas[ch, r + a, c + b] += patches[k, ch, a, b]
            for a in range(m):
                for b in range(m):
                    weights[r + a, c + b] += 1.0
