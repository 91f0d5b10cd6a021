# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Haar and resampling kernels.

Arithmetic order mirrors ``_pykernels`` exactly so the two backends agree
bit for bit.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def haar_forward(const double[:, :, ::1] x):
    cdef Py_ssize_t h = x.shape[0] // 2, w = x.shape[1] // 2, nc = x.shape[2]
    ll_a = np.empty((h, w, nc), dtype=np.float64)
    lh_a = np.empty((h, w, nc), dtype=np.float64)
    hl_a = np.empty((h, w, nc), dtype=np.float64)
    hh_a = np.empty((h, w, nc), dtype=np.float64)
    cdef double[:, :, ::1] ll = ll_a, lh = lh_a, hl = hl_a, hh = hh_a
    cdef Py_ssize_t i, j, k
    cdef double a, b, c, d
    with nogil:
        for i in range(h):
            for j in range(w):
                for k in range(nc):
                    a = x[2 * i, 2 * j, k]
                    b = x[2 * i, 2 * j + 1, k]
                    c = x[2 * i + 1, 2 * j, k]
                    d = x[2 * i + 1, 2 * j + 1, k]
                    ll[i, j, k] = ((a + b) + (c + d)) * 0.5
                    lh[i, j, k] = ((a - b) + (c - d)) * 0.5
                    hl[i, j, k] = ((a + b) - (c + d)) * 0.5
                    hh[i, j, k] = ((a - b) - (c - d)) * 0.5
    return ll_a, lh_a, hl_a, hh_a


def haar_inverse(const double[:, :, ::1] ll, const double[:, :, ::1] lh,
                 const double[:, :, ::1] hl, const double[:, :, ::1] hh):
    cdef Py_ssize_t h = ll.shape[0], w = ll.shape[1], nc = ll.shape[2]
    out_a = np.empty((2 * h, 2 * w, nc), dtype=np.float64)
    cdef double[:, :, ::1] out = out_a
    cdef Py_ssize_t i, j, k
    cdef double p, q, r, s
    with nogil:
        for i in range(h):
            for j in range(w):
                for k in range(nc):
                    p = ll[i, j, k]
                    q = lh[i, j, k]
                    r = hl[i, j, k]
                    s = hh[i, j, k]
                    out[2 * i, 2 * j, k] = ((p + q) + (r + s)) * 0.5
                    out[2 * i, 2 * j + 1, k] = ((p - q) + (r - s)) * 0.5
                    out[2 * i + 1, 2 * j, k] = ((p + q) - (r + s)) * 0.5
                    out[2 * i + 1, 2 * j + 1, k] = ((p - q) - (r - s)) * 0.5
    return out_a


cdef inline void _axis_weights(Py_ssize_t n_in, Py_ssize_t n_out,
                               Py_ssize_t[::1] lo, Py_ssize_t[::1] hi,
                               double[::1] frac) noexcept nogil:
    cdef double scale = <double>n_in / <double>n_out
    cdef double pos
    cdef Py_ssize_t o, f
    for o in range(n_out):
        pos = (o + 0.5) * scale - 0.5
        if pos < 0.0:
            pos = 0.0
        if pos > n_in - 1:
            pos = n_in - 1
        f = <Py_ssize_t>pos
        if f > n_in - 2:
            f = n_in - 2 if n_in > 1 else 0
        lo[o] = f
        hi[o] = f + 1 if n_in > 1 else 0
        frac[o] = pos - f


def bilinear_resize(const double[:, :, ::1] x, Py_ssize_t out_h, Py_ssize_t out_w):
    cdef Py_ssize_t in_h = x.shape[0], in_w = x.shape[1], nc = x.shape[2]
    ylo_a = np.empty(out_h, dtype=np.intp)
    yhi_a = np.empty(out_h, dtype=np.intp)
    fy_a = np.empty(out_h, dtype=np.float64)
    xlo_a = np.empty(out_w, dtype=np.intp)
    xhi_a = np.empty(out_w, dtype=np.intp)
    fx_a = np.empty(out_w, dtype=np.float64)
    cdef Py_ssize_t[::1] ylo = ylo_a, yhi = yhi_a, xlo = xlo_a, xhi = xhi_a
    cdef double[::1] fy = fy_a, fx = fx_a
    out_a = np.empty((out_h, out_w, nc), dtype=np.float64)
    cdef double[:, :, ::1] out = out_a
    cdef Py_ssize_t i, j, k
    cdef double top, bot
    with nogil:
        _axis_weights(in_h, out_h, ylo, yhi, fy)
        _axis_weights(in_w, out_w, xlo, xhi, fx)
        for i in range(out_h):
            for j in range(out_w):
                for k in range(nc):
                    top = x[ylo[i], xlo[j], k] + fx[j] * (x[ylo[i], xhi[j], k] - x[ylo[i], xlo[j], k])
                    bot = x[yhi[i], xlo[j], k] + fx[j] * (x[yhi[i], xhi[j], k] - x[yhi[i], xlo[j], k])
                    out[i, j, k] = top + fy[i] * (bot - top)
    return out_a
