"""Pure-numpy reference kernels, used when the compiled extension is absent.

Every expression keeps the operand order of ``_ckernels.pyx``.
"""
import numpy as np


def haar_forward(x):
    a = x[0::2, 0::2]
    b = x[0::2, 1::2]
    c = x[1::2, 0::2]
    d = x[1::2, 1::2]
    ll = ((a + b) + (c + d)) * 0.5
    lh = ((a - b) + (c - d)) * 0.5
    hl = ((a + b) - (c + d)) * 0.5
    hh = ((a - b) - (c - d)) * 0.5
    return ll, lh, hl, hh


def haar_inverse(ll, lh, hl, hh):
    h, w, nc = ll.shape
    out = np.empty((2 * h, 2 * w, nc), dtype=np.float64)
    out[0::2, 0::2] = ((ll + lh) + (hl + hh)) * 0.5
    out[0::2, 1::2] = ((ll - lh) + (hl - hh)) * 0.5
    out[1::2, 0::2] = ((ll + lh) - (hl + hh)) * 0.5
    out[1::2, 1::2] = ((ll - lh) - (hl - hh)) * 0.5
    return out


def _axis_weights(n_in, n_out):
    pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = pos.astype(np.intp)
    lo = np.minimum(lo, max(n_in - 2, 0))
    hi = lo + 1 if n_in > 1 else lo
    return lo, hi, pos - lo


def bilinear_resize(x, out_h, out_w):
    ylo, yhi, fy = _axis_weights(x.shape[0], out_h)
    xlo, xhi, fx = _axis_weights(x.shape[1], out_w)
    fx = fx[None, :, None]
    fy = fy[:, None, None]
    rows_lo = x[ylo]
    rows_hi = x[yhi]
    top = rows_lo[:, xlo] + fx * (rows_lo[:, xhi] - rows_lo[:, xlo])
    bot = rows_hi[:, xlo] + fx * (rows_hi[:, xhi] - rows_hi[:, xlo])
    return top + fy * (bot - top)
