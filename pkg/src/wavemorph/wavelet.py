"""Single- and multi-level orthonormal Haar analysis/synthesis.

Images are float64 arrays of shape ``(H, W)`` or ``(H, W, C)``; channels are
transformed independently. With the filter columns

    F_L = [1, 1] / sqrt(2),    F_H = [1, -1] / sqrt(2)

each sub-band is ``X_pq = F_p^T X F_q``: the first letter names the filter
applied down the rows (vertical direction), the second the filter applied
along the columns. So ``lh`` low-passes rows and high-passes columns, which
means it responds to changes *across columns* (vertical edges). Naming follows
the matrix definition rather than any edge-orientation folklore.
"""
from typing import NamedTuple, Iterable

import numpy as np

from . import _backend
from .errors import DimensionError

PLANES = ("ll", "lh", "hl", "hh")
DETAIL_PLANES = ("lh", "hl", "hh")


class SubBands(NamedTuple):
    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    @property
    def shape(self):
        return self.ll.shape

    def replace(self, **planes):
        return self._replace(**planes)


def as_image(img, name="image"):
    """Return ``img`` as a C-contiguous float64 array, validating its rank."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim not in (2, 3):
        raise DimensionError(f"{name} must be 2-D (H, W) or 3-D (H, W, C), got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1 or (arr.ndim == 3 and arr.shape[2] < 1):
        raise DimensionError(f"{name} has an empty axis: shape {arr.shape}")
    return np.ascontiguousarray(arr)


def _as3d(arr):
    return arr if arr.ndim == 3 else arr[:, :, None]


def _restore(arr, ndim):
    return arr[:, :, 0] if ndim == 2 else arr


def _check_even(arr):
    h, w = arr.shape[:2]
    for axis, size in (("height", h), ("width", w)):
        if size < 2 or size % 2:
            raise DimensionError(f"{axis} must be even and >= 2 for a Haar transform, got {size}")


def dwt_haar(img):
    """One level of the 2-D orthonormal Haar transform.

    Returns a :class:`SubBands` whose planes are ``H/2 x W/2`` (x C).
    Raises :class:`DimensionError` when the height or width is odd.
    """
    arr = as_image(img)
    _check_even(arr)
    ll, lh, hl, hh = _backend.kernels.haar_forward(np.ascontiguousarray(_as3d(arr)))
    return SubBands(*(_restore(np.asarray(p), arr.ndim) for p in (ll, lh, hl, hh)))


def _check_bands(bands):
    planes = [as_image(p, name) for p, name in zip(bands, PLANES)]
    shape = planes[0].shape
    for p, name in zip(planes[1:], PLANES[1:]):
        if p.shape != shape:
            raise DimensionError(f"sub-band {name} has shape {p.shape}, expected {shape} (from ll)")
    return planes


def iwt_haar(bands):
    """Inverse of :func:`dwt_haar`; exact up to rounding."""
    planes = _check_bands(bands)
    ndim = planes[0].ndim
    out = _backend.kernels.haar_inverse(*(np.ascontiguousarray(_as3d(p)) for p in planes))
    return _restore(np.asarray(out), ndim)


def average_subbands(a, b, which="detail"):
    """Element-wise mean of the selected planes of two decompositions.

    ``which`` is ``"detail"`` (lh, hl, hh; the default), ``"all"``, or an
    iterable of plane names. Planes that are not selected are taken from ``a``.
    """
    if which == "detail":
        selected = DETAIL_PLANES
    elif which == "all":
        selected = PLANES
    else:
        selected = tuple(which)
        unknown = set(selected) - set(PLANES)
        if unknown:
            raise ValueError(f"unknown sub-band name(s): {sorted(unknown)}")
    out = {}
    for name in PLANES:
        pa = np.asarray(getattr(a, name), dtype=np.float64)
        pb = np.asarray(getattr(b, name), dtype=np.float64)
        if pa.shape != pb.shape:
            raise DimensionError(f"sub-band {name} shapes differ: {pa.shape} vs {pb.shape}")
        out[name] = (pa + pb) * 0.5 if name in selected else pa
    return SubBands(**out)


def dwt_multilevel(img, levels):
    """Recursive Haar decomposition of successive LL planes.

    Returns a list of :class:`SubBands`, finest level first; the deepest
    approximation is ``result[-1].ll``.
    """
    if int(levels) != levels or levels < 1:
        raise ValueError(f"levels must be a positive integer, got {levels!r}")
    arr = as_image(img)
    factor = 2 ** levels
    h, w = arr.shape[:2]
    if h % factor or w % factor:
        raise DimensionError(
            f"image of size {h}x{w} is not divisible by 2**levels = {factor}")
    out = []
    current = arr
    for _ in range(levels):
        bands = dwt_haar(current)
        out.append(bands)
        current = bands.ll
    return out


def iwt_multilevel(pyramid: Iterable[SubBands]):
    """Invert :func:`dwt_multilevel` (uses the deepest LL and every detail set)."""
    levels = list(pyramid)
    if not levels:
        raise ValueError("empty pyramid")
    current = levels[-1].ll
    for bands in reversed(levels):
        current = iwt_haar(bands.replace(ll=current))
    return current
