"""Semantic encoders, image preprocessing and latent interpolation.

Two interpolants are used on a latent pair:

* ``lerp(u, v, g) = g*u + (1-g)*v``  (g = 1 returns u)
* ``slerp(u, v, g)``, great-circle path with g = 0 returning u

:func:`interpolate_pair` orders the arguments so that ``gamma`` is always the
weight of the *first* pair for both components.
"""
from dataclasses import dataclass
import logging

import numpy as np

from . import _backend
from .errors import ContractError, DimensionError
from .wavelet import as_image

log = logging.getLogger(__name__)

SLERP_EPS = 1e-7


# -- encoders ---------------------------------------------------------------

class PoolPyramidEncoder:
    """Fixed average-pool pyramid (1x1, 2x2, 4x4, ... grids), coarse to fine.

    The concatenated cell means are truncated to ``d`` values. Because every
    entry is a mean of pixels, a constant image maps to a constant code.
    """

    kind = "pool"

    def __init__(self, shape, d=32):
        self.shape = tuple(int(s) for s in shape)
        self.d = int(d)
        if self.d < 1:
            raise ContractError(f"semantic dimension must be >= 1, got {d}")
        self.grids = []
        total, g = 0, 1
        while total < self.d:
            if self.shape[0] % g or self.shape[1] % g:
                raise DimensionError(
                    f"a {self.d}-value pyramid needs a {g}x{g} grid, "
                    f"which does not divide image shape {self.shape}")
            self.grids.append(g)
            total += g * g
            g *= 2

    def encode(self, img):
        arr = as_image(img)
        if arr.shape[:2] != self.shape:
            raise DimensionError(f"encoder built for {self.shape}, got image of shape {arr.shape[:2]}")
        if arr.ndim == 3:
            arr = arr.mean(axis=2)
        h, w = self.shape
        parts = [arr.reshape(g, h // g, g, w // g).mean(axis=(1, 3)).ravel() for g in self.grids]
        return np.concatenate(parts)[: self.d]

    def to_meta(self):
        return {"kind": self.kind, "shape": list(self.shape), "d": self.d}

    def params(self):
        return {}


class LearnedEncoder:
    """One dense layer with tanh, ``z = tanh(W x + b)``, trained with the denoiser."""

    kind = "learned"

    def __init__(self, shape, d=32, seed=0, weight=None, bias=None):
        self.shape = tuple(int(s) for s in shape)
        self.d = int(d)
        n = self.shape[0] * self.shape[1]
        if weight is None:
            rng = np.random.default_rng(seed)
            bound = 1.0 / np.sqrt(n)
            weight = rng.uniform(-bound, bound, size=(self.d, n))
            bias = rng.uniform(-bound, bound, size=self.d)
        self.weight = np.array(weight, dtype=np.float64)
        self.bias = np.array(bias, dtype=np.float64)
        if self.weight.shape != (self.d, n) or self.bias.shape != (self.d,):
            raise DimensionError("learned encoder parameters do not match shape/d")

    def _flat(self, img):
        arr = as_image(img)
        if arr.shape[:2] != self.shape:
            raise DimensionError(f"encoder built for {self.shape}, got image of shape {arr.shape[:2]}")
        if arr.ndim == 3:
            arr = arr.mean(axis=2)
        return arr.ravel()

    def encode(self, img):
        return np.tanh(self.weight @ self._flat(img) + self.bias)

    def encode_batch(self, flat):
        """``flat`` is (batch, H*W); returns (batch, d)."""
        return np.tanh(flat @ self.weight.T + self.bias)

    def to_meta(self):
        return {"kind": self.kind, "shape": list(self.shape), "d": self.d}

    def params(self):
        return {"weight": self.weight, "bias": self.bias}

    def with_params(self, weight, bias):
        return LearnedEncoder(self.shape, self.d, weight=weight, bias=bias)


def make_encoder(kind, shape, d=32, seed=0):
    if kind == "pool":
        return PoolPyramidEncoder(shape, d)
    if kind == "learned":
        return LearnedEncoder(shape, d, seed=seed)
    raise ContractError(f"unknown encoder kind {kind!r} (expected 'pool' or 'learned')")


def encode_semantic(img, enc):
    return np.asarray(enc.encode(img), dtype=np.float64)


# -- preprocessing ----------------------------------------------------------

@dataclass(frozen=True)
class Preprocessed:
    image: np.ndarray
    degenerate: bool  # zero-range input, normalization skipped


def _center_square(arr):
    h, w = arr.shape[:2]
    s = min(h, w)
    top, left = (h - s) // 2, (w - s) // 2
    return arr[top:top + s, left:left + s]


def resize_bilinear(img, target):
    arr = as_image(img)
    th, tw = target
    if arr.shape[:2] == (th, tw):
        return arr.copy()
    src = np.ascontiguousarray(arr if arr.ndim == 3 else arr[:, :, None])
    out = np.asarray(_backend.kernels.bilinear_resize(src, int(th), int(tw)))
    return out if arr.ndim == 3 else out[:, :, 0]


def preprocess_one(img, target):
    """Center-crop to square, bilinear resize to ``target``, min-max normalize."""
    th, tw = (int(target[0]), int(target[1]))
    for name, size in (("height", th), ("width", tw)):
        if size < 2 or size % 2:
            raise ContractError(f"target {name} must be even and >= 2, got {size}")
    arr = as_image(img)
    if arr.shape[0] != arr.shape[1]:
        arr = _center_square(arr)
    arr = resize_bilinear(arr, (th, tw))
    lo, hi = float(arr.min()), float(arr.max())
    if not hi > lo:
        log.warning("zero-range image: min-max normalization skipped")
        return Preprocessed(arr, True)
    if lo == 0.0 and hi == 1.0:
        return Preprocessed(arr, False)
    return Preprocessed((arr - lo) / (hi - lo), False)


def preprocess_xi(a, b, target):
    """Align two subject images onto a common even-sized grid with values in [0, 1]."""
    return preprocess_one(a, target).image, preprocess_one(b, target).image


# -- interpolation ----------------------------------------------------------

def _check_gamma(gamma):
    if not 0.0 <= gamma <= 1.0:
        raise ContractError(f"gamma must lie in [0, 1], got {gamma!r}")


def _vectors(u, v):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionError(f"length mismatch: {u.shape} vs {v.shape}")
    return u, v


def lerp(u, v, gamma):
    """``gamma * u + (1 - gamma) * v``."""
    _check_gamma(gamma)
    u, v = _vectors(u, v)
    return gamma * u + (1.0 - gamma) * v


def slerp(u, v, gamma):
    """Spherical linear interpolation; ``gamma = 0`` gives ``u``, ``gamma = 1`` gives ``v``.

    Nearly parallel or antiparallel inputs (``sin(theta) < 1e-7``) fall back to
    ``(1 - gamma) * u + gamma * v``.
    """
    _check_gamma(gamma)
    u, v = _vectors(u, v)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ContractError("slerp is undefined for a zero-norm vector")
    if gamma == 0.0:
        return u.copy()
    if gamma == 1.0:
        return v.copy()
    cos = np.clip(np.vdot(u, v) / (nu * nv), -1.0, 1.0)
    theta = np.arccos(cos)
    s = np.sin(theta)
    if s < SLERP_EPS:
        return lerp(v, u, gamma)
    return (np.sin((1.0 - gamma) * theta) / s) * u + (np.sin(gamma * theta) / s) * v


@dataclass(frozen=True)
class LatentPair:
    semantic: np.ndarray
    stochastic: np.ndarray


def interpolate_pair(a, b, gamma):
    """Blend two latent pairs; ``gamma`` is the weight of ``a`` in both components."""
    _check_gamma(gamma)
    if np.shape(a.semantic) != np.shape(b.semantic):
        raise DimensionError(
            f"semantic code sizes differ: {np.shape(a.semantic)} vs {np.shape(b.semantic)}")
    if np.shape(a.stochastic) != np.shape(b.stochastic):
        raise DimensionError(
            f"stochastic code shapes differ: {np.shape(a.stochastic)} vs {np.shape(b.stochastic)}")
    semantic = lerp(a.semantic, b.semantic, gamma)
    shape = np.shape(a.stochastic)
    stochastic = slerp(np.ravel(b.stochastic), np.ravel(a.stochastic), gamma).reshape(shape)
    return LatentPair(semantic, stochastic)
