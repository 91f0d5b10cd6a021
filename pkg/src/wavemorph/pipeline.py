"""End-to-end morph generation.

preprocess -> Haar DWT -> LL plane through the diffusion autoencoder
(semantic code + DDIM inversion, interpolation, DDIM decoding) -> detail
planes averaged -> inverse DWT.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .diffusion import ZeroDenoiser, ddim_decode, ddim_encode, make_schedule
from .errors import ContractError, DimensionError, WaveMorphError
from .latent import (LatentPair, PoolPyramidEncoder, encode_semantic, interpolate_pair,
                     preprocess_one, preprocess_xi)
from .toydata import make_toy_dataset  # noqa: F401  (re-export)
from .wavelet import PLANES, SubBands, average_subbands, dwt_haar, iwt_haar

MODES = ("ll_only", "all_subbands")


@dataclass(frozen=True)
class ModelBundle:
    schedule: object
    denoiser: object
    encoder: object
    io_resolution: tuple
    ddim_steps: int = 100

    def __post_init__(self):
        h, w = (int(x) for x in self.io_resolution)
        if h < 2 or w < 2 or h % 2 or w % 2:
            raise ContractError(f"io_resolution must be even in both axes, got {self.io_resolution}")
        object.__setattr__(self, "io_resolution", (h, w))
        if not 1 <= self.ddim_steps <= self.schedule.T:
            raise ContractError(f"ddim_steps={self.ddim_steps} must lie in [1, T={self.schedule.T}]")
        op = self.operating_resolution
        for name, part in (("denoiser", self.denoiser), ("encoder", self.encoder)):
            shape = getattr(part, "shape", None)
            if shape is not None and tuple(shape) != op:
                raise DimensionError(
                    f"{name} operates on {tuple(shape)} but the bundle's operating "
                    f"resolution is {op} (half of io_resolution {self.io_resolution})")

    @property
    def operating_resolution(self):
        return (self.io_resolution[0] // 2, self.io_resolution[1] // 2)


def zero_bundle(io_resolution=(32, 32), d=32, T=100, ddim_steps=100):
    """Bundle with the zero denoiser; encode/decode are exact inverses."""
    op = (io_resolution[0] // 2, io_resolution[1] // 2)
    return ModelBundle(make_schedule(T), ZeroDenoiser(op), PoolPyramidEncoder(op, d),
                       tuple(io_resolution), ddim_steps)


@dataclass(frozen=True)
class MorphRequest:
    subject_a: np.ndarray
    subject_b: np.ndarray
    gamma: float = 0.5
    mode: str = "ll_only"

    def validate(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ContractError(f"gamma must lie in [0, 1], got {self.gamma!r}")
        if self.mode not in MODES:
            raise ContractError(f"mode must be one of {MODES}, got {self.mode!r}")


def _channels(plane):
    return [plane] if plane.ndim == 2 else [plane[:, :, c] for c in range(plane.shape[2])]


def _stack(channels, ndim):
    return channels[0] if ndim == 2 else np.stack(channels, axis=2)


def encode_plane(plane, bundle):
    """Semantic code and DDIM-inverted stochastic code of one 2-D plane."""
    z = encode_semantic(plane, bundle.encoder)
    x_T = ddim_encode(plane, z, bundle.denoiser, bundle.schedule, bundle.ddim_steps)
    return LatentPair(z, x_T)


def decode_pair(pair, bundle):
    return ddim_decode(pair.stochastic, pair.semantic, bundle.denoiser, bundle.schedule,
                       bundle.ddim_steps)


def morph_plane(pa, pb, gamma, bundle):
    """Diffusion-autoencoder blend of two sub-band planes (per channel)."""
    out = []
    for ca, cb in zip(_channels(pa), _channels(pb)):
        mixed = interpolate_pair(encode_plane(ca, bundle), encode_plane(cb, bundle), gamma)
        out.append(decode_pair(mixed, bundle))
    return _stack(out, pa.ndim)


def reconstruct_plane(plane, bundle):
    return _stack([decode_pair(encode_plane(c, bundle), bundle) for c in _channels(plane)], plane.ndim)


def morph_subbands(req, bundle):
    """Fused sub-bands of the morph, before the inverse transform."""
    req.validate()
    a, b = preprocess_xi(req.subject_a, req.subject_b, bundle.io_resolution)
    ba, bb = dwt_haar(a), dwt_haar(b)
    if req.mode == "ll_only":
        return average_subbands(ba, bb).replace(ll=morph_plane(ba.ll, bb.ll, req.gamma, bundle))
    return SubBands(*(morph_plane(getattr(ba, n), getattr(bb, n), req.gamma, bundle) for n in PLANES))


def wavelet_morph(req, bundle):
    """Generate a morph of ``req.subject_a`` and ``req.subject_b`` at the bundle's io resolution.

    ``gamma`` is the weight of subject A (1 reproduces A's latents). In
    ``ll_only`` mode only the LL plane goes through the diffusion path and the
    detail planes are averaged; ``all_subbands`` sends all four planes through
    it.
    """
    return iwt_haar(morph_subbands(req, bundle))


def reconstruct(img, bundle):
    """Single-subject round trip through the same path (no interpolation)."""
    a = preprocess_one(img, bundle.io_resolution).image
    bands = dwt_haar(a)
    return iwt_haar(bands.replace(ll=reconstruct_plane(bands.ll, bundle)))


class BatchMorphError(WaveMorphError):
    def __init__(self, index, cause):
        super().__init__(f"morph request {index} failed: {cause}")
        self.index = index
        self.cause = cause


def batch_morph(requests: Sequence[MorphRequest], bundle, workers=1):
    """Run :func:`wavelet_morph` over ``requests`` preserving order.

    The first failing request aborts the batch with a :class:`BatchMorphError`
    carrying its index.
    """
    requests = list(requests)

    def run(item):
        i, req = item
        try:
            return wavelet_morph(req, bundle)
        except Exception as exc:
            raise BatchMorphError(i, exc) from exc

    if workers <= 1:
        return [run(item) for item in enumerate(requests)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run, item) for item in enumerate(requests)]
        return [f.result() for f in futures]
