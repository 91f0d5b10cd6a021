"""Deterministic synthetic face-like images with identity structure."""
import numpy as np

from .errors import ContractError

# (low, high) ranges for per-identity parameters, in unit image coordinates
_IDENTITY_RANGES = {
    "face_cx": (0.44, 0.56),
    "face_rx": (0.20, 0.34),
    "face_ry": (0.18, 0.30),
    "bg_level": (0.05, 0.20),
    "bg_amp": (0.50, 0.75),
    "eye_y": (0.32, 0.46),
    "eye_sep": (0.16, 0.34),
    "eye_sigma": (0.035, 0.07),
    "eye_int": (0.25, 0.50),
    "mouth_y": (0.62, 0.76),
    "mouth_w": (0.07, 0.16),
    "mouth_h": (0.025, 0.05),
    "mouth_int": (0.20, 0.45),
}
_POS_JITTER = 0.012
_INT_JITTER = 0.04


def _blob(u, v, cy, cx, sy, sx):
    return np.exp(-0.5 * (((v - cy) / sy) ** 2 + ((u - cx) / sx) ** 2))


def render_face(p, size):
    """Render one image from a parameter dict (see ``_IDENTITY_RANGES``)."""
    coords = (np.arange(size) + 0.5) / size
    v, u = np.meshgrid(coords, coords, indexing="ij")
    img = p["bg_level"] + p["bg_amp"] * _blob(u, v, 0.5, p["face_cx"], p["face_ry"] * 1.6, p["face_rx"])
    for side in (-0.5, 0.5):
        img = img - p["eye_int"] * _blob(u, v, p["eye_y"], p["face_cx"] + side * p["eye_sep"],
                                         p["eye_sigma"], p["eye_sigma"])
    img = img - p["mouth_int"] * _blob(u, v, p["mouth_y"], p["face_cx"], p["mouth_h"], p["mouth_w"])
    return np.clip(img, 0.0, 1.0)


def make_toy_dataset(n, size, identities, seed):
    """Return ``n`` pairs ``(image, identity_label)`` of ``size x size`` images.

    Sample ``i`` belongs to identity ``i % identities``. Positions and
    intensities are identity-specific with small per-sample jitter.
    """
    if int(size) != size or size < 8 or size & (size - 1):
        raise ContractError(f"size must be a power of two >= 8, got {size!r}")
    if identities < 1 or n < 1:
        raise ContractError("n and identities must be >= 1")
    if identities > n:
        raise ContractError(f"identities ({identities}) cannot exceed n ({n})")
    rng = np.random.default_rng(seed)
    ids = [{k: rng.uniform(lo, hi) for k, (lo, hi) in _IDENTITY_RANGES.items()}
           for _ in range(identities)]
    out = []
    for i in range(n):
        label = i % identities
        p = dict(ids[label])
        for k in ("face_cx", "eye_y", "mouth_y"):
            p[k] += rng.normal(0.0, _POS_JITTER)
        p["eye_sep"] += rng.normal(0.0, _POS_JITTER)
        for k in ("eye_int", "mouth_int", "bg_amp"):
            p[k] *= 1.0 + rng.normal(0.0, _INT_JITTER)
        out.append((render_face(p, int(size)), label))
    return out
