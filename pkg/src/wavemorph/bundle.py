"""Model bundle and latent pair directories.

Bundle layout::

    schedule.json                  T, beta_start, beta_end, ddim_steps
    denoiser.waft + denoiser.json  parameters (WAFT container) + metadata
    encoder.waft  + encoder.json
"""
import json
import os

import numpy as np

from .diffusion import AnalyticGaussianDenoiser, ZeroDenoiser, make_schedule
from .errors import FormatError
from .formats import read_tensor, read_tensors, write_json, write_tensor, write_tensors
from .latent import LatentPair, LearnedEncoder, PoolPyramidEncoder
from .pipeline import ModelBundle
from .training import PARAM_NAMES, TrainableDenoiser


def _read_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def _denoiser_payload(den):
    if isinstance(den, TrainableDenoiser):
        return den.to_meta(), [den.params[k] for k in PARAM_NAMES]
    if isinstance(den, AnalyticGaussianDenoiser):
        return {"kind": "analytic", "sigma0_sq": den.sigma0_sq, "shape": None}, [np.asarray(den.mu)]
    if isinstance(den, ZeroDenoiser):
        return {"kind": "zero", "shape": list(den.shape) if den.shape else None}, []
    raise FormatError(f"cannot serialize denoiser of type {type(den).__name__}")


def save_bundle(bundle, directory):
    os.makedirs(directory, exist_ok=True)
    sched = dict(bundle.schedule.to_dict(), ddim_steps=bundle.ddim_steps)
    write_json(sched, os.path.join(directory, "schedule.json"))
    meta, tensors = _denoiser_payload(bundle.denoiser)
    meta["operating_resolution"] = list(bundle.operating_resolution)
    write_json(meta, os.path.join(directory, "denoiser.json"))
    write_tensors(tensors, os.path.join(directory, "denoiser.waft"))
    enc = bundle.encoder
    write_json(enc.to_meta(), os.path.join(directory, "encoder.json"))
    p = enc.params()
    write_tensors([p[k] for k in ("weight", "bias")] if p else [], os.path.join(directory, "encoder.waft"))


def load_bundle(directory):
    for name in ("schedule.json", "denoiser.json", "denoiser.waft", "encoder.json", "encoder.waft"):
        if not os.path.exists(os.path.join(directory, name)):
            raise FormatError(f"bundle directory {directory} is missing {name}")
    s = _read_json(os.path.join(directory, "schedule.json"))
    sched = make_schedule(s["T"], s["beta_start"], s["beta_end"])
    dmeta = _read_json(os.path.join(directory, "denoiser.json"))
    dten = read_tensors(os.path.join(directory, "denoiser.waft"))
    op = tuple(dmeta["operating_resolution"])
    kind = dmeta.get("kind")
    if kind == "mlp":
        params = {}
        for k, arr in zip(PARAM_NAMES, dten):
            params[k] = arr.reshape(-1) if k.startswith("b") else arr
        den = TrainableDenoiser(dmeta["shape"], dmeta["d"], dmeta["hidden"], params=params,
                                seed=dmeta.get("seed", 0))
    elif kind == "analytic":
        mu = dten[0]
        den = AnalyticGaussianDenoiser(float(mu.ravel()[0]) if mu.size == 1 else mu,
                                       dmeta["sigma0_sq"], sched)
    elif kind == "zero":
        den = ZeroDenoiser(op)
    else:
        raise FormatError(f"unknown denoiser kind {kind!r}")
    emeta = _read_json(os.path.join(directory, "encoder.json"))
    if emeta["kind"] == "pool":
        enc = PoolPyramidEncoder(emeta["shape"], emeta["d"])
    elif emeta["kind"] == "learned":
        w, b = read_tensors(os.path.join(directory, "encoder.waft"))
        enc = LearnedEncoder(emeta["shape"], emeta["d"], weight=w, bias=b.reshape(-1))
    else:
        raise FormatError(f"unknown encoder kind {emeta['kind']!r}")
    return ModelBundle(sched, den, enc, (2 * op[0], 2 * op[1]), s["ddim_steps"])


def save_latent_pair(pair, directory, meta=None):
    os.makedirs(directory, exist_ok=True)
    write_tensor(pair.semantic, os.path.join(directory, "semantic.waft"))
    write_tensor(pair.stochastic, os.path.join(directory, "stochastic.waft"))
    info = {"d": int(np.size(pair.semantic)),
            "operating_resolution": list(np.shape(pair.stochastic))}
    info.update(meta or {})
    write_json(info, os.path.join(directory, "latent.json"))


def load_latent_pair(directory):
    info = _read_json(os.path.join(directory, "latent.json"))
    sem = read_tensor(os.path.join(directory, "semantic.waft")).reshape(-1)
    sto = read_tensor(os.path.join(directory, "stochastic.waft"))
    if sem.size != info["d"] or list(sto.shape) != info["operating_resolution"]:
        raise FormatError(f"{directory}: latent tensors disagree with latent.json")
    return LatentPair(sem, sto), info
