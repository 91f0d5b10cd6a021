"""Small conditional noise predictor and its training loop.

The network is a two-hidden-layer tanh MLP over
``[flatten(x_t), time_embedding(t), z_sem]``. Gradients are derived by hand
(see :func:`loss_and_grads`) and checked against finite differences in the
test suite.
"""
from dataclasses import dataclass
import logging
from typing import Optional

import numpy as np

from .diffusion import NoiseSchedule, make_schedule
from .errors import ContractError, DimensionError
from .latent import LearnedEncoder

log = logging.getLogger(__name__)

TIME_DIM = 16
PARAM_NAMES = ("W1", "b1", "W2", "b2", "W3", "b3")


def time_embedding(t, dim=TIME_DIM):
    """Sinusoidal embedding of integer step(s) ``t``; returns (len(t), dim)."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    half = dim // 2
    freqs = np.exp(-np.log(10000.0) * np.arange(half) / half)
    args = t[:, None] * freqs[None, :]
    return np.concatenate([np.sin(args), np.cos(args)], axis=1)


def init_params(n_pixels, d, hidden, rng):
    n_in = n_pixels + TIME_DIM + d
    params = {}
    for i, (fan_in, fan_out) in enumerate([(n_in, hidden), (hidden, hidden), (hidden, n_pixels)], start=1):
        bound = 1.0 / np.sqrt(fan_in)
        params[f"W{i}"] = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        params[f"b{i}"] = rng.uniform(-bound, bound, size=fan_out)
    return params


def _forward(params, x, temb, z):
    h0 = np.concatenate([x, temb, z], axis=1)
    h1 = np.tanh(h0 @ params["W1"].T + params["b1"])
    h2 = np.tanh(h1 @ params["W2"].T + params["b2"])
    out = h2 @ params["W3"].T + params["b3"]
    return out, (h0, h1, h2)


class TrainableDenoiser:
    """Feed-forward epsilon predictor for images of a fixed ``shape``."""

    kind = "mlp"

    def __init__(self, shape, d, hidden=128, params=None, seed=0):
        self.shape = tuple(int(s) for s in shape)
        self.d = int(d)
        self.hidden = int(hidden)
        self.seed = seed
        self.n_pixels = self.shape[0] * self.shape[1]
        if params is None:
            params = init_params(self.n_pixels, self.d, self.hidden, np.random.default_rng(seed))
        self.params = {k: np.array(params[k], dtype=np.float64) for k in PARAM_NAMES}
        expect = init_shapes(self.n_pixels, self.d, self.hidden)
        for k in PARAM_NAMES:
            if self.params[k].shape != expect[k]:
                raise DimensionError(f"parameter {k} has shape {self.params[k].shape}, expected {expect[k]}")

    @property
    def n_params(self):
        return int(sum(p.size for p in self.params.values()))

    def _z(self, z_sem, batch):
        if self.d == 0:
            return np.zeros((batch, 0))
        if z_sem is None:
            raise ContractError(f"denoiser expects a {self.d}-value semantic code, got none")
        z = np.asarray(z_sem, dtype=np.float64).reshape(batch, -1)
        if z.shape[1] != self.d:
            raise DimensionError(f"semantic code has {z.shape[1]} values, denoiser expects {self.d}")
        return z

    def predict_noise(self, x_t, t, z_sem=None):
        x = np.asarray(x_t, dtype=np.float64)
        if x.shape != self.shape:
            raise DimensionError(f"denoiser built for {self.shape}, got input of shape {x.shape}")
        out, _ = _forward(self.params, x.reshape(1, -1), time_embedding([t]), self._z(z_sem, 1))
        return out.reshape(self.shape)

    def to_meta(self):
        return {"kind": self.kind, "shape": list(self.shape), "d": self.d,
                "hidden": self.hidden, "time_dim": TIME_DIM, "seed": self.seed,
                "n_params": self.n_params}


def init_shapes(n_pixels, d, hidden):
    n_in = n_pixels + TIME_DIM + d
    return {"W1": (hidden, n_in), "b1": (hidden,), "W2": (hidden, hidden), "b2": (hidden,),
            "W3": (n_pixels, hidden), "b3": (n_pixels,)}


def loss_and_grads(params, x_t, t, z, eps, encoder_params=None, x0=None):
    """Mean squared noise-prediction error and its gradients.

    ``x_t``, ``eps`` are (batch, n_pixels); ``t`` is (batch,). When
    ``encoder_params`` (``weight``, ``bias``) is given, ``z`` is ignored and
    recomputed as ``tanh(x0 W^T + b)`` so the encoder receives gradients too.
    """
    if encoder_params is not None:
        z = np.tanh(x0 @ encoder_params["weight"].T + encoder_params["bias"])
    out, (h0, h1, h2) = _forward(params, x_t, time_embedding(t), z)
    diff = out - eps
    loss = float(np.mean(diff * diff))
    g_out = 2.0 * diff / diff.size
    grads = {"W3": g_out.T @ h2, "b3": g_out.sum(axis=0)}
    g_a2 = (g_out @ params["W3"]) * (1.0 - h2 * h2)
    grads["W2"] = g_a2.T @ h1
    grads["b2"] = g_a2.sum(axis=0)
    g_a1 = (g_a2 @ params["W2"]) * (1.0 - h1 * h1)
    grads["W1"] = g_a1.T @ h0
    grads["b1"] = g_a1.sum(axis=0)
    enc_grads = None
    if encoder_params is not None:
        g_z = (g_a1 @ params["W1"])[:, x_t.shape[1] + TIME_DIM:]
        g_pre = g_z * (1.0 - z * z)
        enc_grads = {"weight": g_pre.T @ x0, "bias": g_pre.sum(axis=0)}
    return loss, grads, enc_grads


class Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m, self.v, self.step_count = {}, {}, 0

    def update(self, params, grads):
        self.step_count += 1
        c1 = 1.0 - self.beta1 ** self.step_count
        c2 = 1.0 - self.beta2 ** self.step_count
        for k, g in grads.items():
            m = self.m.get(k, 0.0) * self.beta1 + (1.0 - self.beta1) * g
            v = self.v.get(k, 0.0) * self.beta2 + (1.0 - self.beta2) * g * g
            self.m[k], self.v[k] = m, v
            params[k] = params[k] - self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class SGD:
    def __init__(self, lr):
        self.lr = lr

    def update(self, params, grads):
        for k, g in grads.items():
            params[k] = params[k] - self.lr * g


@dataclass
class TrainConfig:
    epochs: int = 200
    batch_size: int = 16
    learning_rate: float = 1e-3
    seed: int = 7
    schedule: Optional[NoiseSchedule] = None
    optimizer: str = "adam"
    hidden: int = 128
    draws: int = 4  # (t, eps) draws per image per epoch

    def validate(self):
        if int(self.epochs) != self.epochs or self.epochs < 0:
            raise ContractError(f"epochs must be a non-negative integer, got {self.epochs!r}")
        if not self.learning_rate > 0:
            raise ContractError(f"learning_rate must be > 0, got {self.learning_rate!r}")
        if self.batch_size < 1 or self.draws < 1 or self.hidden < 1:
            raise ContractError("batch_size, draws and hidden must all be >= 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ContractError(f"optimizer must be 'adam' or 'sgd', got {self.optimizer!r}")


def _stack_dataset(dataset):
    if len(dataset) == 0:
        raise ContractError("training dataset is empty")
    arrays = [np.asarray(x, dtype=np.float64) for x in dataset]
    shape = arrays[0].shape
    if len(shape) != 2:
        raise DimensionError(f"training images must be 2-D planes, got shape {shape}")
    for i, a in enumerate(arrays):
        if a.shape != shape:
            raise DimensionError(f"image {i} has shape {a.shape}, expected {shape}")
    return shape, np.stack([a.ravel() for a in arrays])


def train_denoiser(dataset, encoder, cfg):
    """Fit a :class:`TrainableDenoiser` to ``dataset`` by noise regression.

    Returns ``(denoiser, loss_trace)`` with one mean loss per epoch. With a
    :class:`~wavemorph.latent.LearnedEncoder` the encoder is optimized jointly
    and the trained copy is exposed as ``denoiser.trained_encoder``.
    """
    cfg.validate()
    shape, data = _stack_dataset(dataset)
    sched = cfg.schedule if cfg.schedule is not None else make_schedule()
    if tuple(encoder.shape) != shape:
        raise DimensionError(f"encoder built for {tuple(encoder.shape)}, dataset images are {shape}")
    rng = np.random.default_rng(cfg.seed)
    den = TrainableDenoiser(shape, encoder.d, cfg.hidden, seed=cfg.seed)
    learned = isinstance(encoder, LearnedEncoder)
    enc_params = {k: v.copy() for k, v in encoder.params().items()} if learned else None
    codes = None if learned else np.stack([encoder.encode(x.reshape(shape)) for x in data])
    den.trained_encoder = encoder
    trace = []
    if cfg.epochs == 0:
        return den, trace

    opt = Adam(cfg.learning_rate) if cfg.optimizer == "adam" else SGD(cfg.learning_rate)
    enc_opt = (Adam(cfg.learning_rate) if cfg.optimizer == "adam" else SGD(cfg.learning_rate)) if learned else None
    params = den.params
    sqrt_ab = np.sqrt(sched.alpha_bars)
    sqrt_1m = np.sqrt(1.0 - sched.alpha_bars)
    idx_all = np.repeat(np.arange(len(data)), cfg.draws)
    for epoch in range(int(cfg.epochs)):
        order = rng.permutation(idx_all)
        total, count = 0.0, 0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            x0 = data[idx]
            t = rng.integers(1, sched.T + 1, size=len(idx))
            eps = rng.standard_normal(x0.shape)
            x_t = sqrt_ab[t, None] * x0 + sqrt_1m[t, None] * eps
            z = None if learned else codes[idx]
            loss, grads, enc_grads = loss_and_grads(params, x_t, t, z, eps, enc_params, x0)
            opt.update(params, grads)
            if learned:
                enc_opt.update(enc_params, enc_grads)
            total += loss * len(idx)
            count += len(idx)
        trace.append(total / count)
        log.debug("epoch %d loss %.6f", epoch, trace[-1])
    if learned:
        den.trained_encoder = encoder.with_params(enc_params["weight"], enc_params["bias"])
    return den, trace
