"""Noise schedule, forward noising and deterministic DDIM sampling/inversion.

Step indices are 1-based: ``alpha_bars[0] == 1`` is the clean signal and
``alpha_bars[T]`` the most heavily noised level. A denoiser is any object with
``predict_noise(x_t, t, z_sem) -> array`` of ``x_t``'s shape.
"""
from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

from .errors import ContractError, DimensionError


class Denoiser(Protocol):
    def predict_noise(self, x_t: np.ndarray, t: int, z_sem: Optional[np.ndarray]) -> np.ndarray:
        ...


@dataclass(frozen=True)
class NoiseSchedule:
    betas: np.ndarray
    alpha_bars: np.ndarray
    beta_start: float
    beta_end: float

    @property
    def T(self):
        return len(self.betas)

    def to_dict(self):
        return {"T": self.T, "beta_start": self.beta_start, "beta_end": self.beta_end}


def make_schedule(T=100, beta_start=1e-4, beta_end=0.02):
    """Linearly spaced betas and their cumulative signal-retention products."""
    if int(T) != T or T < 1:
        raise ContractError(f"T must be a positive integer, got {T!r}")
    if not 0.0 < beta_start:
        raise ContractError(f"beta_start must be > 0, got {beta_start!r}")
    if not beta_start <= beta_end:
        raise ContractError(f"beta_end must be >= beta_start, got beta_end={beta_end!r}")
    if not beta_end < 1.0:
        raise ContractError(f"beta_end must be < 1, got {beta_end!r}")
    betas = np.linspace(beta_start, beta_end, int(T), dtype=np.float64)
    alpha_bars = np.empty(int(T) + 1, dtype=np.float64)
    alpha_bars[0] = 1.0
    running = 1.0
    for i, b in enumerate(betas, start=1):
        running = running * (1.0 - b)
        alpha_bars[i] = running
    betas.setflags(write=False)
    alpha_bars.setflags(write=False)
    return NoiseSchedule(betas, alpha_bars, float(beta_start), float(beta_end))


def _check_step(t, sched, lo=0):
    if int(t) != t or not lo <= t <= sched.T:
        raise ContractError(f"step t={t!r} outside [{lo}, {sched.T}]")
    return int(t)


def forward_noising(x0, t, eps, sched):
    """Sample from q(x_t | x_0) given the noise draw ``eps``."""
    t = _check_step(t, sched)
    x0 = np.asarray(x0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if x0.shape != eps.shape:
        raise DimensionError(f"x0 shape {x0.shape} does not match eps shape {eps.shape}")
    if t == 0:
        return x0.copy()
    ab = sched.alpha_bars[t]
    return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * eps


def _transfer(x, eps, ab_from, ab_to):
    # x0 estimate at ab_from, re-noised deterministically to ab_to
    x0_hat = (x - np.sqrt(1.0 - ab_from) * eps) / np.sqrt(ab_from)
    return np.sqrt(ab_to) * x0_hat + np.sqrt(1.0 - ab_to) * eps


def ddim_step(x_t, t, den, z_sem, sched, t_prev=None):
    """One deterministic (eta = 0) DDIM update from level ``t`` to ``t_prev``.

    ``t_prev`` defaults to ``t - 1``; strided samplers pass the next index of
    their sub-sequence.
    """
    t = _check_step(t, sched, lo=1)
    t_prev = t - 1 if t_prev is None else _check_step(t_prev, sched)
    if t_prev >= t:
        raise ContractError(f"t_prev={t_prev} must be below t={t}")
    x_t = np.asarray(x_t, dtype=np.float64)
    eps = np.asarray(den.predict_noise(x_t, t, z_sem), dtype=np.float64)
    return _transfer(x_t, eps, sched.alpha_bars[t], sched.alpha_bars[t_prev])


def step_indices(T, steps):
    """Uniform-stride increasing sub-sequence of {1..T} with ``steps`` entries ending at T."""
    if int(steps) != steps or steps < 1:
        raise ContractError(f"steps must be a positive integer, got {steps!r}")
    if steps > T:
        raise ContractError(f"steps={steps} exceeds schedule length T={T}")
    return [(k * T) // steps for k in range(1, int(steps) + 1)]


def ddim_decode(x_T, z_sem, den, sched, steps=None):
    """Run the DDIM recurrence from level T down to a clean estimate."""
    ts = step_indices(sched.T, sched.T if steps is None else steps)
    x = np.asarray(x_T, dtype=np.float64)
    for k in range(len(ts) - 1, -1, -1):
        x = ddim_step(x, ts[k], den, z_sem, sched, t_prev=ts[k - 1] if k else 0)
    return x


def ddim_encode(x0, z_sem, den, sched, steps=None):
    """Deterministic DDIM inversion of a clean signal into its level-T code.

    Moving from level ``s`` up to ``t`` uses the noise predicted for the
    current sample at the target level, ``den(x_s, t)``, so the denoiser is
    never queried at the clean level t = 0.
    """
    ts = step_indices(sched.T, sched.T if steps is None else steps)
    x = np.asarray(x0, dtype=np.float64)
    prev = 0
    for t in ts:
        eps = np.asarray(den.predict_noise(x, t, z_sem), dtype=np.float64)
        x = _transfer(x, eps, sched.alpha_bars[prev], sched.alpha_bars[t])
        prev = t
    return x


class ZeroDenoiser:
    """Predicts zero noise everywhere; DDIM then reduces to pure rescaling."""

    kind = "zero"

    def __init__(self, shape=None):
        self.shape = None if shape is None else tuple(shape)

    def predict_noise(self, x_t, t, z_sem=None):
        return np.zeros_like(np.asarray(x_t, dtype=np.float64))


@dataclass(frozen=True)
class AnalyticGaussianDenoiser:
    """MMSE noise predictor for data distributed as N(mu, sigma0_sq) per pixel."""

    mu: object
    sigma0_sq: float
    schedule: NoiseSchedule = field(repr=False)
    kind = "analytic"

    @property
    def shape(self):
        return np.shape(self.mu) or None

    def predict_x0(self, x_t, t):
        ab = self.schedule.alpha_bars[t]
        s = np.sqrt(ab)
        gain = s * self.sigma0_sq / (ab * self.sigma0_sq + 1.0 - ab)
        return self.mu + gain * (np.asarray(x_t, dtype=np.float64) - s * self.mu)

    def predict_noise(self, x_t, t, z_sem=None):
        ab = self.schedule.alpha_bars[t]
        x_t = np.asarray(x_t, dtype=np.float64)
        return (x_t - np.sqrt(ab) * self.predict_x0(x_t, t)) / np.sqrt(1.0 - ab)


def make_analytic_denoiser(mu, sigma0_sq, schedule):
    if not sigma0_sq > 0:
        raise ContractError(f"sigma0_sq must be > 0, got {sigma0_sq!r}")
    mu = np.asarray(mu, dtype=np.float64)
    return AnalyticGaussianDenoiser(mu if mu.ndim else float(mu), float(sigma0_sq), schedule)


class CountingDenoiser:
    """Wraps a denoiser and records every call (count and input shapes)."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = 0
        self.shapes = []

    def __getattr__(self, name):
        return getattr(self.inner, name)

    def predict_noise(self, x_t, t, z_sem=None):
        self.calls += 1
        self.shapes.append(np.shape(x_t))
        return self.inner.predict_noise(x_t, t, z_sem)
