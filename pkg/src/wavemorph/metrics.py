"""Image-quality and biometric vulnerability metrics.

Scores are similarities: a comparison is accepted iff ``score >= tau``.

* APCER(tau): fraction of attack scores >= tau (attacks accepted)
* BPCER(tau): fraction of bona fide scores < tau (genuine pairs rejected)

The ROC is sampled at -inf, the midpoints between consecutive distinct
scores, and +inf, which visits every distinct operating point exactly once.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ContractError, DimensionError
from .latent import resize_bilinear
from .wavelet import as_image

REPORT_TARGETS = (0.05, 0.10, 0.30)


# -- image quality ----------------------------------------------------------

def _pair(x, y):
    x = as_image(x, "x")
    y = as_image(y, "y")
    if x.shape != y.shape:
        raise DimensionError(f"image shapes differ: {x.shape} vs {y.shape}")
    return x, y


def _tiles(arr, win):
    h, w = arr.shape[:2]
    nh, nw = h // win, w // win
    arr = arr[: nh * win, : nw * win]
    return arr.reshape(nh, win, nw, win, -1).transpose(0, 2, 4, 1, 3).reshape(-1, win * win)


def ssim(x, y, k1=0.01, k2=0.03, peak=1.0, window=8):
    """Mean SSIM over non-overlapping ``window x window`` tiles (plain means).

    Images smaller than the window use a single tile spanning the shorter side.
    Channels are treated as separate tiles.
    """
    x, y = _pair(x, y)
    win = min(window, x.shape[0], x.shape[1])
    tx, ty = _tiles(x, win), _tiles(y, win)
    c1, c2 = (k1 * peak) ** 2, (k2 * peak) ** 2
    mx, my = tx.mean(axis=1), ty.mean(axis=1)
    dx, dy = tx - mx[:, None], ty - my[:, None]
    vx, vy = (dx * dx).mean(axis=1), (dy * dy).mean(axis=1)
    cxy = (dx * dy).mean(axis=1)
    num = (2.0 * mx * my + c1) * (2.0 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


def psnr(x, y, peak=1.0):
    """Peak signal-to-noise ratio in dB; identical images give ``inf``."""
    if not peak > 0:
        raise ContractError(f"peak must be > 0, got {peak!r}")
    x, y = _pair(x, y)
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


# -- score sets and ROC -----------------------------------------------------

@dataclass(frozen=True)
class ScoreSet:
    bonafide: np.ndarray
    attack: np.ndarray

    def __post_init__(self):
        for name in ("bonafide", "attack"):
            arr = np.asarray(getattr(self, name), dtype=np.float64).ravel()
            if arr.size == 0:
                raise ContractError(f"score set has no {name} scores")
            if not np.all(np.isfinite(arr)):
                raise ContractError(f"{name} scores must be finite")
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray
    attack_accepted: np.ndarray   # counts, attack >= tau
    bonafide_rejected: np.ndarray  # counts, bonafide < tau
    n_attack: int
    n_bonafide: int

    @property
    def apcer(self):
        return self.attack_accepted / self.n_attack

    @property
    def bpcer(self):
        return self.bonafide_rejected / self.n_bonafide

    def __len__(self):
        return len(self.thresholds)


def _midpoints(u):
    mids = u[:-1] + (u[1:] - u[:-1]) * 0.5
    # adjacent doubles: the midpoint can round down onto the lower score
    return np.where(mids > u[:-1], mids, u[1:])


def roc(s):
    """APCER/BPCER at every distinct operating point, ordered by threshold."""
    if not isinstance(s, ScoreSet):
        raise ContractError("roc expects a ScoreSet")
    att = np.sort(s.attack)
    bon = np.sort(s.bonafide)
    u = np.unique(np.concatenate([att, bon]))
    thr = np.concatenate([[-np.inf], _midpoints(u), [np.inf]])
    acc = len(att) - np.searchsorted(att, thr, side="left")
    rej = np.searchsorted(bon, thr, side="left")
    return RocCurve(thr, acc.astype(np.int64), rej.astype(np.int64), len(att), len(bon))


def _check_curve(c):
    if not isinstance(c, RocCurve) or len(c) < 2:
        raise ContractError("malformed ROC curve")
    a, b = c.attack_accepted, c.bonafide_rejected
    if (a[0], b[0], a[-1], b[-1]) != (c.n_attack, 0, 0, c.n_bonafide):
        raise ContractError("ROC curve endpoints must be (APCER, BPCER) = (1, 0) and (0, 1)")
    if np.any(np.diff(a) > 0) or np.any(np.diff(b) < 0) or np.any(np.diff(c.thresholds) <= 0):
        raise ContractError("ROC curve is not monotone in the threshold")


def auc(c):
    """Area under (1 - BPCER) versus APCER, i.e. the verifier's AUC.

    Equals P(bonafide > attack) + P(tie) / 2: 1.0 when every attack scores
    below every bona fide comparison, 0.5 for exchangeable scores. Lower
    values mean more effective attacks.
    """
    _check_curve(c)
    a = c.attack_accepted
    keep = c.n_bonafide - c.bonafide_rejected
    twice = int(np.sum((a[:-1] - a[1:]) * (keep[:-1] + keep[1:])))
    return twice / (2 * c.n_attack * c.n_bonafide)


def eer(s):
    """Equal error rate and its threshold.

    Picks the threshold minimizing |APCER - BPCER| (ties go to the lower
    threshold) and reports the mean of the two rates there.
    """
    c = roc(s)
    gap = np.abs(c.attack_accepted * c.n_bonafide - c.bonafide_rejected * c.n_attack)
    i = int(np.argmin(gap))
    rate = (c.attack_accepted[i] / c.n_attack + c.bonafide_rejected[i] / c.n_bonafide) / 2.0
    return float(rate), float(c.thresholds[i])


def _check_target(target):
    if not 0.0 < target < 1.0:
        raise ContractError(f"target rate must lie strictly inside (0, 1), got {target!r}")


def apcer_at_bpcer(s, target):
    """APCER at the lowest threshold whose BPCER reaches ``target``."""
    _check_target(target)
    c = roc(s)
    i = int(np.argmax(c.bpcer >= target))
    return float(c.apcer[i])


def bpcer_at_apcer(s, target):
    """BPCER at the highest threshold whose APCER still reaches ``target``."""
    _check_target(target)
    c = roc(s)
    i = len(c) - 1 - int(np.argmax(c.apcer[::-1] >= target))
    return float(c.bpcer[i])


@dataclass
class MetricReport:
    auc: float
    eer: float
    eer_threshold: float
    apcer_at_bpcer: dict = field(default_factory=dict)
    bpcer_at_apcer: dict = field(default_factory=dict)

    def to_dict(self):
        out = {"auc": self.auc, "eer": self.eer,
               "eer_threshold": self.eer_threshold if math.isfinite(self.eer_threshold) else None}
        for t in REPORT_TARGETS:
            out[f"apcer_at_bpcer_{round(t * 100)}"] = self.apcer_at_bpcer[t]
        for t in REPORT_TARGETS:
            out[f"bpcer_at_apcer_{round(t * 100)}"] = self.bpcer_at_apcer[t]
        return out


def metric_report(s):
    rate, thr = eer(s)
    return MetricReport(
        auc=auc(roc(s)), eer=rate, eer_threshold=thr,
        apcer_at_bpcer={t: apcer_at_bpcer(s, t) for t in REPORT_TARGETS},
        bpcer_at_apcer={t: bpcer_at_apcer(s, t) for t in REPORT_TARGETS},
    )


# -- embeddings -------------------------------------------------------------

class BaselineEmbedder:
    """Downsample to 8x8, remove the mean, scale to unit norm."""

    size = 8

    def embed(self, img):
        arr = as_image(img)
        if arr.ndim == 3:
            arr = arr.mean(axis=2)
        h, w = arr.shape
        if h < self.size or w < self.size:
            raise DimensionError(f"baseline embedder needs images of at least 8x8, got {h}x{w}")
        n = self.size
        if h % n == 0 and w % n == 0:
            small = arr.reshape(n, h // n, n, w // n).mean(axis=(1, 3))
        else:
            small = resize_bilinear(arr, (n, n))
        v = small.ravel() - small.mean()
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ContractError("cannot embed a constant image (zero-norm embedding)")
        return v / norm


def embedding_similarity(a, b, embedder=None):
    """Cosine similarity of the two embeddings."""
    embedder = embedder or BaselineEmbedder()
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"images to compare have different shapes: {a.shape} vs {b.shape}")
    ea, eb = embedder.embed(a), embedder.embed(b)
    cos = float(np.dot(ea, eb) / (np.linalg.norm(ea) * np.linalg.norm(eb)))
    return min(1.0, max(-1.0, cos))


def build_score_set(morphs, probes_a, probes_b, bonafide_pairs, embedder=None, reduce="min"):
    """Mated-morph attack scores against genuine comparison scores.

    Each attack score is the similarity between a morph and a probe of each
    contributing subject, reduced with ``min`` (the morph must pass against
    both subjects) or ``max``.
    """
    if reduce not in ("min", "max"):
        raise ContractError(f"reduce must be 'min' or 'max', got {reduce!r}")
    if len(morphs) == 0:
        raise ContractError("no morphs to score")
    if not len(morphs) == len(probes_a) == len(probes_b):
        raise ContractError(
            f"morphs ({len(morphs)}), probes_a ({len(probes_a)}) and probes_b "
            f"({len(probes_b)}) must have equal lengths")
    if len(bonafide_pairs) == 0:
        raise ContractError("no bona fide pairs to score")
    embedder = embedder or BaselineEmbedder()
    pick = min if reduce == "min" else max
    attack = [pick(embedding_similarity(m, pa, embedder), embedding_similarity(m, pb, embedder))
              for m, pa, pb in zip(morphs, probes_a, probes_b)]
    bonafide = [embedding_similarity(x, y, embedder) for x, y in bonafide_pairs]
    return ScoreSet(np.array(bonafide), np.array(attack))
