"""Higher-level workflows: bundle training and the toy vulnerability study."""
from dataclasses import dataclass, replace
import itertools

import numpy as np

from .errors import ContractError
from .latent import make_encoder, preprocess_one
from .metrics import BaselineEmbedder, build_score_set, metric_report, roc
from .pipeline import ModelBundle, MorphRequest, batch_morph
from .training import train_denoiser
from .wavelet import dwt_haar


def ll_planes(images, io_resolution):
    """Preprocess images to ``io_resolution`` and return their LL planes."""
    return [dwt_haar(preprocess_one(img, io_resolution).image).ll for img in images]


def train_bundle(images, io_resolution, schedule, train_cfg, encoder="pool", d=32, ddim_steps=100):
    """Train a denoiser on the LL planes of ``images``; returns ``(bundle, loss_trace)``."""
    planes = ll_planes(images, io_resolution)
    enc = make_encoder(encoder, planes[0].shape, d, seed=train_cfg.seed)
    den, trace = train_denoiser(planes, enc, replace(train_cfg, schedule=schedule))
    bundle = ModelBundle(schedule, den, den.trained_encoder, tuple(io_resolution), ddim_steps)
    return bundle, trace


@dataclass
class VulnerabilityResult:
    report: dict
    curve: object
    scores: object
    subsets: dict


def _by_identity(labels):
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    return groups


def _morph_set(pairs, probes, images, bundle, gamma, mode):
    reqs = [MorphRequest(images[i], images[j], gamma, mode) for i, j in pairs]
    morphs = batch_morph(reqs, bundle)
    return morphs, [images[p] for p, _ in probes], [images[q] for _, q in probes]


def run_vulnerability(images, labels, bundle, morphs_per_pair=3, same_per_identity=3,
                      distant_morphs=8, gamma=0.5, mode="ll_only", embedder=None):
    """Generate morphs, score them against contributing-subject probes, report metrics.

    Three attack sets share one bona fide set (all within-identity pairs):

    * ``all``: morphs of every pair of distinct identities (the headline report)
    * ``same_identity``: morphs of two images of the same identity
    * ``distant_identity``: morphs of the two identities whose mean embeddings
      are farthest apart

    Probes are other images of the contributing identities, never the morph
    inputs themselves.
    """
    embedder = embedder or BaselineEmbedder()
    images = [preprocess_one(img, bundle.io_resolution).image for img in images]
    groups = _by_identity(labels)
    ids = sorted(groups)
    usable = [k for k in ids if len(groups[k]) >= 4]
    if len(usable) < 2:
        raise ContractError("vulnerability study needs at least two identities with >= 4 images each")

    bonafide_pairs = [(images[i], images[j]) for k in usable
                      for i, j in itertools.combinations(groups[k], 2)]

    def cross(ka, kb, count):
        ga, gb = groups[ka], groups[kb]
        pairs, probes = [], []
        for m in range(count):
            ia, ib = ga[m % len(ga)], gb[m % len(gb)]
            pa, pb = ga[(m + 1) % len(ga)], gb[(m + 1) % len(gb)]
            pairs.append((ia, ib))
            probes.append((pa, pb))
        return pairs, probes

    def within(k, count):
        g = groups[k]
        pairs, probes = [], []
        for m in range(count):
            i0 = (4 * m) % len(g)
            pairs.append((g[i0], g[(i0 + 1) % len(g)]))
            probes.append((g[(i0 + 2) % len(g)], g[(i0 + 3) % len(g)]))
        return pairs, probes

    centroids = {k: np.mean([embedder.embed(images[i]) for i in groups[k]], axis=0) for k in usable}

    def _cos(u, v):
        return float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))

    distant = min(itertools.combinations(usable, 2), key=lambda p: _cos(centroids[p[0]], centroids[p[1]]))

    plans = {"all": ([], []), "same_identity": ([], []), "distant_identity": cross(*distant, distant_morphs)}
    for ka, kb in itertools.combinations(usable, 2):
        p, q = cross(ka, kb, morphs_per_pair)
        plans["all"][0].extend(p)
        plans["all"][1].extend(q)
    for k in usable:
        p, q = within(k, same_per_identity)
        plans["same_identity"][0].extend(p)
        plans["same_identity"][1].extend(q)

    subsets, scores_all = {}, None
    for name, (pairs, probes) in plans.items():
        morphs, pa, pb = _morph_set(pairs, probes, images, bundle, gamma, mode)
        scores = build_score_set(morphs, pa, pb, bonafide_pairs, embedder)
        subsets[name] = metric_report(scores).to_dict()
        subsets[name]["n_attack"] = len(morphs)
        if name == "all":
            scores_all = scores
    report = dict(subsets["all"])
    report["n_bonafide"] = len(bonafide_pairs)
    report["subsets"] = {k: v for k, v in subsets.items() if k != "all"}
    report["distant_pair"] = [int(distant[0]), int(distant[1])]
    return VulnerabilityResult(report, roc(scores_all), scores_all, subsets)
