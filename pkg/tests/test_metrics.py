import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavemorph.errors import ContractError, DimensionError
from wavemorph.metrics import (BaselineEmbedder, ScoreSet, apcer_at_bpcer, auc, bpcer_at_apcer,
                               build_score_set, eer, embedding_similarity, metric_report, psnr,
                               roc, ssim)

import oracles

EX_BON, EX_ATT = [0.9, 0.8, 0.7, 0.6], [0.85, 0.75, 0.65, 0.1]


def S(b, a):
    return ScoreSet(np.array(b, dtype=float), np.array(a, dtype=float))


# -- image quality --------------------------------------------------------------

def test_ssim_values(rng):
    x = rng.random((16, 16))
    assert ssim(x, x) == 1.0
    assert ssim(np.full((16, 16), 0.5), np.full((16, 16), 0.25)) == pytest.approx(0.8000640, abs=1e-6)
    with pytest.raises(DimensionError):
        ssim(np.zeros((16, 16)), np.zeros((8, 8)))


def test_ssim_drops_with_noise(rng):
    x = rng.random((32, 32))
    assert ssim(x, x + 0.05 * rng.normal(size=x.shape)) > ssim(x, x + 0.3 * rng.normal(size=x.shape))


def test_psnr_values():
    x = np.zeros((8, 8))
    assert psnr(x, x + 0.1) == pytest.approx(20.0, abs=1e-9)
    assert psnr(x, x) == math.inf
    with pytest.raises(ContractError):
        psnr(x, x, peak=0)


# -- ROC and derived rates --------------------------------------------------------

def test_score_set_validation():
    with pytest.raises(ContractError, match="attack"):
        S([0.5], [])
    with pytest.raises(ContractError):
        S([0.5, math.nan], [0.1])


def test_roc_separable_has_perfect_point():
    c = roc(S([0.9, 0.8], [0.2, 0.1]))
    assert any(a == 0 and b == 0 for a, b in zip(c.apcer, c.bpcer))
    assert (c.apcer[0], c.bpcer[0], c.apcer[-1], c.bpcer[-1]) == (1.0, 0.0, 0.0, 1.0)
    assert c.thresholds[0] == -math.inf and c.thresholds[-1] == math.inf


def test_roc_adjacent_doubles():
    lo = 0.5
    hi = np.nextafter(lo, 1.0)
    c = roc(S([hi], [lo]))
    assert np.all(np.diff(c.thresholds) > 0)
    assert auc(c) == 1.0


def test_auc_examples():
    assert auc(roc(S([0.9, 0.8], [0.2, 0.1]))) == 1.0
    assert auc(roc(S([0.3, 0.5, 0.7], [0.7, 0.5, 0.3]))) == 0.5


def test_eer_examples():
    assert eer(S([0.9, 0.8, 0.7], [0.6, 0.5, 0.4]))[0] == 0.0
    rate, thr = eer(S([0.9, 0.8, 0.4], [0.7, 0.3, 0.2]))
    assert rate == pytest.approx(1 / 3, abs=1e-12)
    assert 0.4 < thr <= 0.7
    assert eer(S([0.5], [0.5]))[0] == 0.5


def test_rate_at_target_examples():
    s = S(EX_BON, EX_ATT)
    assert apcer_at_bpcer(s, 0.25) == 0.75
    assert bpcer_at_apcer(s, 0.25) == float(oracles.bpcer_at_apcer_sweep(EX_BON, EX_ATT, 0.25))
    sep = S([0.9, 0.8], [0.2, 0.1])
    for t in (0.05, 0.5, 0.95):
        assert apcer_at_bpcer(sep, t) == 0.0
        assert bpcer_at_apcer(sep, t) == 0.0
    with pytest.raises(ContractError):
        apcer_at_bpcer(s, 0.0)
    with pytest.raises(ContractError):
        bpcer_at_apcer(s, 1.0)


def test_matches_oracle_on_random_sets():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        b, a = oracles.random_score_set(rng)
        s = S(b, a)
        assert auc(roc(s)) == pytest.approx(float(oracles.auc_pairs(b, a)), abs=1e-12)
        assert eer(s)[0] == pytest.approx(float(oracles.eer_sweep(b, a)), abs=1e-12)
        for t in (0.05, 0.1, 0.3, 0.5):
            assert apcer_at_bpcer(s, t) == pytest.approx(float(oracles.apcer_at_bpcer_sweep(b, a, t)), abs=1e-12)
            assert bpcer_at_apcer(s, t) == pytest.approx(float(oracles.bpcer_at_apcer_sweep(b, a, t)), abs=1e-12)


def test_roc_points_match_oracle_sweep():
    rng = np.random.default_rng(8)
    for _ in range(30):
        b, a = oracles.random_score_set(rng, 20)
        c = roc(S(b, a))
        ours = sorted(set(zip(c.apcer.tolist(), c.bpcer.tolist())))
        ref = sorted({(float(x), float(y)) for _, x, y in oracles.sweep(b, a)})
        assert ours == ref


scores = st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=30)


@settings(max_examples=80, deadline=None)
@given(scores, scores)
def test_curve_invariants(b, a):
    s = S(b, a)
    c = roc(s)
    assert np.all(np.diff(c.apcer) <= 0) and np.all(np.diff(c.bpcer) >= 0)
    assert 0.0 <= auc(c) <= 1.0
    rate, _ = eer(s)
    assert 0.0 <= rate <= 1.0
    rep = metric_report(s).to_dict()
    assert all(0.0 <= rep[k] <= 1.0 for k in rep if k != "eer_threshold")


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 10 ** 6), min_size=2, max_size=40, unique=True), st.data())
def test_eer_half_gap_bound_without_ties(values, data):
    # with no tied scores the two rates at the EER point differ by at most one step
    k = data.draw(st.integers(1, len(values) - 1))
    b, a = values[:k], values[k:]
    s = S(b, a)
    c = roc(s)
    gap = np.abs(c.apcer - c.bpcer).min()
    assert gap <= 1.0 / len(a) + 1.0 / len(b) + 1e-12


def test_report_keys_and_null_threshold():
    d = metric_report(S([0.5], [0.5])).to_dict()
    assert set(d) == {"auc", "eer", "eer_threshold", "apcer_at_bpcer_5", "apcer_at_bpcer_10",
                      "apcer_at_bpcer_30", "bpcer_at_apcer_5", "bpcer_at_apcer_10", "bpcer_at_apcer_30"}
    rev = metric_report(S([0.1, 0.2], [0.8, 0.9])).to_dict()
    assert rev["eer"] == 1.0 and rev["auc"] == 0.0


# -- embeddings and score sets ------------------------------------------------------

def test_similarity_properties(rng):
    x, y = rng.random((16, 16)), rng.random((16, 16))
    assert embedding_similarity(x, x) == pytest.approx(1.0, abs=1e-12)
    assert embedding_similarity(x, y) == embedding_similarity(y, x)
    h = np.tile(np.repeat([0.0, 1.0], 4), (8, 1))
    assert embedding_similarity(h, h.T) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ContractError):
        BaselineEmbedder().embed(np.ones((8, 8)))


def test_build_score_set(rng):
    m = rng.random((16, 16))
    s = build_score_set([m], [m], [m], [(m, rng.random((16, 16)))])
    assert s.attack[0] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ContractError):
        build_score_set([], [], [], [(m, m)])
    with pytest.raises(ContractError):
        build_score_set([m], [m], [m, m], [(m, m)])
