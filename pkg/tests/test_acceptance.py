"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary
(run ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``).
"""
import contextlib
import csv
import json
import math
import os
import sys
import time

import numpy as np
import pytest

from wavemorph import _backend
from wavemorph.diffusion import CountingDenoiser, ZeroDenoiser, ddim_decode, ddim_step, make_schedule
from wavemorph.latent import PoolPyramidEncoder, preprocess_one, slerp
from wavemorph.metrics import ScoreSet, apcer_at_bpcer, auc, bpcer_at_apcer, eer, roc, ssim
from wavemorph.pipeline import ModelBundle, MorphRequest, wavelet_morph, zero_bundle
from wavemorph.wavelet import dwt_haar, iwt_haar

import oracles
from conftest import ACCEPTANCE_LINES

FIXTURE = os.path.join(os.path.dirname(__file__), "fixtures", "reference_run.json")


@contextlib.contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"FAIL  criterion {number}: {title} ({type(exc).__name__}: {exc})"[:300])
        raise
    ACCEPTANCE_LINES.append(f"PASS  criterion {number}: {title}")


def _wavelet_sweep(seed):
    rng = np.random.default_rng(seed)
    worst_rt = worst_energy = 0.0
    for _ in range(1000):
        h, w = (2 * rng.integers(1, 33, size=2)).tolist()
        x = rng.normal(size=(h, w))
        bands = dwt_haar(x)
        worst_rt = max(worst_rt, float(np.abs(iwt_haar(bands) - x).max()))
        e_in = float(np.sum(x * x))
        e_out = sum(float(np.sum(p * p)) for p in bands)
        worst_energy = max(worst_energy, abs(e_out - e_in) / e_in)
    return worst_rt, worst_energy


def test_c1_wavelet_exactness():
    with criterion(1, "wavelet exactness over 1000 random images, < 5 s"):
        prev = _backend.BACKEND
        names = ["python"] + (["compiled"] if _backend.compiled_kernels else [])
        try:
            for name in names:
                _backend.use_backend(name)
                t0 = time.perf_counter()
                rt, energy = _wavelet_sweep(0)
                elapsed = time.perf_counter() - t0
                assert rt <= 1e-10, f"{name}: round trip error {rt}"
                assert energy <= 1e-9, f"{name}: energy error {energy}"
                assert elapsed < 5.0, f"{name}: {elapsed:.2f} s"
        finally:
            _backend.use_backend(prev)


def test_c2_golden_values():
    with criterion(2, "hand-derived golden values to 1e-6"):
        b = dwt_haar(np.array([[1.0, 2.0], [3.0, 4.0]]))
        got = [b.ll[0, 0], b.lh[0, 0], b.hl[0, 0], b.hh[0, 0]]
        np.testing.assert_allclose(got, [5.0, -1.0, -2.0, 0.0], atol=1e-6)
        small = make_schedule(2, 0.1, 0.2)
        assert abs(ddim_step(np.array(3.0), 2, ZeroDenoiser(), None, small) - 3.3541020) <= 1e-6
        assert abs(ddim_decode(np.array(1.0), None, ZeroDenoiser(), small) - 1.1785113) <= 1e-6
        np.testing.assert_allclose(slerp(np.array([1.0, 0.0]), np.array([0.0, 1.0]), 0.5),
                                   [0.7071068, 0.7071068], atol=1e-6)
        assert abs(ssim(np.full((16, 16), 0.5), np.full((16, 16), 0.25)) - 0.8000640) <= 1e-6
        rate, _ = eer(ScoreSet(np.array([0.9, 0.8, 0.4]), np.array([0.7, 0.3, 0.2])))
        assert abs(rate - 1 / 3) <= 1e-6


def test_c3_zero_denoiser_identity():
    with criterion(3, "zero-denoiser identity morph for 50 images x 4 gammas"):
        rng = np.random.default_rng(3)
        bundle = zero_bundle()
        worst = 0.0
        for _ in range(50):
            a = rng.random((32, 32))
            target = preprocess_one(a, (32, 32)).image
            for g in (0.0, 0.25, 0.5, 1.0):
                worst = max(worst, float(np.abs(wavelet_morph(MorphRequest(a, a, g), bundle) - target).max()))
        assert worst <= 1e-10, worst


def test_c4_metric_oracle_equivalence():
    with criterion(4, "metrics equal brute-force oracles on 200 score sets; ROC monotone"):
        rng = np.random.default_rng(4)
        for _ in range(200):
            b, a = oracles.random_score_set(rng, 50)
            s = ScoreSet(np.array(b), np.array(a))
            c = roc(s)
            assert np.all(np.diff(c.thresholds) > 0)
            assert np.all(np.diff(c.apcer) <= 0) and np.all(np.diff(c.bpcer) >= 0)
            assert abs(auc(c) - float(oracles.auc_pairs(b, a))) <= 1e-12
            assert abs(eer(s)[0] - float(oracles.eer_sweep(b, a))) <= 1e-12
            for t in (0.05, 0.1, 0.3):
                assert abs(apcer_at_bpcer(s, t) - float(oracles.apcer_at_bpcer_sweep(b, a, t))) <= 1e-12
                assert abs(bpcer_at_apcer(s, t) - float(oracles.bpcer_at_apcer_sweep(b, a, t))) <= 1e-12


def test_c5_gradient_check():
    with criterion(5, "hand gradients match central differences on 5 configs, < 30 s"):
        t0 = time.perf_counter()
        errors = [oracles.gradcheck_case(*case) for case in oracles.GRADCHECK_CONFIGS]
        elapsed = time.perf_counter() - t0
        assert max(errors) < 1e-4, errors
        assert elapsed < 30.0, elapsed


def test_c6_reference_training_run(reference_run):
    m = reference_run["measured"]
    with criterion(6, "reference run: loss falls, round trip < 0.05, reconstruct < 0.05, < 10 min"):
        assert m["epochs"] == 200
        assert m["final_epoch_loss"] < m["first_epoch_loss"]
        assert m["roundtrip_mae"] < 0.05, m["roundtrip_mae"]
        assert m["reconstruct_mae"] < 0.05, m["reconstruct_mae"]
        assert reference_run["train_seconds"] < 600.0
        assert reference_run["loaded"].operating_resolution == (16, 16)


def test_c7_resolution_contract(reference_run):
    with criterion(7, "32x32 in, 32x32 out, diffusion at 16x16"):
        ref = reference_run["loaded"]
        den = CountingDenoiser(ref.denoiser)
        bundle = ModelBundle(ref.schedule, den, ref.encoder, ref.io_resolution, ref.ddim_steps)
        rng = np.random.default_rng(7)
        out = wavelet_morph(MorphRequest(rng.random((32, 32)), rng.random((32, 32))), bundle)
        assert ref.io_resolution == (32, 32)
        assert out.shape == (32, 32)
        assert den.calls > 0 and set(den.shapes) == {(16, 16)}


def test_c8_ablation_evaluation_count(reference_run):
    with criterion(8, "all_subbands uses >= 3.5x the denoiser evaluations of ll_only"):
        ref = reference_run["loaded"]
        rng = np.random.default_rng(8)
        a, b = rng.random((32, 32)), rng.random((32, 32))
        counts = {}
        for mode in ("ll_only", "all_subbands"):
            den = CountingDenoiser(ref.denoiser)
            bundle = ModelBundle(ref.schedule, den, ref.encoder, ref.io_resolution, ref.ddim_steps)
            out = wavelet_morph(MorphRequest(a, b, 0.5, mode), bundle)
            assert out.shape == (32, 32) and np.all(np.isfinite(out))
            counts[mode] = den.calls
        assert counts["all_subbands"] >= 3.5 * counts["ll_only"], counts


def test_c9_vulnerability_study(reference_run):
    with criterion(9, "vulnerability report rates in [0,1], ROC monotone, same-identity EER > distant"):
        rep = reference_run["report"]
        rate_keys = ["auc", "eer"] + [k for k in rep if k.startswith(("apcer_at", "bpcer_at"))]
        assert len(rate_keys) == 8
        for block in [rep] + list(rep["subsets"].values()):
            for k in rate_keys:
                assert 0.0 <= block[k] <= 1.0, (k, block[k])
        with open(reference_run["roc_csv"], newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["threshold", "apcer", "bpcer"]
        data = np.array([[float(x) for x in r] for r in rows[1:]])
        assert np.all(np.diff(data[:, 0]) > 0)
        assert np.all(np.diff(data[:, 1]) <= 0) and np.all(np.diff(data[:, 2]) >= 0)
        assert rep["subsets"]["same_identity"]["eer"] > rep["subsets"]["distant_identity"]["eer"]


def test_reference_run_regression(reference_run):
    """Measured reference values stay where they were first recorded."""
    measured = reference_run["measured"]
    if os.environ.get("WAVEMORPH_RECORD_FIXTURES") or not os.path.exists(FIXTURE):
        with open(FIXTURE, "w") as f:
            json.dump(measured, f, indent=2)
            f.write("\n")
        pytest.skip("reference fixture recorded")
    with open(FIXTURE) as f:
        recorded = json.load(f)
    assert set(recorded) == set(measured)
    for k, v in recorded.items():
        assert math.isclose(measured[k], v, rel_tol=1e-6, abs_tol=1e-9), (k, measured[k], v)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
