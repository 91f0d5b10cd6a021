import json
import time

import numpy as np
import pytest

from wavemorph import _backend
from wavemorph.bundle import load_bundle
from wavemorph.cli import _read_dataset, main
from wavemorph.latent import preprocess_one
from wavemorph.pipeline import decode_pair, encode_plane, reconstruct
from wavemorph.study import ll_planes

ACCEPTANCE_LINES = []


@pytest.fixture(params=["python"] + (["compiled"] if _backend.compiled_kernels else []))
def backend(request):
    prev = _backend.BACKEND
    _backend.use_backend(request.param)
    yield request.param
    _backend.use_backend(prev)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def reference_run(tmp_path_factory):
    """Reference toy run driven through the CLI: dataset, training, vulnerability study."""
    root = tmp_path_factory.mktemp("reference")
    data, bundle, report = root / "data", root / "bundle", root / "report.json"
    assert main(["make-dataset", "--n", "64", "--size", "32", "--identities", "5",
                 "--seed", "7", "--out", str(data)]) == 0
    t0 = time.perf_counter()
    assert main(["train", "--data", str(data), "--out", str(bundle)]) == 0
    train_seconds = time.perf_counter() - t0
    assert main(["vulnerability", "--bundle", str(bundle), "--data", str(data),
                 "--out", str(report), "--svg", str(root / "roc.svg")]) == 0
    with open(report) as f:
        rep = json.load(f)
    loaded = load_bundle(bundle)
    images, _ = _read_dataset(str(data))
    roundtrip, recon = [], []
    for img, plane in zip(images, ll_planes(images, loaded.io_resolution)):
        back = decode_pair(encode_plane(plane, loaded), loaded)
        roundtrip.append(float(np.mean(np.abs(back - plane))))
        target = preprocess_one(img, loaded.io_resolution).image
        recon.append(float(np.mean(np.abs(reconstruct(img, loaded) - target))))
    losses = [float(line.split(",")[1]) for line in (bundle / "loss.csv").read_text().splitlines()[1:]]
    measured = {"first_epoch_loss": losses[0], "final_epoch_loss": losses[-1],
                "epochs": len(losses), "roundtrip_mae": float(np.mean(roundtrip)),
                "reconstruct_mae": float(np.mean(recon)),
                "eer_same_identity": rep["subsets"]["same_identity"]["eer"],
                "eer_distant_identity": rep["subsets"]["distant_identity"]["eer"]}
    return {"root": root, "data": data, "bundle": bundle, "loaded": loaded, "report": rep,
            "roc_csv": root / "report_roc.csv", "train_seconds": train_seconds,
            "measured": measured}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
