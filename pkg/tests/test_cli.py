import json
import subprocess
import sys

import numpy as np
import pytest

from wavemorph.cli import main
from wavemorph.formats import read_pgm, read_roc, read_tensor, write_pgm

SMALL_CFG = {"io_resolution": [16, 16], "ddim_steps": 10, "semantic_dim": 4,
             "schedule": {"T": 20}, "train": {"epochs": 3, "hidden": 8}}


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "run.json"
    cfg.write_text(json.dumps(SMALL_CFG))
    assert main(["make-dataset", "--n", "20", "--size", "16", "--identities", "4",
                 "--seed", "3", "--out", str(root / "data")]) == 0
    assert main(["train", "--config", str(cfg), "--data", str(root / "data"),
                 "--out", str(root / "bundle")]) == 0
    return root


def test_make_dataset_layout(small_run):
    lines = (small_run / "data" / "labels.csv").read_text().splitlines()
    assert lines[0] == "file,identity" and len(lines) == 21
    assert lines[1] == "sample_0000.pgm,0" and lines[5] == "sample_0004.pgm,0"
    assert read_pgm(small_run / "data" / "sample_0000.pgm").shape == (16, 16)


def test_train_outputs_and_log(small_run):
    b = small_run / "bundle"
    for name in ("schedule.json", "denoiser.waft", "denoiser.json", "encoder.waft",
                 "encoder.json", "loss.csv", "run_log.json"):
        assert (b / name).exists(), name
    loss = (b / "loss.csv").read_text().splitlines()
    assert loss[0] == "epoch,loss" and len(loss) == 4
    log = json.loads((b / "run_log.json").read_text())
    assert log["config"]["train"]["batch_size"] == 16  # defaults echoed
    assert log["seed"] == 7 and "waft" in log["format_versions"] and log["package_version"]


def test_train_reproducible_from_log(small_run, tmp_path):
    log = json.loads((small_run / "bundle" / "run_log.json").read_text())
    cfg = tmp_path / "echo.json"
    cfg.write_text(json.dumps(log["config"]))
    assert main(["train", "--config", str(cfg), "--data", str(small_run / "data"),
                 "--out", str(tmp_path / "again")]) == 0
    for name in ("denoiser.waft", "encoder.waft", "loss.csv", "schedule.json"):
        assert (tmp_path / "again" / name).read_bytes() == (small_run / "bundle" / name).read_bytes()


def test_decompose_reconstruct(tmp_path, rng):
    x = rng.random((8, 6))
    write_pgm(x, tmp_path / "in.pgm")
    assert main(["decompose", str(tmp_path / "in.pgm"), "--out", str(tmp_path / "sb")]) == 0
    assert read_tensor(tmp_path / "sb" / "ll.waft").shape == (4, 3)
    assert (tmp_path / "sb" / "run_log.json").exists()
    assert main(["reconstruct", str(tmp_path / "sb"), "--out", str(tmp_path / "out.pgm")]) == 0
    np.testing.assert_array_equal(read_pgm(tmp_path / "out.pgm"), read_pgm(tmp_path / "in.pgm"))
    assert (tmp_path / "out.pgm.log.json").exists()


def test_morph_and_batch(small_run, tmp_path):
    data = small_run / "data"
    a, b = str(data / "sample_0000.pgm"), str(data / "sample_0001.pgm")
    out = tmp_path / "m.pgm"
    for mode in ("ll", "all"):
        assert main(["morph", a, b, "--bundle", str(small_run / "bundle"), "--mode", mode,
                     "--gamma", "0.4", "--out", str(out)]) == 0
        assert read_pgm(out).shape == (16, 16)
    man = tmp_path / "manifest.csv"
    man.write_text(f"{a},{b},0.4,out/one.pgm\n{b},{a},0.6,out/two.pgm\n")
    assert main(["batch-morph", "--manifest", str(man), "--bundle", str(small_run / "bundle")]) == 0
    assert read_pgm(tmp_path / "out" / "one.pgm").shape == (16, 16)
    assert (tmp_path / "out" / "two.pgm").exists()


def test_evaluate(tmp_path):
    s = tmp_path / "s.csv"
    s.write_text("label,score\nbonafide,0.9\nbonafide,0.8\nbonafide,0.4\nattack,0.7\nattack,0.3\nattack,0.2\n")
    assert main(["evaluate", "--scores", str(s), "--out", str(tmp_path / "r.json"),
                 "--roc", str(tmp_path / "roc.csv"), "--svg", str(tmp_path / "roc.svg")]) == 0
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["eer"] == pytest.approx(1 / 3, abs=1e-12)
    assert read_roc(tmp_path / "roc.csv").shape[1] == 3
    assert (tmp_path / "roc.svg").read_text().startswith("<svg")


def test_exit_codes(small_run, tmp_path, capsys):
    bad_scores = tmp_path / "bad.csv"
    bad_scores.write_text("label,score\nmorph,0.5\n")
    assert main(["evaluate", "--scores", str(bad_scores), "--out", str(tmp_path / "r.json")]) == 3
    assert "line 2" in capsys.readouterr().err
    assert main(["decompose", str(tmp_path / "missing.pgm"), "--out", str(tmp_path / "o")]) == 3
    odd = tmp_path / "odd.pgm"
    write_pgm(np.zeros((3, 4)), odd)
    assert main(["decompose", str(odd), "--out", str(tmp_path / "o")]) == 4
    assert "height" in capsys.readouterr().err
    a = str(small_run / "data" / "sample_0000.pgm")
    assert main(["morph", a, a, "--bundle", str(small_run / "bundle"), "--gamma", "1.5",
                 "--out", str(tmp_path / "m.pgm")]) == 4
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"colour": 1}')
    assert main(["train", "--config", str(cfg), "--data", str(small_run / "data"),
                 "--out", str(tmp_path / "b")]) == 3
    with pytest.raises(SystemExit) as info:
        main(["morph"])
    assert info.value.code == 2


def test_batch_error_reports_index(small_run, tmp_path, capsys):
    a = small_run / "data" / "sample_0000.pgm"
    man = tmp_path / "manifest.csv"
    man.write_text("".join(f"{a},{a},0.5,o{i}.pgm\n" for i in range(3)) + f"{a},{a},7,o3.pgm\n")
    assert main(["batch-morph", "--manifest", str(man), "--bundle", str(small_run / "bundle")]) == 4
    assert "request 3" in capsys.readouterr().err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "wavemorph.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "vulnerability" in out.stdout
