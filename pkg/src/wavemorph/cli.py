"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data/format error, 4 numeric or
contract violation. Every command writes a reproducibility log next to its
output (``run_log.json`` in output directories, ``<file>.log.json`` beside
single-file outputs).
"""
import argparse
import csv
import json
import logging
import os
import platform
import sys

import numpy as np

from . import __version__, _backend
from .bundle import load_bundle, save_bundle
from .config import load_config, resolve_config, schedule_from, train_config_from
from .errors import ContractError, FormatError
from .formats import (FORMAT_VERSIONS, read_pgm, read_scores, read_subbands, read_tensor,
                      write_json, write_pgm, write_report, write_subbands, write_tensor)
from .metrics import metric_report, roc
from .pipeline import BatchMorphError, MorphRequest, batch_morph, wavelet_morph
from .plots import emit_curves
from .study import run_vulnerability, train_bundle
from .toydata import make_toy_dataset
from .wavelet import PLANES, SubBands, dwt_haar, iwt_haar

log = logging.getLogger("wavemorph")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONTRACT = 0, 2, 3, 4
MODE_ALIASES = {"ll": "ll_only", "all": "all_subbands"}


def _write_log(path, command, args, config=None, seed=None):
    payload = {
        "command": command,
        "arguments": {k: v for k, v in vars(args).items() if k != "func"},
        "config": config,
        "seed": seed,
        "format_versions": FORMAT_VERSIONS,
        "package_version": __version__,
        "kernel_backend": _backend.BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    write_json(payload, path)


def _file_log(out_path):
    return out_path + ".log.json"


def _read_dataset(directory):
    labels_path = os.path.join(directory, "labels.csv")
    if not os.path.exists(labels_path):
        raise FormatError(f"{directory}: missing labels.csv")
    images, labels = [], []
    with open(labels_path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != ["file", "identity"]:
        raise FormatError(f"{labels_path}: line 1 must be the header 'file,identity'")
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise FormatError(f"{labels_path}: line {lineno}: expected 'file,identity'")
        try:
            labels.append(int(row[1]))
        except ValueError:
            raise FormatError(f"{labels_path}: line {lineno}: identity {row[1]!r} is not an integer")
        images.append(read_pgm(os.path.join(directory, row[0])))
    if not images:
        raise FormatError(f"{labels_path}: no images listed")
    return images, labels


# -- commands ----------------------------------------------------------------

def cmd_decompose(args):
    bands = dwt_haar(read_pgm(args.input))
    os.makedirs(args.out, exist_ok=True)
    for name in PLANES:
        write_tensor(getattr(bands, name), os.path.join(args.out, f"{name}.waft"))
    write_subbands(bands, os.path.join(args.out, "subbands.waft"))
    _write_log(os.path.join(args.out, "run_log.json"), "decompose", args)


def cmd_reconstruct(args):
    combined = os.path.join(args.dir, "subbands.waft")
    if all(os.path.exists(os.path.join(args.dir, f"{n}.waft")) for n in PLANES):
        bands = SubBands(*(read_tensor(os.path.join(args.dir, f"{n}.waft")) for n in PLANES))
    elif os.path.exists(combined):
        bands = read_subbands(combined)
    else:
        raise FormatError(f"{args.dir}: no ll/lh/hl/hh.waft or subbands.waft found")
    write_pgm(iwt_haar(bands), args.out, args.maxval)
    _write_log(_file_log(args.out), "reconstruct", args)


def cmd_make_dataset(args):
    data = make_toy_dataset(args.n, args.size, args.identities, args.seed)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "labels.csv"), "w", newline="") as f:
        f.write("file,identity\n")
        for i, (img, label) in enumerate(data):
            name = f"sample_{i:04d}.pgm"
            write_pgm(img, os.path.join(args.out, name), 65535)
            f.write(f"{name},{label}\n")
    _write_log(os.path.join(args.out, "run_log.json"), "make-dataset", args, seed=args.seed)


def cmd_train(args):
    cfg = load_config(args.config) if args.config else resolve_config()
    images, _ = _read_dataset(args.data)
    bundle, trace = train_bundle(images, cfg["io_resolution"], schedule_from(cfg),
                                 train_config_from(cfg), cfg["encoder"], cfg["semantic_dim"],
                                 cfg["ddim_steps"])
    save_bundle(bundle, args.out)
    with open(os.path.join(args.out, "loss.csv"), "w") as f:
        f.write("epoch,loss\n")
        for epoch, loss in enumerate(trace, start=1):
            f.write(f"{epoch},{loss!r}\n")
    write_json(cfg, os.path.join(args.out, "config.json"))
    _write_log(os.path.join(args.out, "run_log.json"), "train", args, config=cfg, seed=cfg["seed"])


def cmd_morph(args):
    bundle = load_bundle(args.bundle)
    req = MorphRequest(read_pgm(args.a), read_pgm(args.b), args.gamma, MODE_ALIASES[args.mode])
    write_pgm(wavelet_morph(req, bundle), args.out, args.maxval)
    _write_log(_file_log(args.out), "morph", args)


def _read_manifest(path):
    base = os.path.dirname(os.path.abspath(path))
    rows = []
    with open(path, newline="") as f:
        for lineno, row in enumerate(csv.reader(f), start=1):
            if not row or (lineno == 1 and row[0].strip() == "subject_a_path"):
                continue
            if len(row) != 4:
                raise FormatError(f"{path}: line {lineno}: expected "
                                  "'subject_a_path,subject_b_path,gamma,output_path'")
            try:
                gamma = float(row[2])
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: gamma {row[2]!r} is not a number")
            a, b, out = (p if os.path.isabs(p) else os.path.join(base, p) for p in (row[0], row[1], row[3]))
            rows.append((a, b, gamma, out))
    return rows


def cmd_batch_morph(args):
    bundle = load_bundle(args.bundle)
    rows = _read_manifest(args.manifest)
    reqs = [MorphRequest(read_pgm(a), read_pgm(b), g, MODE_ALIASES[args.mode]) for a, b, g, _ in rows]
    outputs = batch_morph(reqs, bundle, workers=args.workers)
    for (_, _, _, out), img in zip(rows, outputs):
        os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
        write_pgm(img, out, args.maxval)
    _write_log(_file_log(args.manifest), "batch-morph", args)


def cmd_evaluate(args):
    scores = read_scores(args.scores)
    curve = roc(scores)
    write_report(metric_report(scores), args.out)
    if args.roc or args.svg:
        emit_curves(curve, args.roc or os.path.splitext(args.out)[0] + "_roc.csv", args.svg)
    _write_log(_file_log(args.out), "evaluate", args)


def cmd_vulnerability(args):
    bundle = load_bundle(args.bundle)
    images, labels = _read_dataset(args.data)
    result = run_vulnerability(images, labels, bundle, morphs_per_pair=args.morphs_per_pair,
                               gamma=args.gamma, mode=MODE_ALIASES[args.mode])
    write_json(result.report, args.out)
    roc_path = args.roc or os.path.splitext(args.out)[0] + "_roc.csv"
    emit_curves(result.curve, roc_path, args.svg)
    _write_log(_file_log(args.out), "vulnerability", args)


# -- parser ------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="wavemorph", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("decompose", help="write the four Haar sub-bands of a PGM image")
    s.add_argument("input")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("reconstruct", help="inverse-transform a sub-band directory into a PGM")
    s.add_argument("dir")
    s.add_argument("--out", required=True)
    s.add_argument("--maxval", type=int, default=65535, choices=(255, 65535))
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("make-dataset", help="write a synthetic toy face dataset")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--size", type=int, required=True)
    s.add_argument("--identities", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_make_dataset)

    s = sub.add_parser("train", help="train a model bundle on a dataset directory")
    s.add_argument("--config")
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("morph", help="morph two PGM images")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--bundle", required=True)
    s.add_argument("--gamma", type=float, default=0.5)
    s.add_argument("--mode", choices=sorted(MODE_ALIASES), default="ll")
    s.add_argument("--maxval", type=int, default=65535, choices=(255, 65535))
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_morph)

    s = sub.add_parser("batch-morph", help="run every morph listed in a manifest CSV")
    s.add_argument("--manifest", required=True)
    s.add_argument("--bundle", required=True)
    s.add_argument("--mode", choices=sorted(MODE_ALIASES), default="ll")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--maxval", type=int, default=65535, choices=(255, 65535))
    s.set_defaults(func=cmd_batch_morph)

    s = sub.add_parser("evaluate", help="metrics from a label,score CSV")
    s.add_argument("--scores", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--roc")
    s.add_argument("--svg")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("vulnerability", help="end-to-end toy vulnerability study")
    s.add_argument("--bundle", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--roc")
    s.add_argument("--svg")
    s.add_argument("--gamma", type=float, default=0.5)
    s.add_argument("--mode", choices=sorted(MODE_ALIASES), default="ll")
    s.add_argument("--morphs-per-pair", type=int, default=3)
    s.set_defaults(func=cmd_vulnerability)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except BatchMorphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA if isinstance(exc.cause, (FormatError, OSError)) else EXIT_CONTRACT
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ContractError, ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
