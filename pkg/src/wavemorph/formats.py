"""On-disk formats.

WAFT tensor
    ``b"WAFT"``, then ``H, W, C`` as little-endian uint32, then ``H*W*C``
    little-endian float64 values in row-major order.
WAFT container
    One count byte followed by that many WAFT tensors. Sub-band files hold
    four tensors in LL, LH, HL, HH order (count byte ``0x04``).
PGM
    Binary ``P5`` only; 16-bit samples are big-endian.
Scores CSV
    Header ``label,score``; labels ``bonafide`` or ``attack``.
"""
import csv
import io
import json
import math
import os
import re
import struct

import numpy as np

from .errors import FormatError
from .metrics import ScoreSet
from .wavelet import SubBands

MAGIC = b"WAFT"
_HEADER = struct.Struct("<4sIII")
FORMAT_VERSIONS = {"waft": 1, "pgm": "P5", "scores_csv": 1, "report_json": 1, "roc_csv": 1}


# -- WAFT --------------------------------------------------------------------

def encode_tensor(arr):
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim == 0:
        a = a.reshape(1, 1, 1)
    elif a.ndim == 1:
        a = a.reshape(1, -1, 1)
    elif a.ndim == 2:
        a = a[:, :, None]
    elif a.ndim != 3:
        raise FormatError(f"WAFT tensors hold at most 3 axes, got shape {a.shape}")
    h, w, c = a.shape
    return _HEADER.pack(MAGIC, h, w, c) + np.ascontiguousarray(a, dtype="<f8").tobytes()


def decode_tensor(buf, offset=0, squeeze=True):
    """Parse one tensor at ``offset``; returns ``(array, next_offset)``."""
    if len(buf) - offset < _HEADER.size:
        raise FormatError(f"truncated WAFT header at byte {offset}: need {_HEADER.size} bytes, "
                          f"have {len(buf) - offset}")
    magic, h, w, c = _HEADER.unpack_from(buf, offset)
    if magic != MAGIC:
        raise FormatError(f"bad WAFT magic {magic!r} at byte {offset}")
    start = offset + _HEADER.size
    nbytes = h * w * c * 8
    if len(buf) - start < nbytes:
        raise FormatError(f"truncated WAFT payload at byte {start}: expected {nbytes} bytes, "
                          f"got {len(buf) - start}")
    arr = np.frombuffer(buf, dtype="<f8", count=h * w * c, offset=start).astype(np.float64)
    arr = arr.reshape(h, w, c)
    if squeeze and c == 1:
        arr = arr[:, :, 0]
    return arr, start + nbytes


def write_tensor(arr, path):
    with open(path, "wb") as f:
        f.write(encode_tensor(arr))


def read_tensor(path, squeeze=True):
    with open(path, "rb") as f:
        buf = f.read()
    arr, end = decode_tensor(buf, 0, squeeze)
    if end != len(buf):
        raise FormatError(f"{path}: {len(buf) - end} trailing bytes after tensor")
    return arr


def write_tensors(arrays, path):
    arrays = list(arrays)
    if len(arrays) > 255:
        raise FormatError("a WAFT container holds at most 255 tensors")
    with open(path, "wb") as f:
        f.write(bytes([len(arrays)]))
        for a in arrays:
            f.write(encode_tensor(a))


def read_tensors(path, squeeze=True):
    with open(path, "rb") as f:
        buf = f.read()
    if not buf:
        raise FormatError(f"{path}: empty container (missing count byte)")
    out, offset = [], 1
    for _ in range(buf[0]):
        arr, offset = decode_tensor(buf, offset, squeeze)
        out.append(arr)
    if offset != len(buf):
        raise FormatError(f"{path}: {len(buf) - offset} trailing bytes after {buf[0]} tensors")
    return out


def write_subbands(bands, path):
    write_tensors(list(bands), path)


def read_subbands(path):
    arrays = read_tensors(path)
    if len(arrays) != 4:
        raise FormatError(f"{path}: sub-band file must hold 4 tensors, found {len(arrays)}")
    return SubBands(*arrays)


# -- PGM ---------------------------------------------------------------------

_WS = b" \t\n\r\x0b\x0c"


def _pgm_token(buf, pos):
    while pos < len(buf):
        if buf[pos] in _WS:
            pos += 1
        elif buf[pos:pos + 1] == b"#":
            end = buf.find(b"\n", pos)
            pos = len(buf) if end < 0 else end + 1
        else:
            break
    start = pos
    while pos < len(buf) and buf[pos] not in _WS and buf[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise FormatError(f"PGM header ends prematurely at byte {start}")
    return buf[start:pos], start, pos


def parse_pgm(buf):
    magic = buf[:2]
    if magic in (b"P2", b"P1", b"P3", b"P4", b"P6"):
        raise FormatError(f"unsupported PGM/PNM variant {magic.decode()} at byte 0 (only binary P5)")
    if magic != b"P5":
        raise FormatError(f"malformed PGM magic {magic!r} at byte 0")
    pos = 2
    fields = []
    for name in ("width", "height", "maxval"):
        tok, start, pos = _pgm_token(buf, pos)
        if not tok.isdigit():
            raise FormatError(f"malformed PGM {name} {tok!r} at byte {start}")
        fields.append(int(tok))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"PGM dimensions must be positive, got {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise FormatError(f"PGM maxval {maxval} outside [1, 65535]")
    if pos >= len(buf) or buf[pos] not in _WS:
        raise FormatError(f"missing whitespace after PGM maxval at byte {pos}")
    pos += 1
    dtype = ">u2" if maxval > 255 else "u1"
    expected = width * height * np.dtype(dtype).itemsize
    actual = len(buf) - pos
    if actual < expected:
        raise FormatError(f"truncated PGM payload at byte {pos}: expected {expected} bytes, got {actual}")
    raw = np.frombuffer(buf, dtype=dtype, count=width * height, offset=pos)
    return raw.reshape(height, width), maxval


def read_pgm(path):
    """Read a P5 image scaled to [0, 1] by its maxval."""
    with open(path, "rb") as f:
        buf = f.read()
    raw, maxval = parse_pgm(buf)
    return raw.astype(np.float64) / maxval


def quantize(img, maxval):
    # values are clipped to [0, 1] first, so floor(x + 0.5) rounds half away from zero
    a = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.floor(a * maxval + 0.5).astype(np.int64)


def write_pgm(img, path, maxval=65535):
    a = np.asarray(img, dtype=np.float64)
    if a.ndim == 3 and a.shape[2] == 1:
        a = a[:, :, 0]
    if a.ndim != 2:
        raise FormatError(f"PGM holds a single gray channel, got shape {a.shape}")
    if maxval not in (255, 65535):
        raise FormatError(f"maxval must be 255 or 65535, got {maxval}")
    q = quantize(a, maxval).astype(">u2" if maxval > 255 else "u1")
    h, w = a.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n%d\n" % (w, h, maxval))
        f.write(q.tobytes())


# -- scores, reports, curves -------------------------------------------------

LABELS = ("bonafide", "attack")


def _fmt(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def write_scores(s, path):
    with open(path, "w", newline="") as f:
        f.write("label,score\n")
        for label in LABELS:
            for v in getattr(s, label):
                f.write(f"{label},{_fmt(v)}\n")


def read_scores(path):
    with open(path, newline="") as f:
        text = f.read()
    lines = text.splitlines()
    if not lines or lines[0].strip() != "label,score":
        raise FormatError(f"{path}: line 1 must be the header 'label,score'")
    groups = {"bonafide": [], "attack": []}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(f"{path}: line {lineno}: expected 'label,score', got {line!r}")
        label, value = parts[0].strip(), parts[1].strip()
        if label not in groups:
            raise FormatError(f"{path}: line {lineno}: unknown label {label!r} (expected bonafide/attack)")
        if not re.fullmatch(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?", value):
            raise FormatError(f"{path}: line {lineno}: score {value!r} is not a finite decimal number")
        groups[label].append(float(value))
    for label, values in groups.items():
        if not values:
            raise FormatError(f"{path}: no {label} scores")
    return ScoreSet(np.array(groups["bonafide"]), np.array(groups["attack"]))


def write_json(obj, path):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=False, allow_nan=False)
        f.write("\n")


def write_report(report, path, extra=None):
    payload = report.to_dict() if hasattr(report, "to_dict") else dict(report)
    if extra:
        payload.update(extra)
    write_json(payload, path)


def roc_csv_text(curve):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["threshold", "apcer", "bpcer"])
    for t, a, b in zip(curve.thresholds, curve.apcer, curve.bpcer):
        w.writerow([_fmt(t), _fmt(a), _fmt(b)])
    return buf.getvalue()


def write_roc(curve, path):
    with open(path, "w", newline="") as f:
        f.write(roc_csv_text(curve))


def read_roc(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or rows[0] != ["threshold", "apcer", "bpcer"]:
        raise FormatError(f"{path}: line 1 must be the header 'threshold,apcer,bpcer'")
    try:
        data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return data.reshape(-1, 3)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
