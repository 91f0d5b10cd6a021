"""Self-contained SVG rendering of error-rate curves."""
import math
from xml.sax.saxutils import escape

import numpy as np

from .formats import write_roc

_W, _H = 360, 300
_PAD_L, _PAD_R, _PAD_T, _PAD_B = 52, 16, 30, 46
_COLORS = {"APCER": "#c0392b", "BPCER": "#2471a3", "ROC": "#1e8449"}


def _panel(x0, title, xlabel, ylabel, series, xlim):
    pw, ph = _W - _PAD_L - _PAD_R, _H - _PAD_T - _PAD_B
    lo, hi = xlim
    span = hi - lo if hi > lo else 1.0

    def sx(v):
        return x0 + _PAD_L + (v - lo) / span * pw

    def sy(v):
        return _PAD_T + (1.0 - v) * ph

    out = [f'<g class="panel">',
           f'<text x="{x0 + _W / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
           f'<rect x="{x0 + _PAD_L}" y="{_PAD_T}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>']
    for k in range(6):
        frac = k / 5
        xv = lo + frac * span
        out.append(f'<text x="{sx(xv):.1f}" y="{_PAD_T + ph + 14}" text-anchor="middle" '
                   f'font-size="9">{xv:.2f}</text>')
        out.append(f'<text x="{x0 + _PAD_L - 4}" y="{sy(frac) + 3:.1f}" text-anchor="end" '
                   f'font-size="9">{frac:.1f}</text>')
    out.append(f'<text x="{x0 + _PAD_L + pw / 2:.1f}" y="{_H - 8}" text-anchor="middle" '
               f'font-size="11">{escape(xlabel)}</text>')
    out.append(f'<text x="{x0 + 14}" y="{_PAD_T + ph / 2:.1f}" text-anchor="middle" font-size="11" '
               f'transform="rotate(-90 {x0 + 14} {_PAD_T + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (name, xs, ys) in enumerate(series):
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        color = _COLORS.get(name, "#000")
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{pts}">'
                   f'<title>{escape(name)}</title></polyline>')
        ly = _PAD_T + 14 + 14 * i
        out.append(f'<line x1="{x0 + _W - _PAD_R - 70}" y1="{ly}" x2="{x0 + _W - _PAD_R - 52}" '
                   f'y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{x0 + _W - _PAD_R - 48}" y="{ly + 4}" font-size="10">{escape(name)}</text>')
    out.append("</g>")
    return out


def roc_svg(curve, title="verifier error rates"):
    """Two panels: APCER/BPCER against threshold, and the ROC (1 - BPCER vs APCER)."""
    thr = np.asarray(curve.thresholds, dtype=np.float64)
    apcer, bpcer = curve.apcer, curve.bpcer
    finite = thr[np.isfinite(thr)]
    if finite.size:
        lo, hi = float(finite.min()), float(finite.max())
        margin = max((hi - lo) * 0.05, 1e-6)
        lo, hi = lo - margin, hi + margin
    else:
        lo, hi = 0.0, 1.0
    tplot = np.clip(np.where(np.isfinite(thr), thr, np.sign(thr) * math.inf), lo, hi)
    left = _panel(0, "APCER / BPCER", "threshold", "error rate",
                  [("APCER", tplot, apcer), ("BPCER", tplot, bpcer)], (lo, hi))
    right = _panel(_W, "ROC", "APCER", "1 - BPCER",
                   [("ROC", apcer[::-1], (1.0 - bpcer)[::-1])], (0.0, 1.0))
    head = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{2 * _W}" height="{_H}" '
            f'viewBox="0 0 {2 * _W} {_H}" font-family="sans-serif">',
            f"<title>{escape(title)}</title>",
            '<rect width="100%" height="100%" fill="white"/>']
    return "\n".join(head + left + right + ["</svg>"]) + "\n"


def emit_curves(curve, path_csv, path_svg=None):
    """Write the ROC as CSV and, optionally, as an SVG figure."""
    write_roc(curve, path_csv)
    if path_svg is not None:
        with open(path_svg, "w") as f:
            f.write(roc_svg(curve))
