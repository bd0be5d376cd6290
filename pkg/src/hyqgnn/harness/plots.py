"""Dependency-free SVG/CSV writers for parity plots and importance charts.

Output is a pure function of the inputs, so identical runs give identical
bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from ..errors import DegeneratePrediction
from .metrics import evaluate_r2, linear_fit

_W, _H, _PAD = 480, 480, 60


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def write_pairs_csv(pairs, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["true_ev", "predicted_ev"])
        for t, p in pairs:
            w.writerow([repr(float(t)), repr(float(p))])


def read_pairs_csv(path) -> list[tuple[float, float]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return [(float(t), float(p)) for t, p in rows[1:] if t]


def parity_svg(pairs, title: str = "parity") -> str:
    pairs = [(float(t), float(p)) for t, p in pairs]
    if not pairs:
        raise ValueError("no pairs to plot")
    t = np.array([a for a, _ in pairs])
    p = np.array([b for _, b in pairs])
    lo = float(min(t.min(), p.min()))
    hi = float(max(t.max(), p.max()))
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5
    margin = 0.05 * (hi - lo)
    lo, hi = lo - margin, hi + margin
    span = _W - 2 * _PAD

    def sx(v):  # true value on x
        return _PAD + (v - lo) / (hi - lo) * span

    def sy(v):  # predicted value on y
        return _H - _PAD - (v - lo) / (hi - lo) * span

    try:
        r2 = f"{evaluate_r2(t, p):.3f}"
        slope, intercept = linear_fit(t, p)
    except (ValueError, DegeneratePrediction):
        r2, slope = "n/a", None

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_PAD}" y="{_PAD}" width="{span}" height="{span}" fill="none" stroke="black"/>',
        f'<line class="identity" x1="{_fmt(sx(lo))}" y1="{_fmt(sy(lo))}" x2="{_fmt(sx(hi))}" '
        f'y2="{_fmt(sy(hi))}" stroke="#999" stroke-dasharray="4 4"/>',
    ]
    if slope is not None:
        # fitted line true = slope * pred + intercept, drawn as pred(true)
        if abs(slope) > 1e-12:
            y_lo, y_hi = (lo - intercept) / slope, (hi - intercept) / slope
            out.append(f'<line class="fit" x1="{_fmt(sx(lo))}" y1="{_fmt(sy(y_lo))}" '
                       f'x2="{_fmt(sx(hi))}" y2="{_fmt(sy(y_hi))}" stroke="crimson"/>')
    for a, b in pairs:
        out.append(f'<circle class="point" cx="{_fmt(sx(a))}" cy="{_fmt(sy(b))}" r="3.5" '
                   f'fill="steelblue" fill-opacity="0.8"/>')
    out += [
        f'<text x="{_W / 2}" y="{_PAD / 2}" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<text x="{_PAD + 8}" y="{_PAD + 20}" font-size="14">R² (linear fit) = {r2}</text>',
        f'<text x="{_W / 2}" y="{_H - 15}" text-anchor="middle" font-size="13">true formation energy (eV)</text>',
        f'<text x="18" y="{_H / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {_H / 2})">predicted (eV)</text>',
        f'<text x="{_PAD}" y="{_H - _PAD + 16}" font-size="11" text-anchor="middle">{lo:.2f}</text>',
        f'<text x="{_W - _PAD}" y="{_H - _PAD + 16}" font-size="11" text-anchor="middle">{hi:.2f}</text>',
        "</svg>",
    ]
    return "\n".join(out) + "\n"


def emit_parity_plot(pairs, path, title: str = "parity") -> tuple[Path, Path]:
    """Write ``path`` (SVG) and a CSV sidecar with the raw pairs next to it."""
    path = Path(path)
    svg = parity_svg(pairs, title)
    path.write_text(svg)
    sidecar = path.with_suffix(".csv")
    write_pairs_csv(pairs, sidecar)
    return path, sidecar


def importance_svg(ranked, top: int = 20, title: str = "feature importance") -> str:
    ranked = list(ranked)[:top]
    bar_h, gap, left = 18, 6, 260
    width = 720
    height = 70 + len(ranked) * (bar_h + gap)
    peak = max((s for _, s in ranked), default=0.0) or 1.0
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="28" text-anchor="middle" font-size="16">{escape(title)}</text>',
    ]
    for k, (name, share) in enumerate(ranked):
        y = 50 + k * (bar_h + gap)
        w = (width - left - 80) * share / peak
        out.append(f'<text x="{left - 8}" y="{y + 13}" text-anchor="end" font-size="12">{escape(name)}</text>')
        out.append(f'<rect class="bar" x="{left}" y="{y}" width="{_fmt(w)}" height="{bar_h}" fill="steelblue"/>')
        out.append(f'<text x="{left + w + 6:.3f}" y="{y + 13}" font-size="11">{share:.3f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_importance_report(ranked, csv_path, svg_path=None, top: int = 20) -> None:
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "feature", "importance"])
        for k, (name, share) in enumerate(ranked, 1):
            w.writerow([k, name, repr(float(share))])
    if svg_path is not None:
        Path(svg_path).write_text(importance_svg(ranked, top))
