"""Minimal deterministic SVG line plots."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..errors import UsageError

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=150, top=30, bottom=50)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

DEFAULT_SERIES = ("concurrence", "purity")


def _num(x):
    return f"{x:.2f}"


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        return [float(e) for e in range(a, b + 1)]
    if hi == lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / 4))
    for m in (1, 2, 5, 10):
        if (hi - lo) / (step * m) <= 6:
            step *= m
            break
    start = math.ceil(lo / step) * step
    return [round(start + i * step, 12) for i in range(int((hi - start) / step + 1e-9) + 1)]


def _label(v, log):
    if log:
        return f"1e{int(v)}"
    return f"{v:.4g}"


def render_svg(traj, series=None, loglog=False, title=None, comment=None) -> str:
    """Render selected columns of ``traj`` against ``t``.

    In ``loglog`` mode purity is shown as the deficit ``1 - purity`` and
    non-positive samples are skipped, which makes power laws straight lines.
    """
    if len(traj) == 0:
        raise UsageError("cannot plot an empty trajectory")
    series = tuple(series or [s for s in DEFAULT_SERIES if s in traj.columns])
    if not series:
        raise UsageError("no plottable columns")
    t = traj.times
    curves = []
    for name in series:
        y = traj.column(name)
        label = name
        if loglog and name.endswith("purity"):
            y = 1.0 - y
            label = f"1 - {name}"
        mask = np.isfinite(y)
        if loglog:
            mask &= (y > 0) & (t > 0)
        x = np.log10(t[mask]) if loglog else t[mask]
        yy = np.log10(y[mask]) if loglog else y[mask]
        curves.append((label, x, yy))
    xs = np.concatenate([c[1] for c in curves])
    ys = np.concatenate([c[2] for c in curves])
    if xs.size == 0:
        raise UsageError("nothing to plot after filtering")
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return MARGIN["top"] + (1 - (v - y0) / (y1 - y0)) * ph

    out = []
    if comment:
        out.append("<!-- " + comment.replace("--", "- -") + " -->")
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
               f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">')
    out.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    left, top = MARGIN["left"], MARGIN["top"]
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for v in _ticks(x0, x1, loglog):
        if x0 <= v <= x1:
            px = _num(sx(v))
            out.append(f'<line x1="{px}" y1="{top + ph}" x2="{px}" y2="{top + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{px}" y="{top + ph + 18}" text-anchor="middle">{_label(v, loglog)}</text>')
    for v in _ticks(y0, y1, loglog):
        if y0 <= v <= y1:
            py = _num(sy(v))
            out.append(f'<line x1="{left - 5}" y1="{py}" x2="{left}" y2="{py}" stroke="black"/>')
            out.append(f'<text x="{left - 8}" y="{py}" text-anchor="end" dominant-baseline="middle">'
                       f'{_label(v, loglog)}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle">'
               f'{"log10 t" if loglog else "t"}</text>')
    if title:
        out.append(f'<text x="{left + pw / 2:.2f}" y="18" text-anchor="middle">{title}</text>')
    for i, (label, x, y) in enumerate(curves):
        color = COLORS[i % len(COLORS)]
        if x.size:
            pts = " ".join(f"{_num(sx(a))},{_num(sy(b))}" for a, b in zip(x, y))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 15 + 18 * i
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 30}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 35}" y="{ly}" dominant-baseline="middle">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(traj, path, series=None, loglog=False, title=None) -> Path:
    """Write :func:`render_svg` output with the trajectory's provenance as a comment."""
    comment = "; ".join(f"{k}: {v}" for k, v in traj.header.items())
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_svg(traj, series, loglog, title, comment))
    return path
