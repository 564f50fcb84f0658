"""Minimal SVG line plots, no plotting dependency.

Enough for run reports: multiple labelled polylines over shared axes,
and a waterfall of field snapshots offset by time.  Output is a single
standalone .svg file.
"""

import math

from .reporting import atomic_write_text

_PALETTE = (
    "#1f6fb4",
    "#d45500",
    "#2e8540",
    "#8041a8",
    "#b01f2e",
    "#71685a",
    "#0e8c8c",
    "#c28e0e",
)

_W, _H = 760, 480
_ML, _MR, _MT, _MB = 70, 20, 42, 52


def _finite(values):
    return [v for v in values if math.isfinite(v)]


def _span(lo, hi):
    if hi <= lo:
        pad = 1.0 if lo == 0.0 else abs(lo) * 0.1
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _ticks(lo, hi, count=5):
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def _fmt_tick(v):
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:.4g}"


def line_plot(path, series, title="", xlabel="", ylabel=""):
    """series: iterable of (label, xs, ys).  Writes an SVG file."""
    series = [(label, list(xs), list(ys)) for label, xs, ys in series]
    all_x = [x for _, xs, _ in series for x in _finite(xs)]
    all_y = [y for _, _, ys in series for y in _finite(ys)]
    if not all_x or not all_y:
        raise ValueError("nothing finite to plot")
    x0, x1 = _span(min(all_x), max(all_x))
    y0, y1 = _span(min(all_y), max(all_y))

    def px(x):
        return _ML + (x - x0) / (x1 - x0) * (_W - _ML - _MR)

    def py(y):
        return _H - _MB - (y - y0) / (y1 - y0) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_W / 2:.0f}" y="24" text-anchor="middle" '
            f'font-size="15">{_esc(title)}</text>'
        )
    # axes with ticks
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="#444"/>'
    )
    for tx in _ticks(x0, x1):
        parts.append(
            f'<line x1="{px(tx):.1f}" y1="{_H - _MB}" x2="{px(tx):.1f}" '
            f'y2="{_H - _MB + 5}" stroke="#444"/>'
        )
        parts.append(
            f'<text x="{px(tx):.1f}" y="{_H - _MB + 18}" '
            f'text-anchor="middle">{_fmt_tick(tx)}</text>'
        )
    for ty in _ticks(y0, y1):
        parts.append(
            f'<line x1="{_ML - 5}" y1="{py(ty):.1f}" x2="{_ML}" '
            f'y2="{py(ty):.1f}" stroke="#444"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{py(ty) + 4:.1f}" '
            f'text-anchor="end">{_fmt_tick(ty)}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{_W / 2:.0f}" y="{_H - 12}" '
            f'text-anchor="middle">{_esc(xlabel)}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="16" y="{_H / 2:.0f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {_H / 2:.0f})">{_esc(ylabel)}</text>'
        )
    for i, (label, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(
            f"{px(x):.2f},{py(y):.2f}"
            for x, y in zip(xs, ys)
            if math.isfinite(x) and math.isfinite(y)
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.4"/>'
        )
        if label:
            ly = _MT + 16 + 15 * i
            parts.append(
                f'<line x1="{_W - _MR - 120}" y1="{ly - 4}" x2="{_W - _MR - 96}" '
                f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>'
            )
            parts.append(f'<text x="{_W - _MR - 90}" y="{ly}">{_esc(label)}</text>')
    parts.append("</svg>")
    atomic_write_text(path, "\n".join(parts) + "\n")


def waterfall_plot(path, x, snapshots, title="", gain=1.0):
    """Snapshots (t, values) drawn as offset traces, early times at the bottom."""
    snapshots = list(snapshots)
    if not snapshots:
        raise ValueError("no snapshots to plot")
    amp = max(max(abs(v) for v in vals) for _, vals in snapshots)
    amp = amp if amp > 0 else 1.0
    series = []
    for i, (t, vals) in enumerate(snapshots):
        offset = i / max(1, len(snapshots) - 1)
        series.append(
            (f"t={t:.3f}" if i in (0, len(snapshots) - 1) else "",
             x,
             [offset + gain * v / (3.0 * amp) for v in vals])
        )
    line_plot(path, series, title=title, xlabel="x", ylabel="time (offset)")


def _esc(text):
    return (
        str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )
