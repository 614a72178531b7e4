"""Minimal deterministic SVG line plots rendered from CSV text."""

from __future__ import annotations

import csv
import io
import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 20, 50


def read_columns(text, x_name, y_name):
    rows = csv.DictReader(io.StringIO(text))
    xs, ys = [], []
    for row in rows:
        xs.append(float(row[x_name]))
        ys.append(float(row[y_name]))
    return xs, ys


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _fmt(v):
    return f"{v:.2f}"


def line_plot(xs, ys, *, x_label, y_label, x_scale=1.0, title=None):
    """Polyline of (x * x_scale, y); non-finite points break the line."""
    sx = [x * x_scale for x in xs]
    finite = [(x, y) for x, y in zip(sx, ys) if math.isfinite(x) and math.isfinite(y)]
    x_lo = min(sx) if sx else 0.0
    x_hi = max(sx) if sx else 1.0
    y_lo = min((y for _, y in finite), default=0.0)
    y_hi = max((y for _, y in finite), default=1.0)
    y_lo, y_hi = min(y_lo, 0.0), max(y_hi, 1.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(x):
        return LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return TOP + (y_hi - y) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="14" text-anchor="middle" font-size="12">{escape(title)}</text>')
    for t in _ticks(x_lo, x_hi):
        x = px(t)
        out.append(f'<line x1="{_fmt(x)}" y1="{TOP + ph}" x2="{_fmt(x)}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(
            f'<text x="{_fmt(x)}" y="{TOP + ph + 18}" text-anchor="middle" font-size="11">{t:.4g}</text>'
        )
    for t in _ticks(y_lo, y_hi):
        y = py(t)
        out.append(f'<line x1="{LEFT - 5}" y1="{_fmt(y)}" x2="{LEFT}" y2="{_fmt(y)}" stroke="black"/>')
        out.append(
            f'<text x="{LEFT - 8}" y="{_fmt(y + 4)}" text-anchor="end" font-size="11">{t:.3g}</text>'
        )
    out.append(
        f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">{escape(x_label)}</text>'
    )
    out.append(
        f'<text x="16" y="{TOP + ph / 2:.2f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {TOP + ph / 2:.2f})">{escape(y_label)}</text>'
    )
    segment = []
    for x, y in zip(sx, ys):
        if math.isfinite(x) and math.isfinite(y):
            segment.append(f"{_fmt(px(x))},{_fmt(py(y))}")
            continue
        if segment:
            out.append(f'<polyline fill="none" stroke="#1f4e9c" stroke-width="1.5" points="{" ".join(segment)}"/>')
        segment = []
    if segment:
        out.append(f'<polyline fill="none" stroke="#1f4e9c" stroke-width="1.5" points="{" ".join(segment)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_csv(text, x_name, y_name, **kwargs):
    xs, ys = read_columns(text, x_name, y_name)
    return line_plot(xs, ys, **kwargs)
