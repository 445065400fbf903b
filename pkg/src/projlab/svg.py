"""Minimal dependency-free SVG line charts (log-scale y axis)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
_FLOOR = 1e-300


def line_chart(series: dict, title: str = "", width: int = 720, height: int = 420) -> str:
    pad_l, pad_r, pad_t, pad_b = 70, 20, 30, 40
    pts = [(x, y) for data in series.values() for x, y in data]
    xs = [x for x, _ in pts] or [0, 1]
    logs = [math.log10(max(y, _FLOOR)) for _, y in pts if y > 0] or [0.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = math.floor(min(logs)), math.ceil(max(logs))
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    w, h = width - pad_l - pad_r, height - pad_t - pad_b

    def sx(x):
        return pad_l + (x - x0) / (x1 - x0) * w

    def sy(y):
        ly = math.log10(y) if y > 0 else y0
        return pad_t + (y1 - max(ly, y0)) / (y1 - y0) * h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<rect x="{pad_l}" y="{pad_t}" width="{w}" height="{h}" fill="none" stroke="#444"/>',
    ]
    step = max(1, (y1 - y0) // 8)
    for k in range(y0, y1 + 1, step):
        y = pad_t + (y1 - k) / (y1 - y0) * h
        out.append(f'<line x1="{pad_l}" y1="{y:.2f}" x2="{pad_l + w}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{pad_l - 6}" y="{y + 4:.2f}" text-anchor="end">1e{k}</text>')
    out.append(f'<text x="{pad_l}" y="{height - 12}">{x0}</text>')
    out.append(f'<text x="{pad_l + w}" y="{height - 12}" text-anchor="end">{x1}</text>')
    for idx, (name, data) in enumerate(series.items()):
        color = _COLORS[idx % len(_COLORS)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in data)
        dash = ' stroke-dasharray="6,4"' if idx else ""
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{coords}"/>')
        ly = pad_t + 14 + 14 * idx
        out.append(f'<text x="{pad_l + w - 8}" y="{ly}" text-anchor="end" fill="{color}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
