"""Deterministic CSV/JSON/SVG writers."""

from __future__ import annotations

import json
import math
from pathlib import Path


def fmt(value) -> str:
    """CSV cell: integers verbatim, floats with 17 significant digits, None empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def write_csv(path, columns, rows):
    lines = [",".join(columns)]
    lines += [",".join(fmt(getattr(row, c) if not isinstance(row, dict) else row[c])
                       for c in columns) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> list[dict]:
    lines = Path(path).read_text().splitlines()
    head = lines[0].split(",")
    return [dict(zip(head, line.split(","))) for line in lines[1:]]


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path, data):
    Path(path).write_text(json.dumps(_clean(data), indent=2, sort_keys=True) + "\n")


def svg_plot(path, xs, series: dict, title="", floor=1e-16, width=640, height=400):
    """Log-y line plot of one or more series against xs."""
    pad = 50
    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
    logs = {name: [math.log10(max(float(y), floor)) for y in ys] for name, ys in series.items()}
    lo = min(min(v) for v in logs.values())
    hi = max(max(v) for v in logs.values())
    if hi - lo < 1e-12:
        lo, hi = lo - 1, hi + 1
    x0, x1 = min(xs), max(xs)
    span = (x1 - x0) or 1

    def px(x):
        return pad + (x - x0) / span * (width - 2 * pad)

    def py(v):
        return height - pad - (v - lo) / (hi - lo) * (height - 2 * pad)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
           f'<text x="{width / 2}" y="20" text-anchor="middle">{title}</text>',
           f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">k</text>',
           f'<text x="5" y="{pad}">1e{hi:.1f}</text>',
           f'<text x="5" y="{height - pad}">1e{lo:.1f}</text>',
           f'<text x="{pad}" y="{height - pad + 15}">{x0}</text>',
           f'<text x="{width - pad}" y="{height - pad + 15}" text-anchor="end">{x1}</text>']
    for idx, (name, vals) in enumerate(logs.items()):
        color = colors[idx % len(colors)]
        pts = " ".join(f"{px(x):.2f},{py(v):.2f}" for x, v in zip(xs, vals))
        out.append(f'<polyline fill="none" stroke="{color}" points="{pts}"/>')
        out.append(f'<text x="{width - pad - 60}" y="{pad + 15 * idx}" fill="{color}">{name}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
