"""Deterministic JSON, CSV and SVG emission.

JSON floats use Python's shortest round-trip repr; NaN and infinities become
``null``.  Field order is the insertion order of the dicts built by the
callers, which is fixed.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from xml.sax.saxutils import escape

import numpy as np

SCHEMA_VERSION = 1


def plain(obj):
    """Convert numpy scalars/arrays, tuples and dataclasses into JSON-ready values."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def to_json(doc) -> str:
    return json.dumps(plain(doc), indent=2, allow_nan=False) + "\n"


def _cell(v):
    v = plain(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


# a few anchors of a perceptually ordered dark-to-light map
_ANCHORS = (
    (0.0, (68, 1, 84)),
    (0.25, (59, 82, 139)),
    (0.5, (33, 145, 140)),
    (0.75, (94, 201, 98)),
    (1.0, (253, 231, 37)),
)


def colour(t):
    if t is None or not math.isfinite(t):
        return "#bbbbbb"
    t = min(1.0, max(0.0, t))
    for (t0, c0), (t1, c1) in zip(_ANCHORS, _ANCHORS[1:]):
        if t <= t1:
            u = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            rgb = [round(a + u * (b - a)) for a, b in zip(c0, c1)]
            return "#{:02x}{:02x}{:02x}".format(*rgb)
    return "#{:02x}{:02x}{:02x}".format(*_ANCHORS[-1][1])


def _fmt(x):
    return f"{x:.6g}"


def heatmap_svg(values, xs, ys, xlabel, ylabel, title, cell=24) -> str:
    """Self-contained SVG heatmap of ``values[i, j]`` at (xs[i], ys[j]) with a colour bar."""
    values = np.asarray(values, dtype=float)
    nx, ny = values.shape
    finite = values[np.isfinite(values)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    span = hi - lo

    def t(v):
        if not math.isfinite(v):
            return None
        return 0.5 if span == 0 else (v - lo) / span

    left, top = 70, 40
    w, h = nx * cell, ny * cell
    bar_x = left + w + 30
    width, height = bar_x + 90, top + h + 60
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<title>{escape(title)}</title>',
        f'<text x="{left}" y="20" font-size="13">{escape(title)}</text>',
    ]
    for i in range(nx):
        for j in range(ny):
            # y grows upward in the plot
            y = top + (ny - 1 - j) * cell
            out.append(
                f'<rect x="{left + i * cell}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{colour(t(values[i, j]))}"><title>{_fmt(values[i, j])}</title></rect>'
            )
    out.append(f'<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="black"/>')
    for i in (0, nx - 1):
        out.append(
            f'<text x="{left + i * cell + cell / 2}" y="{top + h + 15}" text-anchor="middle">{_fmt(xs[i])}</text>'
        )
    for j in (0, ny - 1):
        out.append(
            f'<text x="{left - 5}" y="{top + (ny - 1 - j) * cell + cell / 2 + 4}" text-anchor="end">{_fmt(ys[j])}</text>'
        )
    out.append(f'<text x="{left + w / 2}" y="{top + h + 35}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="20" y="{top + h / 2}" text-anchor="middle" transform="rotate(-90 20 {top + h / 2})">'
        f"{escape(ylabel)}</text>"
    )
    steps = 32
    for k in range(steps):
        y = top + h - (k + 1) * h / steps
        out.append(
            f'<rect x="{bar_x}" y="{y:.3f}" width="16" height="{h / steps + 0.5:.3f}" fill="{colour(k / (steps - 1))}"/>'
        )
    out.append(f'<rect x="{bar_x}" y="{top}" width="16" height="{h}" fill="none" stroke="black"/>')
    out.append(f'<text x="{bar_x + 22}" y="{top + 10}">{_fmt(hi)}</text>')
    out.append(f'<text x="{bar_x + 22}" y="{top + h}">{_fmt(lo)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
