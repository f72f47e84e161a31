"""Heading-versus-time plots as deterministic SVG.

Polylines are written in data coordinates inside one transform group, so
the numbers in ``points`` are the CSV values rounded to 6 significant
digits and nothing else.
"""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape, quoteattr

WIDTH, HEIGHT = 800, 500
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 160, 20, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
          "#7f7f7f")
TICKS = 5


def num(x: float) -> str:
    return "%.6g" % (float(x) + 0.0)


def _range(values: Sequence[float], pad: float = 0.05):
    lo, hi = min(values), max(values)
    if hi == lo:
        return lo - 1.0, hi + 1.0
    margin = pad * (hi - lo)
    return lo - margin, hi + margin


def render(series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
           markers: Sequence[float] = ()) -> str:
    """SVG text for ``(label, times, headings)`` series plus vertical markers."""
    if not series:
        raise ValueError("nothing to plot")
    all_t = [t for _, ts, _ in series for t in ts]
    all_h = [h for _, _, hs in series for h in hs]
    t0, t1 = min(all_t), max(all_t)
    if t1 == t0:
        t1 = t0 + 1.0
    h0, h1 = _range(all_h + [0.0])
    pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    sx, sy = pw / (t1 - t0), ph / (h1 - h0)

    def px(t):
        return MARGIN_LEFT + (t - t0) * sx

    def py(h):
        return MARGIN_TOP + (h1 - h) * sy

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" '
        'fill="none" stroke="#000"/>',
    ]
    for i in range(TICKS + 1):
        t = t0 + (t1 - t0) * i / TICKS
        h = h0 + (h1 - h0) * i / TICKS
        out.append(f'<text x="{num(px(t))}" y="{HEIGHT - MARGIN_BOTTOM + 16}" '
                   f'text-anchor="middle">{num(t)}</text>')
        out.append(f'<text x="{MARGIN_LEFT - 6}" y="{num(py(h) + 4)}" '
                   f'text-anchor="end">{num(h)}</text>')
    out.append(f'<text x="{MARGIN_LEFT + pw / 2:g}" y="{HEIGHT - 12}" '
               'text-anchor="middle">time (s)</text>')
    out.append(f'<text x="16" y="{MARGIN_TOP + ph / 2:g}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN_TOP + ph / 2:g})">orientation (deg)</text>')

    out.append(f'<g transform="translate({num(MARGIN_LEFT)} {num(MARGIN_TOP)}) '
               f'scale({num(sx)} {num(-sy)}) translate({num(-t0)} {num(-h1)})" fill="none">')
    out.append(f'<line x1="{num(t0)}" y1="0" x2="{num(t1)}" y2="0" stroke="#bbb" '
               'vector-effect="non-scaling-stroke"/>')
    for t in markers:
        out.append(f'<line class="tile-boundary" x1="{num(t)}" y1="{num(h0)}" x2="{num(t)}" '
                   f'y2="{num(h1)}" stroke="#888" stroke-dasharray="4 3" '
                   'vector-effect="non-scaling-stroke"/>')
    for k, (label, ts, hs) in enumerate(series):
        points = " ".join(f"{num(t)},{num(h)}" for t, h in zip(ts, hs))
        out.append(f'<polyline data-label={quoteattr(label)} points="{points}" '
                   f'stroke="{COLORS[k % len(COLORS)]}" stroke-width="1.5" '
                   'vector-effect="non-scaling-stroke"/>')
    out.append("</g>")

    lx = WIDTH - MARGIN_RIGHT + 12
    for k, (label, _, _) in enumerate(series):
        y = MARGIN_TOP + 14 + 18 * k
        out.append(f'<line x1="{lx}" y1="{y - 4}" x2="{lx + 20}" y2="{y - 4}" '
                   f'stroke="{COLORS[k % len(COLORS)]}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{y}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def tile_boundaries(times: Sequence[float], tiles: Sequence[int]) -> list[float]:
    """Times at which the front foot changed tile."""
    return [times[i] for i in range(1, len(tiles)) if tiles[i] != tiles[i - 1]]
