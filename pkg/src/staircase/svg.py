"""Static SVG drawing of a delay profile.

The stage-``j`` tower is a rectangle: columns run left to right, levels bottom
to top.  Each in-tower domain becomes a falling line from the level hit by its
first column to the level hit by its last one; spacer landings are marked
along the roof and unresolved columns are greyed out.
"""
from __future__ import annotations

from xml.sax.saxutils import escape

from .analysis import BOUNDARY, SPACER, TOWER, DelayProfile

WIDTH, HEIGHT, MARGIN = 900, 420, 50


def _x(col: float, r: int) -> float:
    return MARGIN + (WIDTH - 2 * MARGIN) * (col - 1) / r


def _y(level: float, h: int) -> float:
    return HEIGHT - MARGIN - (HEIGHT - 2 * MARGIN) * level / max(h, 1)


def render_profile(profile: DelayProfile) -> str:
    r, h = profile.r, profile.h
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" height="{HEIGHT - 2 * MARGIN}" '
        'fill="none" stroke="black" stroke-width="1.5"/>',
        f'<text x="{MARGIN}" y="{MARGIN - 18}" font-family="sans-serif" font-size="14">'
        f'{escape(f"T^{profile.m} on stage {profile.j}: h={h}, r={r}")}</text>',
        f'<text x="{WIDTH - MARGIN + 4}" y="{_y(h, h) + 4:.2f}" font-family="sans-serif" font-size="11">roof</text>',
        f'<text x="{WIDTH - MARGIN + 4}" y="{_y(0, h) + 4:.2f}" font-family="sans-serif" font-size="11">base</text>',
    ]
    p = 0
    for seg in profile.segments:
        x0, x1 = _x(seg.first_column, r), _x(seg.last_column + 1, r)
        if seg.kind == BOUNDARY:
            out.append(f'<rect x="{x0:.2f}" y="{MARGIN}" width="{x1 - x0:.2f}" height="{HEIGHT - 2 * MARGIN}" '
                       'fill="#cccccc" fill-opacity="0.6"/>')
            out.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT / 2:.2f}" font-family="sans-serif" '
                       'font-size="11" text-anchor="middle">unresolved</text>')
        elif seg.kind == SPACER:
            out.append(f'<rect x="{x0:.2f}" y="{MARGIN - 6}" width="{max(x1 - x0, 1):.2f}" height="6" '
                       'fill="#d62728"/>')
        elif seg.kind == TOWER:
            p += 1
            cx0 = (x0 + _x(seg.first_column + 1, r)) / 2
            cx1 = (_x(seg.last_column, r) + x1) / 2
            y0 = _y(seg.landing, h)
            y1 = _y(seg.landing_at(seg.last_column), h)
            out.append(f'<line x1="{cx0:.2f}" y1="{y0:.2f}" x2="{cx1:.2f}" y2="{y1:.2f}" '
                       'stroke="#1f77b4" stroke-width="2"/>')
            out.append(f'<line x1="{x1:.2f}" y1="{MARGIN}" x2="{x1:.2f}" y2="{HEIGHT - MARGIN}" '
                       'stroke="#999999" stroke-dasharray="3,3"/>')
            label = f"D{p} delay {seg.delay}"
            out.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{HEIGHT - MARGIN + 16}" font-family="sans-serif" '
                       f'font-size="11" text-anchor="middle">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
