"""Hand-written SVG plots of roof functions (1-D graphs, 2-D subdivisions)."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .exactlog import LogScalar, format_logscalar

__all__ = ["roof_svg", "plot_roof"]

W, H, M = 640, 420, 60
PALETTE = ["#cfe2f3", "#d9ead3", "#fff2cc", "#f4cccc", "#d9d2e9", "#fce5cd", "#d0e0e3", "#ead1dc"]


def _label(x) -> str:
    return format_logscalar(x) if isinstance(x, LogScalar) else str(x)


def _roof_for(d, place):
    from .adelic import Smooth1D, global_roof, roof_local
    from .convexcore.smooth import smooth_roof
    from .places import Place

    if str(place) == "global":
        if d.numeric:
            return None, _smooth_samples(d, None)
        return global_roof(d), None
    v = Place.parse(place)
    m = d.metric(v)
    if isinstance(m, Smooth1D):
        return None, _smooth_samples(d, v)
    return roof_local(d, v), None


def _smooth_samples(d, v):
    from .adelic import _roof_float

    a, b = (float(p[0]) for p in d.polytope.vertices)
    xs = np.linspace(a, b, 201)
    places = [v] if v is not None else list(d.metrics)
    ys = np.array([sum(_roof_float(d, w, x) for w in places) for x in xs])
    return xs, ys


def _svg(body: list[str], title: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
            f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">')
    return "\n".join([head, f'<title>{escape(title)}</title>',
                      f'<rect width="{W}" height="{H}" fill="white"/>', *body, "</svg>"]) + "\n"


def _plot_1d(xs, ys, labels, title):
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(min(ys), 0.0), max(max(ys), 0.0)
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 1.0, y1 + 1.0
    sx = lambda x: M + (x - x0) / (x1 - x0) * (W - 2 * M)
    sy = lambda y: H - M - (y - y0) / (y1 - y0) * (H - 2 * M)
    body = [
        f'<line x1="{M}" y1="{sy(0):.2f}" x2="{W - M}" y2="{sy(0):.2f}" stroke="#888"/>',
        f'<line x1="{sx(x0):.2f}" y1="{M / 2}" x2="{sx(x0):.2f}" y2="{H - M / 2}" stroke="#888"/>',
        f'<text x="{W / 2}" y="{M / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    body.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e79" stroke-width="2"/>')
    for (x, y), lab in labels:
        body.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3.5" fill="#c00000"/>')
        body.append(f'<text x="{sx(x) + 6:.2f}" y="{sy(y) - 8:.2f}">{escape(lab)}</text>')
    return body


def _plot_2d(f, title):
    dom = f.domain.vertices
    xs = [float(v[0]) for v in dom]
    ys = [float(v[1]) for v in dom]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0)
    sx = lambda x: M + (x - x0) / span * (H - 2 * M)
    sy = lambda y: H - M - (y - y0) / span * (H - 2 * M)
    body = [f'<text x="{W / 2}" y="{M / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>']
    for k, (cell, facet) in enumerate(zip(f.cells, f.facets)):
        vs = cell.vertices
        c = np.mean([[float(a) for a in v] for v in vs], axis=0)
        ang = [np.arctan2(float(v[1]) - c[1], float(v[0]) - c[0]) for v in vs]
        order = [vs[i] for i in np.argsort(ang)]
        pts = " ".join(f"{sx(float(v[0])):.2f},{sy(float(v[1])):.2f}" for v in order)
        body.append(f'<polygon points="{pts}" fill="{PALETTE[k % len(PALETTE)]}" stroke="#333"/>')
        slope = ", ".join(_label(s) for s in facet.slope)
        body.append(f'<text x="{sx(c[0]):.2f}" y="{sy(c[1]):.2f}" text-anchor="middle">'
                    f'{escape(f"<({slope}), x> + {_label(facet.const)}")}</text>')
    for x, t in f.vertices:
        px, py = sx(float(x[0])), sy(float(x[1]))
        body.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3.5" fill="#c00000"/>')
        body.append(f'<text x="{px + 6:.2f}" y="{py - 6:.2f}">{escape(f"({x[0]}, {x[1]}): {_label(t)}")}</text>')
    return body


def roof_svg(d, place="global") -> str:
    if d.dim > 2:
        raise ValueError("roof plots are drawn for dimension 1 or 2")
    f, samples = _roof_for(d, place)
    title = f"roof function, place {place}"
    if samples is not None:
        xs, ys = samples
        i = int(np.argmax(ys))
        labels = [((xs[i], ys[i]), f"max ~ {ys[i]:.10g} at x ~ {xs[i]:.6g}")]
        return _svg(_plot_1d(list(xs), list(ys), labels, title), title)
    if d.dim == 1:
        verts = f.vertices
        xs = [float(x[0]) for x, _ in verts]
        ys = [float(t) for _, t in verts]
        labels = [((float(x[0]), float(t)), f"({x[0]}, {_label(t)})") for x, t in verts]
        return _svg(_plot_1d(xs, ys, labels, title), title)
    return _svg(_plot_2d(f, title), title)


def plot_roof(d, place, out) -> str:
    text = roof_svg(d, place)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)
    return str(out)
