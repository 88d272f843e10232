"""Bare-bones SVG output for the CLI: a heatmap of grid cells and line plots.
No styling beyond a grey-scale ramp; meant for a quick look, not print."""

from __future__ import annotations

import math


def _grey(v):
    g = int(round(255 * min(max(v, 0.0), 1.0)))
    return f"rgb({g},{g},{g})"


def heatmap_svg(rows, x="t", y="t1", value="one_minus_exp_neg_rho", size=600,
                missing="rgb(0,0,0)") -> str:
    """rows: dicts on a regular grid.  Non-finite values are drawn in `missing`
    (black, like the ordered region)."""
    xs = sorted({r[x] for r in rows})
    ys = sorted({r[y] for r in rows})
    ix = {v: i for i, v in enumerate(xs)}
    iy = {v: i for i, v in enumerate(ys)}
    w = size / max(1, len(xs))
    h = size / max(1, len(ys))
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
    for r in rows:
        v = r[value]
        col = _grey(v) if isinstance(v, float) and math.isfinite(v) else missing
        px = ix[r[x]] * w
        py = (len(ys) - 1 - iy[r[y]]) * h
        out.append(f'<rect x="{px:.3f}" y="{py:.3f}" width="{w:.3f}" height="{h:.3f}" fill="{col}"/>')
    out.append("</svg>")
    return "\n".join(out)


def line_svg(x, series: dict, size=(600, 400), logy=False) -> str:
    """One polyline per named series over the common x values."""
    W, H = size
    pad = 40
    ys = []
    for v in series.values():
        ys += [float(t) for t in v]
    if logy:
        ys = [math.log10(t) for t in ys if t > 0]
    finite = [t for t in ys if math.isfinite(t)]
    y0, y1 = (min(finite), max(finite)) if finite else (0.0, 1.0)
    if y1 == y0:
        y1 = y0 + 1.0
    x0, x1 = min(x), max(x)
    if x1 == x0:
        x1 = x0 + 1.0

    def px(u):
        return pad + (u - x0) / (x1 - x0) * (W - 2 * pad)

    def py(u):
        return H - pad - (u - y0) / (y1 - y0) * (H - 2 * pad)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>']
    for k, (name, v) in enumerate(series.items()):
        pts = []
        for u, t in zip(x, v):
            t = float(t)
            if logy:
                if t <= 0:
                    continue
                t = math.log10(t)
            if math.isfinite(t):
                pts.append(f"{px(u):.2f},{py(t):.2f}")
        shade = 60 * k % 200
        out.append(f'<polyline fill="none" stroke="rgb({shade},{shade},{shade})" '
                   f'points="{" ".join(pts)}"><title>{name}</title></polyline>')
    out.append("</svg>")
    return "\n".join(out)
