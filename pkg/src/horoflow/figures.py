"""Plain SVG writers for experiment artifacts.

Two figures cover the catalog: a convergence curve on optionally
logarithmic axes, and the boundary circle in the disk model with the
limit-set cover on the rim and an orbit trace projected inside.  The
writers take arrays and return the document as a string; they have no
drawing dependencies and order every element deterministically, so an
artifact rerun is byte for byte the same file.

The disk picture leans on the chart convention: the boundary point at
angle t lands at e^{it} on the rim under z -> (z - i)/(z + i), so cover
arcs are drawn at their stored angles with no conversion.
"""

from __future__ import annotations

import math

import numpy as np

from horoflow.boundary import limit_set_cover
from horoflow.group import FuchsianGroup

_FONT = "font-family=\"Helvetica,Arial,sans-serif\""


def _f(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        a, b = math.ceil(lo - 1e-9), math.floor(hi + 1e-9)
        if b - a <= 8:
            return [float(k) for k in range(a, b + 1)]
        step = math.ceil((b - a) / 8)
        return [float(k) for k in range(a, b + 1, step)]
    span = hi - lo
    if span <= 0.0:
        return [lo]
    step = 10.0 ** math.floor(math.log10(span / 4.0))
    for m in (1.0, 2.0, 5.0, 10.0):
        if span / (step * m) <= 6.0:
            step *= m
            break
    first = math.ceil(lo / step - 1e-9)
    return [k * step for k in range(first, math.floor(hi / step + 1e-9) + 1)]


def _tick_label(v: float, log: bool) -> str:
    if log:
        return f"1e{int(round(v))}"
    if v == int(v) and abs(v) < 1e6:
        return str(int(v))
    return f"{v:.3g}"


def convergence_svg(xs, ys, *, title: str, xlabel: str, ylabel: str,
                    reference: float | None = None,
                    logx: bool = False, logy: bool = False,
                    width: int = 640, height: int = 420) -> str:
    """Polyline of (xs, ys) with axes, ticks, and an optional level line."""
    xs = np.asarray(xs, float)
    ys = np.asarray(ys, float)
    keep = np.isfinite(xs) & np.isfinite(ys)
    if logx:
        keep &= xs > 0.0
    if logy:
        keep &= ys > 0.0
    xs, ys = xs[keep], ys[keep]
    if xs.size == 0:
        raise ValueError("nothing to plot after dropping nonfinite points")
    tx = np.log10(xs) if logx else xs
    ty = np.log10(ys) if logy else ys

    ref_t = None
    if reference is not None and (not logy or reference > 0.0):
        ref_t = math.log10(reference) if logy else reference

    def padded(lo, hi, extra=None):
        if extra is not None:
            lo, hi = min(lo, extra), max(hi, extra)
        if hi - lo < 1e-12:
            lo, hi = lo - 0.5, hi + 0.5
        pad = 0.06 * (hi - lo)
        return lo - pad, hi + pad

    x0, x1 = padded(float(tx.min()), float(tx.max()))
    y0, y1 = padded(float(ty.min()), float(ty.max()), ref_t)

    left, right, top, bottom = 64, 16, 34, 46
    pw, ph = width - left - right, height - top - bottom

    def px(v):
        return left + pw * (v - x0) / (x1 - x0)

    def py(v):
        return top + ph * (y1 - v) / (y1 - y0)

    out = [f"<svg xmlns=\"http://www.w3.org/2000/svg\" "
           f"width=\"{width}\" height=\"{height}\" "
           f"viewBox=\"0 0 {width} {height}\">",
           f"<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>",
           f"<text x=\"{width / 2:.0f}\" y=\"20\" {_FONT} font-size=\"14\" "
           f"text-anchor=\"middle\">{title}</text>"]

    frame = (f"M{_f(left)} {_f(top)} H{_f(left + pw)} V{_f(top + ph)} "
             f"H{_f(left)} Z")
    out.append(f"<path d=\"{frame}\" fill=\"none\" stroke=\"#444\"/>")

    for v in _ticks(x0, x1, logx):
        if v < x0 or v > x1:
            continue
        p = px(v)
        out.append(f"<line x1=\"{_f(p)}\" y1=\"{_f(top + ph)}\" "
                   f"x2=\"{_f(p)}\" y2=\"{_f(top + ph + 4)}\" stroke=\"#444\"/>")
        out.append(f"<text x=\"{_f(p)}\" y=\"{_f(top + ph + 17)}\" {_FONT} "
                   f"font-size=\"11\" text-anchor=\"middle\">"
                   f"{_tick_label(v, logx)}</text>")
    for v in _ticks(y0, y1, logy):
        if v < y0 or v > y1:
            continue
        p = py(v)
        out.append(f"<line x1=\"{_f(left - 4)}\" y1=\"{_f(p)}\" "
                   f"x2=\"{_f(left)}\" y2=\"{_f(p)}\" stroke=\"#444\"/>")
        out.append(f"<text x=\"{_f(left - 7)}\" y=\"{_f(p + 4)}\" {_FONT} "
                   f"font-size=\"11\" text-anchor=\"end\">"
                   f"{_tick_label(v, logy)}</text>")

    out.append(f"<text x=\"{left + pw / 2:.0f}\" y=\"{height - 8}\" {_FONT} "
               f"font-size=\"12\" text-anchor=\"middle\">{xlabel}</text>")
    out.append(f"<text x=\"16\" y=\"{top + ph / 2:.0f}\" {_FONT} "
               f"font-size=\"12\" text-anchor=\"middle\" "
               f"transform=\"rotate(-90 16 {top + ph / 2:.0f})\">{ylabel}</text>")

    if ref_t is not None:
        p = py(ref_t)
        out.append(f"<line x1=\"{_f(left)}\" y1=\"{_f(p)}\" "
                   f"x2=\"{_f(left + pw)}\" y2=\"{_f(p)}\" stroke=\"#b22\" "
                   f"stroke-dasharray=\"6 4\"/>")

    pts = " ".join(f"{_f(px(a))},{_f(py(b))}" for a, b in zip(tx, ty))
    out.append(f"<polyline points=\"{pts}\" fill=\"none\" stroke=\"#1a5\" "
               f"stroke-width=\"1.6\"/>")
    for a, b in zip(tx, ty):
        out.append(f"<circle cx=\"{_f(px(a))}\" cy=\"{_f(py(b))}\" r=\"3\" "
                   f"fill=\"#1a5\"/>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _to_disk(x: np.ndarray, y: np.ndarray):
    z = x + 1j * y
    w = (z - 1j) / (z + 1j)
    return w.real, w.imag


def limit_set_svg(group: FuchsianGroup, depth: int = 8,
                  trace=None, max_points: int = 2000,
                  width: int = 520) -> str:
    """Boundary circle with the depth cover on the rim.

    When a trace is given its base points are moved to the disk model
    and drawn inside, thinned to at most max_points evenly in sample
    index.  The reduced samples stay in the fundamental domain, so the
    cloud pictures the domain and how the piece fills it.
    """
    size = width
    cx = cy = size / 2.0
    R = size / 2.0 - 24.0
    out = [f"<svg xmlns=\"http://www.w3.org/2000/svg\" "
           f"width=\"{size}\" height=\"{size}\" "
           f"viewBox=\"0 0 {size} {size}\">",
           f"<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/>",
           f"<circle cx=\"{_f(cx)}\" cy=\"{_f(cy)}\" r=\"{_f(R)}\" "
           f"fill=\"none\" stroke=\"#bbb\"/>"]

    def rim(angle: float):
        return cx + R * math.cos(angle), cy - R * math.sin(angle)

    cover = limit_set_cover(group, depth)
    for start, length in cover.arcset.arcs:
        ax, ay = rim(start)
        bx, by = rim(start + length)
        large = 1 if length > math.pi else 0
        out.append(f"<path d=\"M{_f(ax)} {_f(ay)} A{_f(R)} {_f(R)} 0 "
                   f"{large} 0 {_f(bx)} {_f(by)}\" fill=\"none\" "
                   f"stroke=\"#1a5\" stroke-width=\"5\"/>")

    if trace is not None:
        n = trace.x.size
        stride = max(1, n // max_points)
        dx, dy = _to_disk(trace.x[::stride], trace.y[::stride])
        for a, b in zip(dx, dy):
            out.append(f"<circle cx=\"{_f(cx + R * a)}\" "
                       f"cy=\"{_f(cy - R * b)}\" r=\"1.4\" fill=\"#36c\" "
                       f"fill-opacity=\"0.5\"/>")

    out.append(f"<text x=\"{_f(cx)}\" y=\"{size - 6:.0f}\" {_FONT} "
               f"font-size=\"12\" text-anchor=\"middle\">"
               f"{group.name}, cover depth {depth}</text>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
