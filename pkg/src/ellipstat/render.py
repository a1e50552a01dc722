# Deterministic SVG emission. Scenes are ordered lists of data-space
# primitives (ellipses, points, polylines, arrows, text, axes) plus a
# viewport; rendering applies one affine data-to-pixel transform (y
# flipped) and writes plain SVG 1.1 text. Identical input produces
# byte-identical output.

import math
from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from . import gellipsoid as ge
from . import kissing
from . import linmod
from . import mlm as mlm_mod
from . import statellipse as st

# Default palette: hypothesis ellipses red, error ellipses blue (the HE
# convention used throughout), groups cycled blue/red/green/....
PALETTE = {
    "h": "#b2182b",
    "e": "#2166ac",
    "data": "#000000",
    "accent": "#1b7837",
    "muted": "#888888",
    "groups": ["#2166ac", "#b2182b", "#1b7837", "#e08214", "#7b3294",
               "#35978f"],
}


@dataclass(frozen=True)
class Style:
    stroke: str = "#000000"
    width: float = 1.0
    fill: str = "none"
    opacity: float = 1.0
    dash: str = ""

    def svg(self):
        parts = [f'stroke="{self.stroke}"',
                 f'stroke-width="{_fmt(self.width)}"',
                 f'fill="{self.fill}"']
        if self.opacity != 1.0:
            parts.append(f'opacity="{_fmt(self.opacity)}"')
        if self.dash:
            parts.append(f'stroke-dasharray="{self.dash}"')
        return " ".join(parts)


@dataclass(frozen=True)
class EllipseLayer:
    ellipse: ge.GEllipsoid
    style: Style = Style()
    n: int = 64


@dataclass(frozen=True)
class PointsLayer:
    points: np.ndarray
    style: Style = Style()
    marker: str = "circle"      # 'circle' | 'dot' | 'square'
    size: float = 3.0


@dataclass(frozen=True)
class PolylineLayer:
    points: np.ndarray
    style: Style = Style()
    closed: bool = False


@dataclass(frozen=True)
class ArrowLayer:
    tail: tuple
    head: tuple
    style: Style = Style()


@dataclass(frozen=True)
class TextLayer:
    pos: tuple
    text: str
    style: Style = Style(stroke="none", fill="#000000")
    size: float = 11.0
    anchor: str = "start"


@dataclass(frozen=True)
class AxisLayer:
    style: Style = Style(stroke="#333333", width=1.0)
    ticks: int = 5
    label_x: str = ""
    label_y: str = ""


@dataclass(frozen=True)
class Scene:
    layers: list
    viewport: tuple = None      # (xmin, xmax, ymin, ymax); auto if None
    size: tuple = (480, 480)
    aspect: str = "equal"       # 'equal' | 'free'
    title: str = ""


def _fmt(v):
    s = f"{float(v):.4f}"
    return "0.0000" if s == "-0.0000" else s


def _escape(text):
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def ellipse_path(e, n=64):
    """Closed boundary polygon of a bounded 2D ellipsoid in data space."""
    if e.dim != 2:
        raise ValueError("ellipse paths are two-dimensional")
    if np.any(np.isinf(e.radii)):
        raise ValueError("cannot close the path of an unbounded ellipsoid")
    theta = 2.0 * np.pi * np.arange(n) / n
    circle = np.column_stack([np.cos(theta), np.sin(theta)])
    return e.center + (circle * e.radii) @ e.frame.T


def _layer_bounds(layer):
    if isinstance(layer, EllipseLayer):
        pts = ellipse_path(layer.ellipse, 32)
    elif isinstance(layer, (PointsLayer, PolylineLayer)):
        pts = np.asarray(layer.points, dtype=float)
    elif isinstance(layer, ArrowLayer):
        pts = np.array([layer.tail, layer.head], dtype=float)
    elif isinstance(layer, TextLayer):
        pts = np.array([layer.pos], dtype=float)
    else:
        return None
    if pts.size == 0:
        return None
    return (pts[:, 0].min(), pts[:, 0].max(), pts[:, 1].min(), pts[:, 1].max())


def _auto_viewport(layers):
    bounds = [b for b in (_layer_bounds(l) for l in layers) if b is not None]
    if not bounds:
        return (0.0, 1.0, 0.0, 1.0)
    xmin = min(b[0] for b in bounds)
    xmax = max(b[1] for b in bounds)
    ymin = min(b[2] for b in bounds)
    ymax = max(b[3] for b in bounds)
    dx = (xmax - xmin) or 1.0
    dy = (ymax - ymin) or 1.0
    pad = 0.05
    return (xmin - pad * dx, xmax + pad * dx, ymin - pad * dy,
            ymax + pad * dy)


@dataclass(frozen=True)
class Transform:
    """Affine data-to-pixel map with the y axis flipped."""
    x0: float
    y0: float
    sx: float
    sy: float
    height: float

    def to_pixel(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        px = self.x0 + self.sx * pts[:, 0]
        py = self.height - (self.y0 + self.sy * pts[:, 1])
        return np.column_stack([px, py])

    def to_data(self, pix):
        pix = np.atleast_2d(np.asarray(pix, dtype=float))
        x = (pix[:, 0] - self.x0) / self.sx
        y = (self.height - pix[:, 1] - self.y0) / self.sy
        return np.column_stack([x, y])


MARGIN = {"left": 54.0, "right": 16.0, "top": 28.0, "bottom": 44.0}


def scene_transform(scene):
    viewport = scene.viewport or _auto_viewport(scene.layers)
    xmin, xmax, ymin, ymax = (float(v) for v in viewport)
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"viewport has no area: {viewport}")
    w, h = scene.size
    avail_w = w - MARGIN["left"] - MARGIN["right"]
    avail_h = h - MARGIN["top"] - MARGIN["bottom"]
    if scene.aspect == "equal":
        s = min(avail_w / (xmax - xmin), avail_h / (ymax - ymin))
        # widen the shorter viewport side so the drawing stays centered
        extra_x = (avail_w / s - (xmax - xmin)) / 2.0
        extra_y = (avail_h / s - (ymax - ymin)) / 2.0
        xmin, xmax = xmin - extra_x, xmax + extra_x
        ymin, ymax = ymin - extra_y, ymax + extra_y
        sx = sy = s
    else:
        sx = avail_w / (xmax - xmin)
        sy = avail_h / (ymax - ymin)
    tr = Transform(x0=MARGIN["left"] - sx * xmin,
                   y0=MARGIN["bottom"] - sy * ymin,
                   sx=sx, sy=sy, height=float(h))
    return tr, (xmin, xmax, ymin, ymax)


def _nice_ticks(lo, hi, n):
    span = hi - lo
    raw = span / max(n, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(t) < 1e-12 * span else t)
        t += step
    return ticks


def _tick_label(v):
    if v == int(v) and abs(v) < 1e7:
        return str(int(v))
    return f"{v:g}"


def _render_axis(layer, tr, viewport, out):
    xmin, xmax, ymin, ymax = viewport
    corners = tr.to_pixel([[xmin, ymin], [xmax, ymax]])
    (x0, y0), (x1, y1) = corners
    out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y1)}" '
               f'width="{_fmt(x1 - x0)}" height="{_fmt(y0 - y1)}" '
               f'{layer.style.svg()}/>')
    for t in _nice_ticks(xmin, xmax, layer.ticks):
        px = tr.to_pixel([[t, ymin]])[0]
        out.append(f'<line x1="{_fmt(px[0])}" y1="{_fmt(px[1])}" '
                   f'x2="{_fmt(px[0])}" y2="{_fmt(px[1] + 5)}" '
                   f'{layer.style.svg()}/>')
        out.append(f'<text x="{_fmt(px[0])}" y="{_fmt(px[1] + 18)}" '
                   f'text-anchor="middle" font-family="monospace" '
                   f'font-size="10" fill="#333333">'
                   f'{_escape(_tick_label(t))}</text>')
    for t in _nice_ticks(ymin, ymax, layer.ticks):
        px = tr.to_pixel([[xmin, t]])[0]
        out.append(f'<line x1="{_fmt(px[0])}" y1="{_fmt(px[1])}" '
                   f'x2="{_fmt(px[0] - 5)}" y2="{_fmt(px[1])}" '
                   f'{layer.style.svg()}/>')
        out.append(f'<text x="{_fmt(px[0] - 8)}" y="{_fmt(px[1] + 3)}" '
                   f'text-anchor="end" font-family="monospace" '
                   f'font-size="10" fill="#333333">'
                   f'{_escape(_tick_label(t))}</text>')
    if layer.label_x:
        cx = 0.5 * (x0 + x1)
        out.append(f'<text x="{_fmt(cx)}" y="{_fmt(y0 + 34)}" '
                   f'text-anchor="middle" font-family="monospace" '
                   f'font-size="12" fill="#000000">'
                   f'{_escape(layer.label_x)}</text>')
    if layer.label_y:
        cy = 0.5 * (y0 + y1)
        out.append(f'<text x="{_fmt(x0 - 38)}" y="{_fmt(cy)}" '
                   f'text-anchor="middle" font-family="monospace" '
                   f'font-size="12" fill="#000000" '
                   f'transform="rotate(-90 {_fmt(x0 - 38)} {_fmt(cy)})">'
                   f'{_escape(layer.label_y)}</text>')


def _polyline_svg(pts_px, style, closed):
    coords = " ".join(f"{_fmt(p[0])},{_fmt(p[1])}" for p in pts_px)
    tag = "polygon" if closed else "polyline"
    return f'<{tag} points="{coords}" {style.svg()}/>'


def _render_points(layer, tr, out):
    pts = tr.to_pixel(layer.points)
    r = layer.size
    for p in pts:
        if layer.marker == "square":
            out.append(f'<rect x="{_fmt(p[0] - r)}" y="{_fmt(p[1] - r)}" '
                       f'width="{_fmt(2 * r)}" height="{_fmt(2 * r)}" '
                       f'{layer.style.svg()}/>')
        elif layer.marker == "dot":
            st_ = Style(stroke="none", fill=layer.style.stroke,
                        opacity=layer.style.opacity)
            out.append(f'<circle cx="{_fmt(p[0])}" cy="{_fmt(p[1])}" '
                       f'r="{_fmt(r)}" {st_.svg()}/>')
        else:
            out.append(f'<circle cx="{_fmt(p[0])}" cy="{_fmt(p[1])}" '
                       f'r="{_fmt(r)}" {layer.style.svg()}/>')


def _render_arrow(layer, tr, out):
    tail, head = tr.to_pixel([layer.tail, layer.head])
    out.append(f'<line x1="{_fmt(tail[0])}" y1="{_fmt(tail[1])}" '
               f'x2="{_fmt(head[0])}" y2="{_fmt(head[1])}" '
               f'{layer.style.svg()}/>')
    d = head - tail
    nrm = float(np.hypot(*d))
    if nrm > 1e-9:
        u = d / nrm
        left = head - 7.0 * u + 3.5 * np.array([-u[1], u[0]])
        right = head - 7.0 * u - 3.5 * np.array([-u[1], u[0]])
        tip = Style(stroke="none", fill=layer.style.stroke,
                    opacity=layer.style.opacity)
        pts = " ".join(f"{_fmt(p[0])},{_fmt(p[1])}"
                       for p in (head, left, right))
        out.append(f'<polygon points="{pts}" {tip.svg()}/>')


def render_scene(scene):
    """Render a scene to SVG 1.1 text (pure function of its input)."""
    tr, viewport = scene_transform(scene)
    w, h = scene.size
    out = ['<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'width="{_fmt(w)}" height="{_fmt(h)}" '
           f'viewBox="0 0 {_fmt(w)} {_fmt(h)}">',
           f'<rect x="0" y="0" width="{_fmt(w)}" height="{_fmt(h)}" '
           f'fill="#ffffff"/>']
    if scene.title:
        out.append(f'<text x="{_fmt(w / 2)}" y="18" text-anchor="middle" '
                   f'font-family="monospace" font-size="13" fill="#000000">'
                   f'{_escape(scene.title)}</text>')
    for layer in scene.layers:
        if isinstance(layer, AxisLayer):
            _render_axis(layer, tr, viewport, out)
        elif isinstance(layer, EllipseLayer):
            pts = tr.to_pixel(ellipse_path(layer.ellipse, layer.n))
            out.append(_polyline_svg(pts, layer.style, closed=True))
        elif isinstance(layer, PolylineLayer):
            pts = np.asarray(layer.points, dtype=float)
            if len(pts) >= 2:
                out.append(_polyline_svg(tr.to_pixel(pts), layer.style,
                                         layer.closed))
        elif isinstance(layer, PointsLayer):
            _render_points(layer, tr, out)
        elif isinstance(layer, ArrowLayer):
            _render_arrow(layer, tr, out)
        elif isinstance(layer, TextLayer):
            p = tr.to_pixel([layer.pos])[0]
            out.append(f'<text x="{_fmt(p[0])}" y="{_fmt(p[1])}" '
                       f'text-anchor="{layer.anchor}" '
                       f'font-family="monospace" '
                       f'font-size="{_fmt(layer.size)}" '
                       f'fill="{layer.style.fill}">'
                       f'{_escape(layer.text)}</text>')
        else:
            raise ValueError(f"unknown layer type {type(layer).__name__}")
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ------------------------------------------------------------- builders

def _regression_segment(mean, slope, half_span_x):
    x0, x1 = mean[0] - half_span_x, mean[0] + half_span_x
    return np.array([[x0, mean[1] + slope * (x0 - mean[0])],
                     [x1, mean[1] + slope * (x1 - mean[0])]])


def build_data_ellipse_panel(sample, levels=(0.40, 0.68, 0.95), title=""):
    """Scatter with nested coverage ellipses and both regression lines."""
    if sample.p != 2:
        raise ValueError("data ellipse panels are bivariate")
    mean, cov = st.mean_cov(sample)
    layers = [AxisLayer(label_x=sample.names[0], label_y=sample.names[1])]
    layers.append(PointsLayer(sample.data,
                              Style(stroke=PALETTE["muted"], width=0.6),
                              marker="circle", size=2.0))
    for level in sorted(levels):
        ell = st.data_ellipsoid(sample, st.CoverageSpec.chisq(level))
        layers.append(EllipseLayer(ell, Style(stroke=PALETTE["e"],
                                              width=1.4)))
    big = st.data_ellipsoid(sample, st.CoverageSpec.chisq(max(levels)))
    span = big.radii[0]
    b_yx = cov[0, 1] / cov[0, 0]
    b_xy = cov[0, 1] / cov[1, 1]     # x on y, drawn in the same panel
    layers.append(PolylineLayer(_regression_segment(mean, b_yx, span),
                                Style(stroke=PALETTE["data"], width=1.6)))
    inv_seg = np.array([[mean[0] + b_xy * (-span), mean[1] - span],
                        [mean[0] + b_xy * span, mean[1] + span]])
    layers.append(PolylineLayer(inv_seg,
                                Style(stroke=PALETTE["muted"], width=1.6)))
    layers.append(PointsLayer(np.array([mean]),
                              Style(stroke=PALETTE["data"]), marker="dot",
                              size=2.5))
    return Scene(layers=layers, title=title)


def _cell_map(data_bounds, cell_origin, cell_size):
    xmin, xmax, ymin, ymax = data_bounds
    sx = cell_size / (xmax - xmin)
    sy = cell_size / (ymax - ymin)
    mat = np.array([[sx, 0.0], [0.0, sy]])
    off = np.array([cell_origin[0] - sx * xmin, cell_origin[1] - sy * ymin])
    return mat, off


def build_scatterplot_matrix(gs, level=0.68, show_points=True, title=""):
    """All pairwise panels with per-group coverage ellipses.

    Each cell maps its variable pair into a unit tile of a p x p grid;
    ellipses ride along through the same affine map.
    """
    p = gs.p
    pad = 0.08
    layers = [AxisLayer(ticks=0)]
    pooled = gs.pooled_sample().data
    for i in range(p):          # row: y variable, drawn top to bottom
        for j in range(p):      # column: x variable
            origin = (j + pad, (p - 1 - i) + pad)
            size = 1.0 - 2 * pad
            frame = np.array([[origin[0], origin[1]],
                              [origin[0] + size, origin[1]],
                              [origin[0] + size, origin[1] + size],
                              [origin[0], origin[1] + size]])
            layers.append(PolylineLayer(frame, Style(stroke="#999999",
                                                     width=0.7),
                                        closed=True))
            if i == j:
                layers.append(TextLayer((origin[0] + size / 2,
                                         origin[1] + size / 2),
                                        gs.names[i],
                                        Style(stroke="none",
                                              fill="#000000"),
                                        size=12.0, anchor="middle"))
                continue
            cols = (j, i)
            lo = pooled[:, cols].min(axis=0)
            hi = pooled[:, cols].max(axis=0)
            span = np.where(hi > lo, hi - lo, 1.0)
            bounds = (lo[0] - 0.1 * span[0], hi[0] + 0.1 * span[0],
                      lo[1] - 0.1 * span[1], hi[1] + 0.1 * span[1])
            mat, off = _cell_map(bounds, origin, size)
            for gidx, (lab, samp) in enumerate(gs.samples.items()):
                color = PALETTE["groups"][gidx % len(PALETTE["groups"])]
                sub = st.Sample(samp.data[:, cols], (gs.names[cols[0]],
                                                     gs.names[cols[1]]))
                if show_points:
                    pts = sub.data @ mat.T + off
                    layers.append(PointsLayer(pts, Style(stroke=color,
                                                         width=0.5),
                                              marker="circle", size=1.2))
                ell = st.data_ellipsoid(sub, st.CoverageSpec.chisq(level))
                moved = ge.linear_image(ell, mat)
                moved = ge.GEllipsoid(center=moved.center + off,
                                      frame=moved.frame, radii=moved.radii)
                layers.append(EllipseLayer(moved, Style(stroke=color,
                                                        width=1.1)))
    return Scene(layers=layers, viewport=(-0.05, p + 0.05, -0.05, p + 0.05),
                 size=(640, 640), title=title)


def build_he_plot(h, e, df_e, df_h, center, coords=(0, 1), names=("y1", "y2"),
                  scaling="significance", alpha=0.05, level=0.68,
                  means=None, labels=None, title=""):
    """HE plot: significance- or effect-scaled H ellipse over the E ellipse."""
    ell_h, ell_e = mlm_mod.he_ellipses(h, e, df_e, coords=coords,
                                       center=center, scaling=scaling,
                                       alpha=alpha, df_h=df_h, level=level)
    layers = [AxisLayer(label_x=names[0], label_y=names[1]),
              EllipseLayer(ell_e, Style(stroke=PALETTE["e"], width=1.6)),
              EllipseLayer(ell_h, Style(stroke=PALETTE["h"], width=1.6)),
              TextLayer(tuple(ell_e.center), "E",
                        Style(stroke="none", fill=PALETTE["e"]), size=12.0),
              TextLayer(tuple(ell_h.center + ell_h.radii[0] *
                              ell_h.frame[:, 0] * 0.7), "H",
                        Style(stroke="none", fill=PALETTE["h"]), size=12.0)]
    if means is not None:
        pts = np.asarray(means, dtype=float)[:, list(coords)]
        layers.append(PointsLayer(pts, Style(stroke=PALETTE["data"]),
                                  marker="dot", size=2.5))
        if labels is not None:
            for lab, pt in zip(labels, pts):
                layers.append(TextLayer((pt[0], pt[1]), str(lab),
                                        Style(stroke="none",
                                              fill="#000000"), size=10.0))
    return Scene(layers=layers, title=title)


def build_canonical_he(gs, alpha=0.05, level=0.68, vector_scale=None,
                       title=""):
    """HE plot in canonical score space plus structure-coefficient vectors."""
    can = mlm_mod.canonical(gs)
    if can.scores.shape[1] < 2:
        raise ValueError("need at least two canonical dimensions")
    x, _, _ = mlm_mod.manova_design(gs)
    fit_z = mlm_mod.mlm_fit(x, can.scores,
                            names=("can1", "can2"))
    hyp = mlm_mod.overall_hypothesis(gs.g)
    h_z, e_z = mlm_mod.hypothesis_matrices(fit_z, hyp)
    ell_h, ell_e = mlm_mod.he_ellipses(h_z, e_z, fit_z.df_e, coords=(0, 1),
                                       center=fit_z.y_mean,
                                       scaling="effect", level=level)
    if vector_scale is None:
        vector_scale = 0.9 * float(ell_h.radii[0])
    layers = [AxisLayer(label_x=f"canonical 1 ({can.percent[0]:.1f}%)",
                        label_y=f"canonical 2 ({can.percent[1]:.1f}%)"),
              EllipseLayer(ell_e, Style(stroke=PALETTE["e"], width=1.6)),
              EllipseLayer(ell_h, Style(stroke=PALETTE["h"], width=1.6))]
    layers.append(PointsLayer(can.group_means,
                              Style(stroke=PALETTE["data"]), marker="dot",
                              size=2.5))
    for lab, pt in zip(can.group_labels, can.group_means):
        layers.append(TextLayer((pt[0], pt[1]), str(lab),
                                Style(stroke="none", fill="#000000"),
                                size=10.0))
    for name, row in zip(gs.names, can.structure):
        head = (vector_scale * row[0], vector_scale * row[1])
        layers.append(ArrowLayer((0.0, 0.0), head,
                                 Style(stroke=PALETTE["accent"],
                                       width=1.2)))
        layers.append(TextLayer(head, name,
                                Style(stroke="none",
                                      fill=PALETTE["accent"]), size=10.0))
    return Scene(layers=layers, title=title)


def build_ridge_trace(trace, names=("b1", "b2"), title=""):
    """Bivariate ridge path with a half-radius variance ellipse per k."""
    layers = [AxisLayer(label_x=names[0], label_y=names[1])]
    path = np.array([t["beta"] for t in trace])
    layers.append(PolylineLayer(path, Style(stroke=PALETTE["muted"],
                                            width=1.0, dash="4,3")))
    layers.append(PointsLayer(path, Style(stroke=PALETTE["data"]),
                              marker="dot", size=2.0))
    for t in trace:
        layers.append(EllipseLayer(t["ellipse"],
                                   Style(stroke=PALETTE["e"], width=1.2)))
        layers.append(TextLayer((t["beta"][0], t["beta"][1]),
                                f' k={t["k"]:g}',
                                Style(stroke="none", fill="#000000"),
                                size=9.0))
    return Scene(layers=layers, title=title)


def build_kiss_locus(f1, f2, radii1=(1.0, 2.0, 3.0), radii2=None,
                     mark_radii=(2.0, 3.0), bbox=None, resolution=96,
                     title=""):
    """Two concentric families, the traced locus, and marked kiss points."""
    if bbox is None:
        span = np.linalg.norm(f2.m - f1.m) + 4.0
        cx, cy = 0.5 * (f1.m + f2.m)
        bbox = (cx - span, cx + span, cy - span, cy + span)
    locus = kissing.trace_locus(f1, f2, bbox, resolution)
    layers = [AxisLayer()]
    for r in radii1:
        layers.append(EllipseLayer(f1.level_ellipse(r),
                                   Style(stroke=PALETTE["h"], width=1.1)))
    if radii2 is None:
        radii2 = [kissing.osculation_point(f1, f2, r, locus=locus)[1]
                  for r in mark_radii]
        radii2 = [1.0] + [float(r) for r in radii2]
    for r in radii2:
        layers.append(EllipseLayer(f2.level_ellipse(r),
                                   Style(stroke=PALETTE["e"], width=1.1)))
    for pl in locus["polylines"]:
        layers.append(PolylineLayer(pl, Style(stroke=PALETTE["data"],
                                              width=1.8)))
    marks = np.array([kissing.osculation_point(f1, f2, r, locus=locus)[0]
                      for r in mark_radii])
    if marks.size:
        layers.append(PointsLayer(marks, Style(stroke=PALETTE["data"],
                                               width=1.4),
                                  marker="square", size=3.5))
    layers.append(PointsLayer(np.array([f1.m, f2.m]),
                              Style(stroke=PALETTE["data"]), marker="dot",
                              size=2.5))
    return Scene(layers=layers, viewport=bbox, title=title)


def build_meta_panel(studies, pooled, level=0.40, blups=None, delta=None,
                     names=("effect 1", "effect 2"), title=""):
    """Study estimates with covariance ellipses plus the pooled summary.

    With blups/delta supplied it shows the random-effects view: BLUP
    points, their covariance ellipses, the between-study ellipse and
    arrows from each study estimate to its BLUP.
    """
    c2 = dist.chi2_quantile(level, 2)
    layers = [AxisLayer(label_x=names[0], label_y=names[1])]
    pts = np.array([s.y for s in studies])
    for s in studies:
        layers.append(EllipseLayer(ge.from_moment(c2 * s.s_mat, s.y),
                                   Style(stroke=PALETTE["h"], width=1.0,
                                         dash="5,3")))
    layers.append(PointsLayer(pts, Style(stroke=PALETTE["h"]),
                              marker="dot", size=2.5))
    for s in studies:
        if s.label:
            layers.append(TextLayer((s.y[0], s.y[1]), " " + s.label,
                                    Style(stroke="none", fill="#000000"),
                                    size=9.0))
    beta = np.asarray(pooled["beta"], dtype=float)
    layers.append(EllipseLayer(ge.from_moment(c2 * pooled["cov"], beta),
                               Style(stroke=PALETTE["e"], width=1.8)))
    layers.append(PointsLayer(np.array([beta]),
                              Style(stroke=PALETTE["e"]), marker="dot",
                              size=3.0))
    if delta is not None:
        layers.append(EllipseLayer(ge.from_moment(c2 * delta, beta),
                                   Style(stroke=PALETTE["accent"],
                                         width=1.4, dash="2,3")))
    if blups is not None:
        for s, b in zip(studies, blups):
            layers.append(ArrowLayer(tuple(s.y), tuple(b["beta"]),
                                     Style(stroke=PALETTE["muted"],
                                           width=0.9)))
            layers.append(EllipseLayer(ge.from_moment(c2 * b["cov"],
                                                      b["beta"]),
                                       Style(stroke=PALETTE["h"],
                                             width=1.0)))
    return Scene(layers=layers, title=title)


def build_avp_panel(avpres, level=0.50, names=("x | others", "y | others"),
                    title=""):
    """Added-variable scatter with its coverage ellipse and fitted line."""
    pts = np.column_stack([avpres["x_star"], avpres["y_star"]])
    sample = st.Sample(pts, names)
    ell = st.data_ellipsoid(sample, st.CoverageSpec.chisq(level))
    span = float(ell.radii[0]) * 1.2
    line = np.array([[-span, -span * avpres["slope"]],
                     [span, span * avpres["slope"]]])
    layers = [AxisLayer(label_x=names[0], label_y=names[1]),
              PointsLayer(pts, Style(stroke=PALETTE["data"], width=0.6),
                          marker="circle", size=2.0),
              EllipseLayer(ell, Style(stroke=PALETTE["h"], width=1.5)),
              PolylineLayer(line, Style(stroke=PALETTE["data"], width=1.4))]
    return Scene(layers=layers, title=title)


def build_avp_marginal_overlay(x, y, k, level=0.50, names=None, title=""):
    """Added-variable view with the mean-centered marginal view overlaid.

    Open circles are the centered marginal points, filled dots the
    residual points, with arrows joining each pair; both coverage
    ellipses are drawn.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    res = linmod.avp(x, y, k)
    if names is None:
        names = (f"x{k + 1}", "y")
    marg = np.column_stack([x[:, k] - x[:, k].mean(), y - y.mean()])
    cond = np.column_stack([res["x_star"], res["y_star"]])
    ell_m = st.data_ellipsoid(st.Sample(marg, names),
                              st.CoverageSpec.chisq(level))
    ell_c = st.data_ellipsoid(st.Sample(cond, names),
                              st.CoverageSpec.chisq(level))
    layers = [AxisLayer(label_x=names[0] + " (centered | residual)",
                        label_y=names[1])]
    for a, b in zip(marg, cond):
        layers.append(ArrowLayer(tuple(a), tuple(b),
                                 Style(stroke=PALETTE["muted"],
                                       width=0.7)))
    layers.append(PointsLayer(marg, Style(stroke=PALETTE["e"], width=0.8),
                              marker="circle", size=2.2))
    layers.append(PointsLayer(cond, Style(stroke=PALETTE["h"]),
                              marker="dot", size=2.2))
    layers.append(EllipseLayer(ell_m, Style(stroke=PALETTE["e"],
                                            width=1.5)))
    layers.append(EllipseLayer(ell_c, Style(stroke=PALETTE["h"],
                                            width=1.5)))
    slope_m = float(np.cov(marg.T, ddof=1)[0, 1] / np.var(marg[:, 0],
                                                          ddof=1))
    span = float(ell_m.radii[0]) * 1.1
    layers.append(PolylineLayer(
        np.array([[-span, -span * slope_m], [span, span * slope_m]]),
        Style(stroke=PALETTE["e"], width=1.2, dash="5,3")))
    layers.append(PolylineLayer(
        np.array([[-span, -span * res["slope"]],
                  [span, span * res["slope"]]]),
        Style(stroke=PALETTE["h"], width=1.2)))
    return Scene(layers=layers, title=title)


def build_beta_space_panel(fit, coords, alpha=0.05, names=None, title=""):
    """Joint confidence ellipse, CI-generating ellipse and axis shadows."""
    coords = list(coords)
    joint = linmod.confidence_ellipsoid(
        fit, coords, linmod.ConfidenceSpec(kind="joint", alpha=alpha,
                                           d=len(coords)))
    ci = linmod.confidence_ellipsoid(
        fit, coords, linmod.ConfidenceSpec(kind="ci", alpha=alpha))
    if names is None:
        names = tuple(fit.names[c] for c in coords)
    layers = [AxisLayer(label_x=names[0], label_y=names[1]),
              EllipseLayer(joint, Style(stroke=PALETTE["accent"],
                                        width=1.6)),
              EllipseLayer(ci, Style(stroke=PALETTE["h"], width=1.6)),
              PointsLayer(np.array([joint.center]),
                          Style(stroke=PALETTE["data"]), marker="dot",
                          size=2.5),
              PointsLayer(np.array([[0.0, 0.0]]),
                          Style(stroke=PALETTE["data"], width=1.2),
                          marker="square", size=2.5)]
    lo0, hi0 = st.univariate_shadow(ci, np.array([1.0, 0.0]))
    lo1, hi1 = st.univariate_shadow(ci, np.array([0.0, 1.0]))
    base = joint.center - 1.25 * joint.radii[0]
    layers.append(PolylineLayer(np.array([[lo0, base[1]], [hi0, base[1]]]),
                                Style(stroke=PALETTE["h"], width=3.0)))
    layers.append(PolylineLayer(np.array([[base[0], lo1], [base[0], hi1]]),
                                Style(stroke=PALETTE["h"], width=3.0)))
    return Scene(layers=layers, title=title)


_FIGURE_BUILDERS = {
    "data_ellipse_panel": build_data_ellipse_panel,
    "scatterplot_matrix": build_scatterplot_matrix,
    "he_plot": build_he_plot,
    "canonical_he": build_canonical_he,
    "ridge_trace": build_ridge_trace,
    "kiss_locus": build_kiss_locus,
    "meta_panel": build_meta_panel,
    "avp_panel": build_avp_panel,
    "avp_marginal_overlay": build_avp_marginal_overlay,
    "beta_space_panel": build_beta_space_panel,
}


def figure(kind, *args, **kwargs):
    """Build a named figure scene; see _FIGURE_BUILDERS for the catalog."""
    try:
        builder = _FIGURE_BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown figure kind {kind!r}; expected one of "
                         f"{sorted(_FIGURE_BUILDERS)}") from None
    return builder(*args, **kwargs)
