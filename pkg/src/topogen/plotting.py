"""Deterministic SVG renderings of persistence diagrams and barcodes.

H0 features are drawn in black (circles in diagrams), H1 features in red
(triangles in diagrams). Infinite features sit at the scale cap; in
barcodes they end in an arrowhead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from topogen.errors import InputError
from topogen.persistence import PersistenceDiagram, barcodes

PLOT_KINDS = ("persistence_diagram", "rotated_persistence_diagram", "barcode")
COLORS = {0: "#000000", 1: "#d62728"}

WIDTH = 420
HEIGHT = 360
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 52, 20, 30, 44
ROW = 6  # barcode row pitch
MARK = 3.5  # marker radius


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    scale_cap: float
    dims: tuple[int, ...] = (0, 1)
    path: Optional[str] = None
    title: str = ""

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise InputError(f"plot kind must be one of {PLOT_KINDS}")
        if not (math.isfinite(self.scale_cap) and self.scale_cap > 0):
            raise InputError("scale cap must be a positive finite number")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))


def _f(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _label(v: float) -> str:
    return format(v, ".3g")


class _Frame:
    """Maps data coordinates ``[0, xmax] x [0, ymax]`` onto the plot area."""

    def __init__(self, width: float, height: float, xmax: float, ymax: float):
        self.width, self.height = width, height
        self.x0, self.x1 = MARGIN_L, width - MARGIN_R
        self.y0, self.y1 = height - MARGIN_B, MARGIN_T  # bottom, top in pixels
        self.xmax, self.ymax = xmax, ymax

    def x(self, v: float) -> float:
        return self.x0 + (self.x1 - self.x0) * v / self.xmax

    def y(self, v: float) -> float:
        return self.y0 - (self.y0 - self.y1) * v / self.ymax


def _header(width: float, height: float, title: str) -> list[str]:
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">',
        "<defs>",
        '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" '
        'markerHeight="6" orient="auto-start-reverse"><path d="M0,0 L10,5 L0,10 z"/></marker>',
        "</defs>",
        f'<rect x="0" y="0" width="{_f(width)}" height="{_f(height)}" fill="#ffffff"/>',
    ]
    if title:
        out.append(f'<text x="{_f(width / 2)}" y="18" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="13">{escape(title)}</text>')
    return out


def _axes(fr: _Frame, xlabel: str, ylabel: str, yticks: bool = True) -> list[str]:
    out = [
        '<g class="axes" stroke="#000000" stroke-width="1" fill="none">',
        f'<line x1="{_f(fr.x0)}" y1="{_f(fr.y0)}" x2="{_f(fr.x1)}" y2="{_f(fr.y0)}"/>',
        f'<line x1="{_f(fr.x0)}" y1="{_f(fr.y0)}" x2="{_f(fr.x0)}" y2="{_f(fr.y1)}"/>',
        "</g>",
        '<g class="ticks" font-family="sans-serif" font-size="10" fill="#000000">',
    ]
    for i in range(5):
        v = fr.xmax * i / 4
        x = fr.x(v)
        out.append(f'<line x1="{_f(x)}" y1="{_f(fr.y0)}" x2="{_f(x)}" y2="{_f(fr.y0 + 4)}" stroke="#000000"/>')
        out.append(f'<text x="{_f(x)}" y="{_f(fr.y0 + 15)}" text-anchor="middle">{_label(v)}</text>')
        if yticks:
            v = fr.ymax * i / 4
            y = fr.y(v)
            out.append(f'<line x1="{_f(fr.x0 - 4)}" y1="{_f(y)}" x2="{_f(fr.x0)}" y2="{_f(y)}" stroke="#000000"/>')
            out.append(f'<text x="{_f(fr.x0 - 6)}" y="{_f(y + 3)}" text-anchor="end">{_label(v)}</text>')
    out.append("</g>")
    out.append(f'<text x="{_f((fr.x0 + fr.x1) / 2)}" y="{_f(fr.height - 8)}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="11">{escape(xlabel)}</text>')
    if ylabel:
        cx, cy = 14, (fr.y0 + fr.y1) / 2
        out.append(f'<text x="{_f(cx)}" y="{_f(cy)}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11" transform="rotate(-90 {_f(cx)} {_f(cy)})">{escape(ylabel)}</text>')
    return out


def _extent(diagram: PersistenceDiagram, spec: PlotSpec) -> float:
    """Axis range: the cap, widened if a finite value lies beyond it."""
    finite = [v for p in diagram.pairs if p.dim in spec.dims
              for v in (p.birth, p.death) if math.isfinite(v)]
    return max([spec.scale_cap] + finite)


def _mark(dim: int, x: float, y: float, infinite: bool) -> str:
    cls = f'class="mark h{dim}{" inf" if infinite else ""}"'
    color = COLORS.get(dim, "#1f77b4")
    if dim == 0:
        return f'<circle {cls} cx="{_f(x)}" cy="{_f(y)}" r="{_f(MARK)}" fill="{color}"/>'
    r = MARK * 1.2
    pts = f"{_f(x)},{_f(y - r)} {_f(x - r)},{_f(y + r * 0.8)} {_f(x + r)},{_f(y + r * 0.8)}"
    return f'<polygon {cls} points="{pts}" fill="{color}"/>'


def _cap_line(fr: _Frame, cap: float, horizontal: bool) -> list[str]:
    style = 'stroke="#7f7f7f" stroke-dasharray="4 3" stroke-width="1"'
    if horizontal:
        y = fr.y(cap)
        return [f'<line class="cap" x1="{_f(fr.x0)}" y1="{_f(y)}" x2="{_f(fr.x1)}" y2="{_f(y)}" {style}/>',
                f'<text x="{_f(fr.x1)}" y="{_f(y - 4)}" text-anchor="end" font-family="sans-serif" '
                f'font-size="10" fill="#7f7f7f">cap {_label(cap)}</text>']
    x = fr.x(cap)
    return [f'<line class="cap" x1="{_f(x)}" y1="{_f(fr.y0)}" x2="{_f(x)}" y2="{_f(fr.y1)}" {style}/>',
            f'<text x="{_f(x)}" y="{_f(fr.y1 - 4)}" text-anchor="end" font-family="sans-serif" '
            f'font-size="10" fill="#7f7f7f">cap {_label(cap)}</text>']


def _diagram_svg(diagram: PersistenceDiagram, spec: PlotSpec, rotated: bool) -> str:
    ext = _extent(diagram, spec)
    fr = _Frame(WIDTH, HEIGHT, ext, ext)
    ylabel = "death - birth" if rotated else "death"
    out = _header(WIDTH, HEIGHT, spec.title)
    out += _axes(fr, "birth", ylabel)
    if rotated:
        out.append(f'<line class="diagonal" x1="{_f(fr.x(0))}" y1="{_f(fr.y(0))}" x2="{_f(fr.x(ext))}" '
                   f'y2="{_f(fr.y(0))}" stroke="#7f7f7f" stroke-width="1"/>')
    else:
        out.append(f'<line class="diagonal" x1="{_f(fr.x(0))}" y1="{_f(fr.y(0))}" x2="{_f(fr.x(ext))}" '
                   f'y2="{_f(fr.y(ext))}" stroke="#7f7f7f" stroke-width="1"/>')
    out += _cap_line(fr, spec.scale_cap, horizontal=True)
    out.append('<g class="marks">')
    for p in diagram.pairs:
        if p.dim not in spec.dims:
            continue
        death = spec.scale_cap if p.is_infinite else p.death
        y = death - p.birth if rotated else death
        out.append(_mark(p.dim, fr.x(p.birth), fr.y(max(y, 0.0)), p.is_infinite))
    out.append("</g>")
    out += _legend(fr, spec.dims)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _legend(fr: _Frame, dims: Sequence[int]) -> list[str]:
    out = ['<g class="legend" font-family="sans-serif" font-size="10">']
    x, y = fr.x0 + 10, fr.y1 + 12
    for dim in dims:
        out.append(_mark(dim, x, y, False).replace('class="mark', 'class="key'))
        out.append(f'<text x="{_f(x + 8)}" y="{_f(y + 3)}">H{dim}</text>')
        y += 14
    out.append("</g>")
    return out


def _barcode_svg(diagram: PersistenceDiagram, spec: PlotSpec) -> str:
    bars = [b for b in barcodes(diagram, spec.scale_cap) if b.dim in spec.dims]
    ext = _extent(diagram, spec)
    height = MARGIN_T + MARGIN_B + ROW * max(len(bars), 1) + ROW
    fr = _Frame(WIDTH, height, ext, 1.0)
    out = _header(WIDTH, height, spec.title)
    out += _axes(fr, "scale", "", yticks=False)
    out += _cap_line(fr, spec.scale_cap, horizontal=False)
    out.append('<g class="bars" stroke-width="2.5">')
    for i, b in enumerate(bars):
        y = fr.y1 + ROW * (i + 1)
        cls = f"bar h{b.dim}" + (" inf" if b.infinite else "")
        marker = ' marker-end="url(#arrow)"' if b.infinite else ""
        out.append(f'<line class="{cls}" x1="{_f(fr.x(b.birth))}" y1="{_f(y)}" x2="{_f(fr.x(b.death))}" '
                   f'y2="{_f(y)}" stroke="{COLORS.get(b.dim, "#1f77b4")}"{marker}/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(diagram: PersistenceDiagram, spec: PlotSpec) -> str:
    """SVG text for ``diagram``; also written to ``spec.path`` when set."""
    if spec.kind == "barcode":
        svg = _barcode_svg(diagram, spec)
    else:
        svg = _diagram_svg(diagram, spec, rotated=spec.kind == "rotated_persistence_diagram")
    if spec.path is not None:
        with open(spec.path, "w", encoding="utf-8", newline="") as fh:
            fh.write(svg)
    return svg


def _strip_header(svg: str) -> tuple[float, float, str]:
    """Width, height and inner markup of an SVG produced here."""
    first, rest = svg.split("\n", 1)
    w = float(first.split('width="', 1)[1].split('"', 1)[0])
    h = float(first.split('height="', 1)[1].split('"', 1)[0])
    inner = rest.rsplit("</svg>", 1)[0]
    return w, h, inner


def compose_rows(rows: Sequence[Sequence[str]], gap: float = 10.0) -> str:
    """Tile SVGs produced here into rows, first row on top.

    Each panel becomes a nested ``<svg>``; its marker id gets a panel
    suffix so ids stay unique in the combined document.
    """
    panels = []
    y = 0.0
    width = 0.0
    for row in rows:
        x, row_h = 0.0, 0.0
        for svg in row:
            w, h, inner = _strip_header(svg)
            k = len(panels)
            inner = inner.replace('id="arrow"', f'id="arrow-{k}"').replace("url(#arrow)", f"url(#arrow-{k})")
            panels.append(f'<svg x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" '
                          f'viewBox="0 0 {_f(w)} {_f(h)}">\n{inner}</svg>')
            x += w + gap
            row_h = max(row_h, h)
        width = max(width, x - gap)
        y += row_h + gap
    height = max(y - gap, 1.0)
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
            f'viewBox="0 0 {_f(width)} {_f(height)}">')
    return "\n".join([head, *panels, "</svg>"]) + "\n"
