"""Static SVG and text renderings of factor planes and dendrograms.

Output depends only on the inputs; numbers are formatted with fixed
precision and a dot decimal separator so identical inputs give
byte-identical documents.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .ca import FactorSpace, inertia_explained
from .errors import FactorOutOfRange, InputError
from .seqclust import Dendrogram

__all__ = ["PointSet", "PlaneRender", "emit_plane_svg", "emit_dendrogram", "format_level"]

_STYLE = """
  .axis { stroke: #888; stroke-width: 1; }
  .row { fill: #1f4e9c; }
  .col { fill: #c0392b; }
  .supp { fill: none; stroke: #2e8b57; stroke-width: 1.5; }
  text { font-family: Helvetica, Arial, sans-serif; font-size: 10px; }
  .axislabel { font-size: 12px; fill: #333; }
  .link { fill: none; stroke: #222; stroke-width: 1; }
"""


def _f(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


@dataclass(frozen=True, eq=False)
class PointSet:
    """Points to draw in a factor plane.

    ``coords`` has one row per point and at least as many columns as the
    highest factor requested.  ``kind`` is ``"row"``, ``"col"`` or
    ``"supp"``.
    """

    labels: tuple[str, ...]
    coords: np.ndarray
    kind: str = "row"

    def __post_init__(self):
        if self.kind not in ("row", "col", "supp"):
            raise InputError(f"unknown point kind {self.kind!r}")
        coords = np.atleast_2d(np.asarray(self.coords, dtype=np.float64))
        if len(self.labels) != coords.shape[0]:
            raise InputError("labels and coordinates differ in length")
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        object.__setattr__(self, "coords", coords)


@dataclass(frozen=True)
class PlaneRender:
    """Options for one factor-plane display.

    Sets with more than ``max_labels`` points are drawn as unlabelled dots.
    """

    factors: tuple[int, int] = (1, 2)
    show_rows: bool = True
    show_cols: bool = True
    supplementary: tuple[PointSet, ...] = ()
    max_labels: int = 40
    size: int = 640
    margin: int = 60
    title: str = ""

    def __post_init__(self):
        a, b = self.factors
        if a == b:
            raise InputError("the two factors of a plane must differ")


def _radii(labels: Sequence[str], overlays: Mapping[str, float] | None, base: float) -> list[float]:
    if not overlays:
        return [base] * len(labels)
    vmax = max((v for v in overlays.values() if v > 0), default=0.0)
    out = []
    for lab in labels:
        v = overlays.get(lab)
        if v is None or vmax == 0:
            out.append(base)
        else:
            out.append(base + 12.0 * np.sqrt(max(v, 0.0) / vmax))
    return out


def emit_plane_svg(space: FactorSpace, render: PlaneRender = PlaneRender(), overlays: Mapping[str, float] | None = None) -> str:
    """Scatter of rows, columns and supplementary points on two factors.

    Both axes share one scale.  ``overlays`` maps point labels to
    non-negative sizes; glyph area grows with the value.
    """
    a, b = render.factors
    for alpha in (a, b):
        if not 1 <= alpha <= space.n_factors:
            raise FactorOutOfRange(f"factor {alpha} not in 1..{space.n_factors}")

    sets: list[PointSet] = []
    if render.show_rows:
        sets.append(PointSet(space.row_labels, space.row_coords, "row"))
    if render.show_cols:
        sets.append(PointSet(space.col_labels, space.col_coords, "col"))
    for s in render.supplementary:
        if s.coords.shape[1] < max(a, b):
            raise FactorOutOfRange("supplementary coordinates lack the requested factors")
        sets.append(s)

    xy = [s.coords[:, [a - 1, b - 1]] for s in sets]
    allpts = np.vstack(xy + [np.zeros((1, 2))])
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-12))
    W = H = render.size
    m = render.margin
    scale = (W - 2 * m) / span
    cx = m + (W - 2 * m - (hi[0] - lo[0]) * scale) / 2
    cy = m + (H - 2 * m - (hi[1] - lo[1]) * scale) / 2

    def px(x):
        return cx + (x - lo[0]) * scale

    def py(y):
        return H - (cy + (y - lo[1]) * scale)

    pa = 100 * inertia_explained(space, a)
    pb = 100 * inertia_explained(space, b)
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f"<style>{_STYLE}</style>",
    ]
    if render.title:
        out.append(f'<title>{escape(render.title)}</title>')
    ox, oy = px(0.0), py(0.0)
    out.append(f'<line class="axis" x1="{_f(m / 2)}" y1="{_f(oy)}" x2="{_f(W - m / 2)}" y2="{_f(oy)}"/>')
    out.append(f'<line class="axis" x1="{_f(ox)}" y1="{_f(m / 2)}" x2="{_f(ox)}" y2="{_f(H - m / 2)}"/>')
    out.append(
        f'<text class="axislabel" data-factor="{a}" data-percent="{pa:.4f}" x="{_f(W - m / 2)}" '
        f'y="{_f(oy - 6)}" text-anchor="end">Factor {a} ({pa:.2f}%)</text>'
    )
    out.append(
        f'<text class="axislabel" data-factor="{b}" data-percent="{pb:.4f}" x="{_f(ox + 6)}" '
        f'y="{_f(m / 2 + 12)}">Factor {b} ({pb:.2f}%)</text>'
    )
    for s, pts in zip(sets, xy):
        labelled = len(s.labels) <= render.max_labels
        base = 3.0 if labelled else 2.0
        radii = _radii(s.labels, overlays, base)
        out.append(f'<g class="{s.kind}set">')
        for lab, (x, y), r in zip(s.labels, pts, radii):
            X, Y = px(x), py(y)
            out.append(
                f'<circle class="point {s.kind}" cx="{_f(X)}" cy="{_f(Y)}" r="{_f(r)}">'
                f"<title>{escape(lab)}</title></circle>"
            )
            if labelled:
                out.append(f'<text x="{_f(X + r + 2)}" y="{_f(Y - 2)}">{escape(lab)}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def format_level(v: float) -> str:
    s = format(float(v), ".12g")
    return s if any(c in s for c in ".einf") else s + ".0"


def _tree(d: Dendrogram):
    nodes = {(i, i + 1): ("leaf", i) for i in range(len(d.leaves))}
    for m in d.merges:
        nodes[(m.start, m.stop)] = ("node", m.level, nodes.pop(m.left), nodes.pop(m.right))
    (root,) = nodes.values()
    return root


def _text(d: Dendrogram) -> str:
    lines: list[str] = []

    def walk(node, prefix, connector, child_prefix):
        if node[0] == "leaf":
            lines.append(f"{prefix}{connector}{d.leaves[node[1]]}")
            return
        _, level, left, right = node
        lines.append(f"{prefix}{connector}[{format_level(level)}]")
        walk(left, prefix + child_prefix, "|-- ", "|   ")
        walk(right, prefix + child_prefix, "`-- ", "    ")

    walk(_tree(d), "", "", "")
    return "\n".join(lines) + "\n"


def _svg(d: Dendrogram) -> str:
    n = len(d.leaves)
    step = 18.0 if n > 1 else 40.0
    m = 40.0
    W = 2 * m + step * max(n - 1, 1)
    H = 360.0
    label_band = 60.0
    top, bottom = m, H - label_band
    lmax = max((mg.level for mg in d.merges), default=0.0)
    yscale = (bottom - top) / lmax if lmax > 0 else 0.0
    xs = [m + step * i if n > 1 else W / 2 for i in range(n)]

    def y(level):
        return bottom - level * yscale

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(W)}" height="{_f(H)}" '
        f'viewBox="0 0 {_f(W)} {_f(H)}">',
        f"<style>{_STYLE}</style>",
    ]
    pos = {(i, i + 1): (xs[i], bottom) for i in range(n)}
    for mg in d.merges:
        (xl, yl), (xr, yr) = pos.pop(mg.left), pos.pop(mg.right)
        yn = y(mg.level)
        out.append(
            f'<path class="link" data-level={quoteattr(format_level(mg.level))} '
            f'd="M{_f(xl)},{_f(yl)} V{_f(yn)} H{_f(xr)} V{_f(yr)}"/>'
        )
        pos[(mg.start, mg.stop)] = ((xl + xr) / 2, yn)
    for i, lab in enumerate(d.leaves):
        out.append(
            f'<text class="leaf" x="{_f(xs[i])}" y="{_f(bottom + 8)}" '
            f'transform="rotate(90 {_f(xs[i])} {_f(bottom + 8)})">{escape(lab)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_dendrogram(d: Dendrogram, format: str = "text") -> str:
    """Render a sequence dendrogram; leaves keep their sequence order."""
    if format == "text":
        return _text(d)
    if format == "svg":
        return _svg(d)
    raise InputError(f"unknown dendrogram format {format!r}")
