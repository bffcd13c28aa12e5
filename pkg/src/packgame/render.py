"""SVG rendering of packing documents in strip coordinates."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from xml.sax.saxutils import escape

from .blend import InversiveVector, reflection_std, mat_vec, vector_to_standard
from .document import CircleRecord, PackingDocument
from .exact import number_to_json, simplify, xdiv

__all__ = ["RenderSpec", "render_svg", "visible_circles", "invert_document", "clip_line"]


@dataclass(frozen=True)
class RenderSpec:
    """Window ``[x0, x1] x [y0, y1]``, stroke width, fill and number precision."""

    x0: float = -1.0
    x1: float = 3.0
    y0: float = -0.1
    y1: float = 2.1
    stroke_width: float = 0.004
    stroke: str = "black"
    fill: str = "none"
    fill_rule: str = "nonzero"
    digits: int = 12
    labels: bool = False
    pixel_width: int = 800

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("empty render window")
        if self.digits < 1:
            raise ValueError("digits must be positive")

    @classmethod
    def for_strip(cls, n, **kw) -> RenderSpec:
        """Default window ``x in [-1, sqrt n + 1]``, ``y in [-0.1, 2.1]``."""
        return cls(x0=-1.0, x1=math.sqrt(float(Fraction(n))) + 1.0, **kw)


def _fmt(x: float, digits: int) -> str:
    s = format(float(x), f".{digits}g")
    return "0" if s in ("-0", "0") else s


def clip_line(nx: float, ny: float, t: float, spec: RenderSpec) -> tuple | None:
    """Segment of ``nx x + ny y = t`` inside the window, or ``None``."""
    norm = math.hypot(nx, ny)
    nx, ny, t = nx / norm, ny / norm, t / norm
    px, py = t * nx, t * ny
    dx, dy = -ny, nx
    lo, hi = -math.inf, math.inf
    for p, d, a, b in ((px, dx, spec.x0, spec.x1), (py, dy, spec.y0, spec.y1)):
        if abs(d) < 1e-15:
            if p < a or p > b:
                return None
            continue
        s1, s2 = (a - p) / d, (b - p) / d
        lo, hi = max(lo, min(s1, s2)), min(hi, max(s1, s2))
    if lo > hi:
        return None
    return (px + lo * dx, py + lo * dy, px + hi * dx, py + hi * dy)


def visible_circles(doc: PackingDocument, spec: RenderSpec) -> list[CircleRecord]:
    """Finite circles whose bounding box meets the window."""
    out = []
    for c in doc.circles:
        kind, x, y, r = c.float_circle()
        if kind != "circle":
            continue
        if x + r >= spec.x0 and x - r <= spec.x1 and y + r >= spec.y0 and y - r <= spec.y1:
            out.append(c)
    return out


def render_svg(doc: PackingDocument, spec: RenderSpec | None = None) -> str:
    """SVG 1.1 text: one ``circle`` per visible finite circle, clipped ``line``s for lines."""
    spec = spec or RenderSpec()
    f = lambda v: _fmt(v, spec.digits)  # noqa: E731
    w, h = spec.x1 - spec.x0, spec.y1 - spec.y0
    height = max(1, round(spec.pixel_width * h / w))
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{spec.pixel_width}" '
        f'height="{height}" viewBox="{f(spec.x0)} {f(-spec.y1)} {f(w)} {f(h)}">\n'
        f'<defs><clipPath id="win"><rect x="{f(spec.x0)}" y="{f(-spec.y1)}" width="{f(w)}" '
        f'height="{f(h)}"/></clipPath></defs>\n'
        f'<g clip-path="url(#win)" fill="{escape(spec.fill)}" fill-rule="{escape(spec.fill_rule)}" '
        f'stroke="{escape(spec.stroke)}" stroke-width="{f(spec.stroke_width)}">\n'
    )
    body = []
    for c in doc.circles:
        kind, a, b, r = c.float_circle()
        if kind == "line":
            seg = clip_line(a, b, r, spec)
            if seg is not None:
                x1, y1, x2, y2 = seg
                body.append(f'<line x1="{f(x1)}" y1="{f(-y1)}" x2="{f(x2)}" y2="{f(-y2)}"/>')
    labels = []
    for c in visible_circles(doc, spec):
        _, x, y, r = c.float_circle()
        body.append(f'<circle cx="{f(x)}" cy="{f(-y)}" r="{f(r)}"/>')
        if spec.labels:
            size = f(r * 0.8)
            text = escape(str(simplify(c.curvature)) if not isinstance(c.curvature, float) else f(c.curvature))
            labels.append(
                f'<text x="{f(x)}" y="{f(-y)}" font-size="{size}" text-anchor="middle" '
                f'dominant-baseline="central">{text}</text>'
            )
    out = head + "".join(s + "\n" for s in body) + "</g>\n"
    if labels:
        out += '<g clip-path="url(#win)" fill="black" stroke="none">\n' + "".join(s + "\n" for s in labels) + "</g>\n"
    return out + "</svg>\n"


# --- change of perspective -------------------------------------------------------------


def _std_vector(doc: PackingDocument, c: CircleRecord) -> tuple:
    if doc.meta.get("frame") == "lattice":
        return vector_to_standard(tuple(c.vec), Fraction(doc.meta["n"])).c
    return tuple(c.vec)


def _record_std(s: tuple, exact: bool) -> CircleRecord:
    co, b, bx, by = s
    if exact:
        b = simplify(b)
        if not b:
            return CircleRecord(tuple(s), 0, None, (bx, by, xdiv(co, 2)), True)
        k = simplify(b if float(b) > 0 else -b)
        return CircleRecord(tuple(s), k, (xdiv(bx, b), xdiv(by, b)), None, isinstance(k, int))
    if abs(b) < 1e-12:
        return CircleRecord(tuple(s), 0.0, None, (bx, by, co / 2), True)
    k = abs(b)
    return CircleRecord(tuple(s), k, (bx / b, by / b), None, abs(k - round(k)) < 1e-9)


def invert_document(doc: PackingDocument, center: tuple, radius=1) -> PackingDocument:
    """Image of every circle under inversion in the circle ``|z - center| = radius``.

    Exact when the document is exact and ``center``/``radius`` are exact
    numbers.  The result is in the standard frame.
    """
    exact = doc.arithmetic == "exact" and not any(isinstance(t, float) for t in (*center, radius))
    mirror = InversiveVector.circle(center[0], center[1], radius)
    R = reflection_std(mirror)
    circles = []
    for c in doc.circles:
        s = _std_vector(doc, c)
        if exact:
            img = tuple(simplify(t) for t in mat_vec(R, s))
        else:
            img = tuple(
                sum(float(R[i][j]) * float(s[j]) for j in range(4)) for i in range(4)
            )
        circles.append(_record_std(img, exact))
    meta = dict(doc.meta)
    meta["frame"] = "standard"
    meta["arithmetic"] = "exact" if exact else "float"
    meta["perspective"] = {
        "inversion": {
            "center": [_num(center[0]), _num(center[1])],
            "radius": _num(radius),
        },
        "of": doc.meta.get("perspective", "strip"),
    }
    return replace(doc, meta=meta, circles=circles)


def _num(x):
    return repr(x) if isinstance(x, float) else number_to_json(x)
