"""JSON documents for packings and blend descriptors.

Numbers are written as strings (``"p"`` or ``"p/q"``) or as ``{a, b, d}`` objects for
elements of a quadratic field; float-mode blends are written as decimal
strings with ``"arithmetic": "float"`` in the meta block.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .blend import (
    BlendedGroup,
    BlendError,
    InversiveVector,
    ghost_face_n7,
    glue,
    preset_group,
    shift_wall,
    slice_ghost,
    vector_to_standard,
)
from .catalog import preset as load_preset
from .exact import number_from_json, number_to_json, simplify, xdiv
from .orbit import Packing

__all__ = [
    "CircleRecord",
    "PackingDocument",
    "document_from_packing",
    "dumps",
    "loads",
    "read_document",
    "write_document",
    "BlendDescriptor",
    "blend_from_descriptor",
    "default_strip_window",
]

FORMAT = "packgame-packing"
BLEND_FORMAT = "packgame-blend"


def _num_out(x):
    if isinstance(x, float):
        return repr(x)
    x = simplify(x)
    if isinstance(x, Fraction) and x.denominator == 1:
        x = x.numerator
    if isinstance(x, int):
        return str(x)
    return number_to_json(x)


def _num_in(obj, arithmetic: str):
    if arithmetic == "float":
        return float(obj)
    return number_from_json(obj)


def _is_int(x) -> bool:
    x = simplify(x)
    return isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1)


def _float_int(x: float) -> bool:
    return abs(x - round(x)) < 1e-9


@dataclass(frozen=True)
class CircleRecord:
    """One circle: its vector, curvature and center (or line data)."""

    vec: tuple
    curvature: Any
    center: tuple | None
    line: tuple | None
    integer_curvature: bool

    def to_json(self) -> dict:
        out = {
            "vec": [_num_out(c) for c in self.vec],
            "curvature": _num_out(self.curvature),
            "integer_curvature": self.integer_curvature,
        }
        if self.center is not None:
            out["center"] = {"x": _num_out(self.center[0]), "y": _num_out(self.center[1])}
        else:
            nx, ny, t = self.line
            out["line"] = {"normal": [_num_out(nx), _num_out(ny)], "offset": _num_out(t)}
        return out

    @classmethod
    def from_json(cls, obj: dict, arithmetic: str) -> CircleRecord:
        vec = tuple(_num_in(c, arithmetic) for c in obj["vec"])
        center = line = None
        if "center" in obj:
            center = (_num_in(obj["center"]["x"], arithmetic), _num_in(obj["center"]["y"], arithmetic))
        else:
            ln = obj["line"]
            line = tuple(_num_in(c, arithmetic) for c in ln["normal"]) + (_num_in(ln["offset"], arithmetic),)
        return cls(vec, _num_in(obj["curvature"], arithmetic), center, line, bool(obj["integer_curvature"]))

    def float_circle(self) -> tuple:
        """``("circle", x, y, r)`` or ``("line", nx, ny, t)`` in floats."""
        if self.center is not None:
            b = float(self.curvature)
            return ("circle", float(self.center[0]), float(self.center[1]), 1.0 / abs(b))
        nx, ny, t = self.line
        return ("line", float(nx), float(ny), float(t))


@dataclass
class PackingDocument:
    meta: dict
    circles: list[CircleRecord] = field(default_factory=list)

    @property
    def arithmetic(self) -> str:
        return self.meta.get("arithmetic", "exact")

    def to_json(self) -> dict:
        return {"format": FORMAT, "meta": self.meta, "circles": [c.to_json() for c in self.circles]}

    @classmethod
    def from_json(cls, obj: dict) -> PackingDocument:
        if obj.get("format") != FORMAT:
            raise ValueError("not a packing document")
        meta = obj["meta"]
        arith = meta.get("arithmetic", "exact")
        return cls(meta, [CircleRecord.from_json(c, arith) for c in obj["circles"]])


def _standard(pk: Packing, v) -> tuple:
    """Standard-frame entries ``(co-curvature, b, bx, by)`` of a packing vector."""
    if pk.form is not None:
        return vector_to_standard(tuple(v), pk.form.n).c
    return tuple(v)


def _record(pk: Packing, v) -> CircleRecord:
    exact = pk.geometry.exact
    s = _standard(pk, v)
    if not exact:
        s = tuple(float(c) for c in s)
    co, b, bx, by = s
    if (abs(b) < 1e-12) if not exact else not b:
        # line bx x + by y = co / 2 with (bx, by) a unit normal
        line = (bx, by, co / 2 if not exact else xdiv(co, 2))
        center = None
    else:
        center = (bx / b, by / b) if not exact else (xdiv(bx, b), xdiv(by, b))
        line = None
    k = pk.geometry.curvature(v)
    integer = _float_int(float(k)) if not exact else _is_int(k)
    return CircleRecord(tuple(v), simplify(k) if exact else float(k), center, line, integer)


def document_from_packing(pk: Packing, source: dict | None = None) -> PackingDocument:
    """Circles of ``pk`` in its canonical order, with a meta block."""
    meta = {
        "source": dict(source or {}),
        "delta": 4,
        "bound": _num_out(pk.bound if pk.geometry.exact else Fraction(pk.bound)),
        "complete": bool(pk.complete),
        "perspective": "strip",
        "frame": "lattice" if pk.form is not None else "standard",
        "arithmetic": "exact" if pk.geometry.exact else "float",
        "window": [repr(float(pk.window[0])), repr(float(pk.window[1]))],
        "classes": len(pk.classes),
        "count": len(pk.vectors),
    }
    if pk.form is not None:
        meta["n"] = format(pk.form.n)
    return PackingDocument(meta, [_record(pk, v) for v in pk.vectors])


def dumps(doc: PackingDocument) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation, trailing newline)."""
    return json.dumps(doc.to_json(), sort_keys=True, indent=1) + "\n"


def loads(text: str) -> PackingDocument:
    return PackingDocument.from_json(json.loads(text))


def write_document(doc: PackingDocument, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(doc))


def read_document(path) -> PackingDocument:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def default_strip_window(n) -> tuple[float, float]:
    """``[-1, sqrt n + 1]``: one period of the strip with a unit margin on each side."""
    return (-1.0, math.sqrt(float(Fraction(n))) + 1.0)


# --- blend descriptors ----------------------------------------------------------------


@dataclass
class BlendDescriptor:
    """``left``/``right`` preset keys, the glue ``face``, a wall ``offset`` and ghost ``slices``.

    Exactly one construction is described: ``offset`` alone (shift the
    ``v1`` wall of ``left``), ``right`` with ``face`` (glue), ``slices`` alone
    (ghost slicing of ``left``), or just ``left`` (the preset itself).
    """

    left: str
    right: str | None = None
    face: str | None = None
    offset: str | None = None
    slices: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "format": BLEND_FORMAT,
            "left": self.left,
            "right": self.right,
            "face": self.face,
            "offset": self.offset,
            "slices": list(self.slices),
        }

    @classmethod
    def from_json(cls, obj: dict) -> BlendDescriptor:
        if obj.get("format", BLEND_FORMAT) != BLEND_FORMAT:
            raise ValueError("not a blend descriptor")
        if "left" not in obj:
            raise ValueError("blend descriptor needs 'left'")
        off = obj.get("offset")
        right = obj.get("right")
        return cls(
            left=str(obj["left"]),
            right=None if right is None else str(right),
            face=obj.get("face"),
            offset=None if off is None else str(off),
            slices=list(obj.get("slices") or []),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"


def _slice_face(spec) -> InversiveVector:
    if spec == "ghost7":
        return ghost_face_n7()
    if isinstance(spec, dict) and "vec" in spec:
        return InversiveVector(tuple(number_from_json(c) for c in spec["vec"]))
    raise ValueError(f"unknown slice face {spec!r}")


def blend_from_descriptor(d: BlendDescriptor) -> BlendedGroup:
    left = load_preset(d.left)
    if d.offset is not None:
        if d.right is not None or d.slices:
            raise BlendError("an offset cannot be combined with gluing or slicing")
        return shift_wall(left, Fraction(d.offset))
    if d.right is not None:
        if d.slices:
            raise BlendError("slicing a glued blend is not supported")
        return glue(left, load_preset(d.right), d.face or "v1")
    if d.slices:
        if len(d.slices) != 1:
            raise BlendError("one slice at a time")
        sl = d.slices[0]
        return slice_ghost(left, _slice_face(sl.get("face")), sl.get("mode", "fill"))
    return preset_group(left)
