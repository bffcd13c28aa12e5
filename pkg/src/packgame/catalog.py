"""Generator presets for the groups Gamma_n, n = 1..26 (plus an empty n = 3/2).

The presets are data (``data/catalog.json``).  Loading a catalog
rebuilds every isometry exactly, verifies it, recomputes the boundary data
(circle centers, radii, fixed points) and compares them with the printed
values, and compares the general s1/s2/Q1 formulas with the stored rows.
Anything that disagrees must be listed as a known discrepancy, otherwise
loading fails.
"""

from __future__ import annotations

import ast
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .boundary import CNum, I, circle_of, inversion_circle_of, point_of
from .exact import sqrt_exact, xadd, xdiv, xmul, xsub
from .isometry import (
    Isometry,
    from_matrix,
    general_s1_s2,
    point_inversion,
    q1_formula,
    reflection,
    rotation_pi,
    verify_symmetry,
)
from .lorentz import GramForm, LatticeVector, frame, gram, primitive_reduce

__all__ = [
    "CatalogError",
    "GeneratorEntry",
    "GeneratorPreset",
    "Catalog",
    "load_catalog",
    "default_catalog",
    "preset",
    "parse_expr",
]


class CatalogError(ValueError):
    pass


# --- a tiny exact expression language for the stored data -------------------


def parse_expr(text: str, n=None):
    """Evaluate ``text`` exactly.

    Grammar: integers, ``+ - * /``, parentheses, ``sqrt(k)``, ``I`` (the
    imaginary unit) and ``n``.  Returns an exact real or a :class:`CNum`.
    """
    tree = ast.parse(text, mode="eval")
    return _simplify_c(_eval(tree.body, n))


def _eval(node, n):
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return node.value
    if isinstance(node, ast.Name):
        if node.id == "I":
            return I
        if node.id == "n" and n is not None:
            return Fraction(n) if Fraction(n).denominator != 1 else int(n)
        raise CatalogError(f"unknown name {node.id!r}")
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, n)
        if isinstance(node.op, ast.USub):
            return -v
        if isinstance(node.op, ast.UAdd):
            return v
    if isinstance(node, ast.BinOp):
        a, b = _eval(node.left, n), _eval(node.right, n)
        cplx = isinstance(a, CNum) or isinstance(b, CNum)
        if isinstance(node.op, ast.Add):
            return CNum(a) + b if cplx and not isinstance(a, CNum) else (a + b if cplx else xadd(a, b))
        if isinstance(node.op, ast.Sub):
            return CNum(a) - b if cplx and not isinstance(a, CNum) else (a - b if cplx else xsub(a, b))
        if isinstance(node.op, ast.Mult):
            return CNum(a) * b if cplx and not isinstance(a, CNum) else (a * b if cplx else xmul(a, b))
        if isinstance(node.op, ast.Div):
            return CNum(a) / b if cplx and not isinstance(a, CNum) else (a / b if cplx else xdiv(a, b))
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id == "sqrt"
        and len(node.args) == 1
    ):
        arg = _eval(node.args[0], n)
        return sqrt_exact(arg)
    raise CatalogError(f"unsupported expression: {ast.dump(node)}")


def _simplify_c(v):
    if isinstance(v, CNum) and not v.im:
        return v.re
    return v


def _as_c(v) -> CNum:
    return v if isinstance(v, CNum) else CNum(v)


# --- presets ------------------------------------------------------------------


@dataclass
class GeneratorEntry:
    name: str
    isometry: Isometry
    type: int | None
    provenance: str
    vectors: dict[str, LatticeVector]
    printed: str
    c_data: dict
    discrepancies: list = field(default_factory=list)


@dataclass
class GeneratorPreset:
    n: Fraction
    generators: list[GeneratorEntry]
    seed: LatticeVector
    notes: str = ""
    discrepancies: list = field(default_factory=list)
    formula_checks: dict = field(default_factory=dict)
    cdata_checks: dict = field(default_factory=dict)

    @property
    def form(self) -> GramForm:
        return gram(self.n)

    @property
    def isometries(self) -> list[Isometry]:
        return [g.isometry for g in self.generators]

    def names(self) -> list[str]:
        return [g.name for g in self.generators]

    def __getitem__(self, name: str) -> GeneratorEntry:
        for g in self.generators:
            if g.name == name:
                return g
        raise KeyError(name)

    @property
    def label(self) -> str:
        return str(self.n)


def _vector(coords, form: GramForm) -> LatticeVector:
    return form.vector(tuple(parse_expr(str(c), form.n) for c in coords))


def _build_entry(rec: dict, form: GramForm) -> GeneratorEntry:
    kind = rec["kind"]
    vecs = {k: _vector(v, form) for k, v in rec.get("vectors", {}).items()}
    name = rec["name"]
    if kind == "reflection":
        (mirror,) = vecs.values()
        iso = reflection(mirror, name)
    elif kind == "rotation":
        A, B = vecs.values()
        iso = rotation_pi(A, B, name)
    elif kind == "point_inversion":
        (P,) = vecs.values()
        iso = point_inversion(P, name)
    elif kind == "glide":
        iso = from_matrix(rec["matrix"], form, "glide", name)
    else:
        raise CatalogError(f"unknown generator kind {kind!r}")
    return GeneratorEntry(
        name=name,
        isometry=iso,
        type=rec.get("type"),
        provenance=rec.get("provenance", ""),
        vectors=vecs,
        printed=rec.get("printed", ""),
        c_data=rec.get("c_data", {}),
        discrepancies=list(rec.get("discrepancies", [])),
    )


def _cdata_matches(entry: GeneratorEntry, form: GramForm) -> bool | None:
    """Compare recomputed boundary data with the printed values (None if not checkable)."""
    cd = entry.c_data
    n = form.n
    kind = entry.isometry.kind
    if kind == "reflection":
        (mirror,) = entry.vectors.values()
        circ = circle_of(mirror)
        if "line" in cd:
            if not circ.is_line:
                return False
            kind_ = "horizontal" if cd["line"]["axis"] == "y" else "vertical"
            return circ.line.kind == kind_ and xsub(circ.line.value, parse_expr(cd["line"]["value"], n)) == 0
        if circ.is_line:
            return False
        center = CNum(*circ.center)
        return center == _as_c(parse_expr(cd["center"], n)) and xsub(
            circ.radius, parse_expr(cd["radius"], n)
        ) == 0
    if kind == "point_inversion":
        (P,) = entry.vectors.values()
        (cx, cy), r = inversion_circle_of(P)
        return CNum(cx, cy) == _as_c(parse_expr(cd["center"], n)) and xsub(
            r, parse_expr(cd["radius"], n)
        ) == 0
    if kind == "rotation":
        pts = cd.get("points", {})
        for label, vec in entry.vectors.items():
            p = point_of(vec)
            if CNum(p.x, p.y) != _as_c(parse_expr(pts[label], n)):
                return False
        return True
    return None


def _load_preset(key: str, rec: dict, common: list, formula_rows: dict) -> GeneratorPreset:
    n = Fraction(rec["n"])
    form = gram(n)
    records = (list(common) if rec.get("common", True) else []) + list(rec["generators"])
    entries = [_build_entry(r, form) for r in records]
    discrepancies = []
    cdata = {}
    e1 = frame(form).e1
    for g in entries:
        report = verify_symmetry(g.isometry, form)
        if not report.ok:
            raise CatalogError(f"n={key} {g.name}: {report}")
        if g.isometry.kind == "reflection" and g.isometry(e1) == -e1:
            raise CatalogError(f"n={key}: R_e1 must not be a generator")
        known = {d["field"] for d in g.discrepancies}
        ok = _cdata_matches(g, form)
        cdata[g.name] = ok
        if ok is False and "c_data" not in known:
            raise CatalogError(f"n={key} {g.name}: boundary data disagree with {g.c_data.get('printed')!r}")
        for d in g.discrepancies:
            discrepancies.append({"generator": g.name, **d})
    checks = {}
    if n.denominator == 1:
        ni = int(n)
        formula = dict(general_s1_s2(ni)) if ni >= 4 else {}
        for label in ("s1", "s2"):
            if ni in formula_rows.get(label, []):
                table = next(g for g in entries if g.name == f"R_{label}")
                (vec,) = table.vectors.values()
                checks[label] = primitive_reduce(vec) == formula[label]
        if ni in formula_rows.get("Q1", []):
            table_q1 = next(v for g in entries for k, v in g.vectors.items() if k == "Q1")
            checks["Q1"] = primitive_reduce(table_q1) == q1_formula(ni)
        bad = [k for k, ok in checks.items() if not ok]
        if bad:
            raise CatalogError(f"n={key}: formula mismatch for {bad}")
    return GeneratorPreset(
        n=n,
        generators=entries,
        seed=e1,
        notes=rec.get("notes", ""),
        discrepancies=discrepancies,
        formula_checks=checks,
        cdata_checks=cdata,
    )


@dataclass
class Catalog:
    presets: dict[str, GeneratorPreset]
    path: str

    def __getitem__(self, n) -> GeneratorPreset:
        key = _key(n)
        if key not in self.presets:
            raise KeyError(f"no preset for n = {n}")
        return self.presets[key]

    def __contains__(self, n) -> bool:
        try:
            return _key(n) in self.presets
        except (ValueError, ZeroDivisionError):
            return False

    def keys(self) -> list[str]:
        return sorted(self.presets, key=Fraction)


def _key(n) -> str:
    f = Fraction(n)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _default_path() -> str:
    env = os.environ.get("PACK_CATALOG")
    if env:
        return env
    return str(resources.files("packgame") / "data" / "catalog.json")


def load_catalog(path: str | os.PathLike | None = None) -> Catalog:
    path = str(path) if path is not None else _default_path()
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "packgame-catalog":
        raise CatalogError(f"{path} is not a catalog file")
    common = doc.get("common", [])
    rows = doc.get("formula_rows", {})
    presets = {k: _load_preset(k, rec, common, rows) for k, rec in doc["presets"].items()}
    return Catalog(presets, path)


@lru_cache(maxsize=4)
def _cached(path: str) -> Catalog:
    return load_catalog(path)


def default_catalog() -> Catalog:
    return _cached(_default_path())


def preset(n) -> GeneratorPreset:
    return default_catalog()[n]
