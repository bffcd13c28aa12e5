"""The ``pack`` command line.

Exit codes: 0 when every check passes, 1 on a verification failure, 2 on bad
input (unknown preset, unreadable file, malformed arguments).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .blend import BlendError, check_compatibility
from .catalog import CatalogError, default_catalog
from .document import (
    BlendDescriptor,
    blend_from_descriptor,
    default_strip_window,
    document_from_packing,
    read_document,
    write_document,
)
from .exact import number_to_json, simplify
from .isometry import verify_symmetry
from .lorentz import gram, mod8_obstruction, represents_norm
from .orbit import (
    check_apollonian_property,
    certify_clusters,
    check_packing_property,
    direct_search,
    preset_orbit,
    tangency_graph,
    transitivity_check,
)
from .render import RenderSpec, invert_document, render_svg

__all__ = ["main", "build_parser"]

OK, FAIL, BAD = 0, 1, 2


class BadInput(Exception):
    pass


def _preset(key: str):
    try:
        return default_catalog()[Fraction(key)]
    except (KeyError, ValueError, ZeroDivisionError) as e:
        raise BadInput(f"no preset for n = {key}") from e


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise BadInput(f"not a rational number: {text!r}") from e


def _line(out, status: bool | None, label: str, detail: str = "") -> None:
    tag = {True: "PASS", False: "FAIL", None: "INFO"}[status]
    out.write(f"[{tag}] {label}" + (f": {detail}" if detail else "") + "\n")


# --- catalog ------------------------------------------------------------------------


def _num(x):
    x = simplify(x)
    return str(x) if isinstance(x, int) else number_to_json(x)


def _cnum(z) -> str:
    re, im = simplify(z.re), simplify(z.im)
    if not im:
        return str(re)
    return f"{re} + ({im})*I" if re else f"({im})*I"


def _generator_json(g) -> dict:
    rep = verify_symmetry(g.isometry, g.isometry.form)
    return {
        "name": g.name,
        "kind": g.isometry.kind,
        "type": g.type,
        "provenance": g.provenance,
        "vectors": {k: [_num(c) for c in v.coords] for k, v in g.vectors.items()},
        "printed": g.printed,
        "c_data": g.c_data,
        "verify": {"form": rep.form_ok, "lattice": rep.lattice_ok, "orthochronous": rep.orthochronous_ok},
        "discrepancies": g.discrepancies,
    }


def cmd_catalog(args, out) -> int:
    cat = default_catalog()
    if args.action == "list":
        for key in cat.keys():
            p = cat[key]
            out.write(f"{key}\t{len(p.generators)} generators\t{' '.join(p.names())}\n")
        return OK
    if args.n is None:
        raise BadInput("catalog show needs N")
    p = _preset(args.n)
    gens = [_generator_json(g) for g in p.generators]
    extra = {}
    if p.n == 21:
        from .boundary import sigma_n21

        tau, _ = sigma_n21()
        extra["sigma"] = {
            "moebius": [_cnum(t) for t in (tau.a, tau.b, tau.c, tau.d)],
            "antiholomorphic": tau.antiholomorphic,
        }
    if args.json:
        doc = {"n": str(p.n), "generators": gens, "notes": p.notes, "discrepancies": p.discrepancies, **extra}
        out.write(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    else:
        out.write(f"n = {p.n}\n")
        for g in gens:
            vecs = "; ".join(f"{k} = [{', '.join(map(str, v))}]" for k, v in g["vectors"].items())
            ver = "ok" if all(g["verify"].values()) else f"FAILED {g['verify']}"
            out.write(f"  {g['name']:<12} {g['kind']:<15} type={g['type']} {vecs}  verify: {ver}\n")
            if g["c_data"]:
                out.write(f"  {'':<12} C-data: {json.dumps(g['c_data'], sort_keys=True)}\n")
        if extra:
            out.write(f"  sigma: {json.dumps(extra['sigma'], sort_keys=True)}\n")
        if p.notes:
            out.write(f"  notes: {p.notes}\n")
    bad = [g["name"] for g in gens if not all(g["verify"].values())]
    return FAIL if bad else OK


# --- verify -------------------------------------------------------------------------


def cmd_verify(args, out) -> int:
    n = _fraction(args.n)
    if n <= 0 or (4 * n - 2).denominator != 1:
        raise BadInput(f"n = {args.n} does not give an integral Gram matrix")
    form = gram(n)
    ok = True
    if n.denominator != 1:
        w = represents_norm(form, -4, 10)
        _line(out, None, "mod-8 obstruction", "not applicable to non-integer n")
        if w is not None:
            _line(out, False, "no norm -4 vectors", f"witness {list(w.coords)} has norm {w.norm()}")
            _line(out, False, "packing", "the norm -2 vectors do not form a packing")
        else:
            _line(out, True, "no norm -4 vectors", "none with coefficients <= 10")
        return FAIL if w is not None else OK
    holds = mod8_obstruction(form)
    _line(out, holds, "mod-8 obstruction", "x.x = 4 (mod 8) never occurs" if holds else "a residue reaches 4 mod 8")
    ok &= holds
    p = _preset(args.n)
    for g in p.generators:
        rep = verify_symmetry(g.isometry, form)
        _line(out, rep.ok, f"symmetry {g.name}", f"form={rep.form_ok} lattice={rep.lattice_ok} "
              f"orthochronous={rep.orthochronous_ok}")
        ok &= rep.ok
    t = time.perf_counter()
    window = default_strip_window(n)
    pk = preset_orbit(p, args.bound, window=window)
    _line(out, pk.complete, "orbit", f"{len(pk.classes)} classes, {len(pk)} circles in x = "
          f"[{window[0]:.4g}, {window[1]:.4g}] up to curvature {args.bound} ({time.perf_counter() - t:.2f} s)")
    ok &= pk.complete
    rep = check_packing_property(pk)
    _line(out, rep.ok, "packing property", f"{rep.pairs} pairs, mode {rep.mode}, "
          f"{len(rep.violations)} violations, {len(rep.odd_products)} odd products")
    ok &= rep.ok
    bad = [v for v in pk.vectors if not isinstance(pk.geometry.curvature(v), int) or pk.geometry.curvature(v) < 0]
    _line(out, not bad, "integer curvatures", f"{len(bad)} exceptions")
    ok &= not bad
    ob = min(args.bound, args.oracle_bound)
    ref = preset_orbit(p, ob * 3, window=(window[0] - 2 * window[1], 3 * window[1]))
    cands = direct_search(form, ob, window, admissible_against=ref)
    inside = [c for c in cands if c in pk]
    good = transitivity_check(cands, pk) and len(inside) == len(cands)
    _line(out, good, "transitivity", f"{len(cands)} admissible norm -2 vectors up to {ob}, "
          f"{len(cands) - len(inside)} missing from the orbit")
    ok &= good
    return OK if ok else FAIL


# --- generate / glue ----------------------------------------------------------------


def _read_descriptor(path: str) -> BlendDescriptor:
    try:
        with open(path, encoding="utf-8") as fh:
            return BlendDescriptor.from_json(json.load(fh))
    except (OSError, ValueError) as e:
        raise BadInput(f"cannot read blend descriptor {path}: {e}") from e


def _blend_doc(desc: BlendDescriptor, bound, exact):
    try:
        bl = blend_from_descriptor(desc)
    except (KeyError, ValueError) as e:
        raise BadInput(str(e)) from e
    ex = bl.exact_capable if exact is None else exact
    pk = bl.orbit(bound, exact=ex)
    return bl, pk, document_from_packing(pk, {"blend": desc.to_json(), "description": bl.description})


def cmd_generate(args, out) -> int:
    bound = _fraction(args.bound)
    if args.blend:
        _, pk, doc = _blend_doc(_read_descriptor(args.blend), bound, None)
    else:
        if args.n is None:
            raise BadInput("generate needs N or --blend")
        p = _preset(args.n)
        pk = preset_orbit(p, bound, window=default_strip_window(p.n))
        doc = document_from_packing(pk, {"n": str(p.n)})
    write_document(doc, args.out)
    _line(out, pk.complete, "generate", f"{len(doc.circles)} circles written to {args.out}")
    return OK


def cmd_glue(args, out) -> int:
    if args.offset is not None and args.right is not None:
        raise BadInput("--offset shifts the v1 wall of --left and cannot be combined with --right")
    if args.offset is None and args.right is None:
        raise BadInput("glue needs --right or --offset")
    desc = BlendDescriptor(
        left=args.left, right=args.right, face=args.face if args.right else None, offset=args.offset
    )
    try:
        bl = blend_from_descriptor(desc)
    except (KeyError, ValueError) as e:
        raise BadInput(str(e)) from e
    comp = check_compatibility(bl)
    for name, info, good, _ in comp.faces:
        _line(out, good, f"face {name}", info)
    if comp.witness is not None:
        w = comp.witness
        detail = w.describe() if hasattr(w, "describe") else f"product {w[2]}"
        _line(out, False, "overlap", detail)
    _line(out, comp.ok, "compatibility", comp.note)
    dpath = Path(args.descriptor or (str(args.out) + ".blend.json"))
    dpath.write_text(desc.dumps(), encoding="utf-8")
    if not comp.ok:
        return FAIL
    bound = _fraction(args.bound)
    _, pk, doc = _blend_doc(desc, bound, None)
    rep = check_packing_property(pk)
    _line(out, rep.ok, "packing property", f"{rep.pairs} pairs, mode {rep.mode}")
    adj = tangency_graph(pk)
    ap = check_apollonian_property(pk, adj)
    certs = certify_clusters(pk, ap.beyond_bound, adj) if ap.beyond_bound else []
    certified = sum(c.ok for c in certs)
    _line(out, None if ap.failures else True, "apollonian",
          f"{len(ap.verified)} in 4-cliques, {len(ap.failures)} without one, "
          f"{certified}/{len(ap.beyond_bound)} certified beyond the bound, "
          f"{len(ap.unverifiable_near_boundary)} near the boundary")
    write_document(doc, args.out)
    _line(out, pk.complete, "generate", f"{len(doc.circles)} circles written to {args.out}, descriptor {dpath}")
    return OK if rep.ok else FAIL


# --- render -------------------------------------------------------------------------


def cmd_render(args, out) -> int:
    try:
        doc = read_document(args.doc)
    except (OSError, ValueError, KeyError) as e:
        raise BadInput(f"cannot read document {args.doc}: {e}") from e
    if args.invert:
        cx, cy, r = (_exact_or_float(t) for t in args.invert)
        doc = invert_document(doc, (cx, cy), r)
    if args.window:
        x0, x1, y0, y1 = args.window
    elif "n" in doc.meta and not args.invert:
        x0, x1 = default_strip_window(doc.meta["n"])
        y0, y1 = -0.1, 2.1
    else:
        x0, x1, y0, y1 = -1.0, 3.0, -0.1, 2.1
    try:
        spec = RenderSpec(x0=x0, x1=x1, y0=y0, y1=y1, stroke_width=args.stroke, labels=args.labels)
    except ValueError as e:
        raise BadInput(str(e)) from e
    svg = render_svg(doc, spec)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    _line(out, True, "render", f"{svg.count('<circle ')} circles, {svg.count('<line ')} lines -> {args.out}")
    return OK


def _exact_or_float(text: str):
    """``p/q``, ``sqrt(k)`` style expressions are kept exact, anything else is a float."""
    from .catalog import parse_expr

    try:
        return parse_expr(text)
    except Exception:
        try:
            return float(text)
        except ValueError as e:
            raise BadInput(f"not a number: {text!r}") from e


# --- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pack", description="Lattice circle packings from reflection groups.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("catalog", help="list or show generator presets")
    c.add_argument("action", choices=["list", "show"])
    c.add_argument("n", nargs="?")
    c.add_argument("--json", action="store_true", help="machine-readable output")
    c.set_defaults(func=cmd_catalog)

    v = sub.add_parser("verify", help="run every check for one n")
    v.add_argument("n")
    v.add_argument("--bound", type=int, default=50)
    v.add_argument("--oracle-bound", type=int, default=20, help="curvature bound of the direct search")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("generate", help="write a packing document")
    g.add_argument("n", nargs="?")
    g.add_argument("--blend", help="blend descriptor file")
    g.add_argument("--bound", default="30")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("render", help="draw a document as SVG")
    r.add_argument("doc")
    r.add_argument("--window", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"))
    r.add_argument("--invert", nargs=3, metavar=("CX", "CY", "R"), help="invert in a circle first")
    r.add_argument("--stroke", type=float, default=0.004)
    r.add_argument("--labels", action="store_true")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_render)

    gl = sub.add_parser("glue", help="blend two presets or shift a wall")
    gl.add_argument("--left", required=True)
    gl.add_argument("--right")
    gl.add_argument("--face", choices=["v1", "v2"], default="v1")
    gl.add_argument("--offset", help="shift the v1 wall of --left by this rational")
    gl.add_argument("--bound", default="30")
    gl.add_argument("--descriptor", help="where to write the blend descriptor")
    gl.add_argument("--out", required=True)
    gl.set_defaults(func=cmd_glue)
    return ap


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return BAD if e.code not in (0, None) else OK
    try:
        return args.func(args, out)
    except (BadInput, CatalogError, BlendError) as e:
        sys.stderr.write(f"pack: {e}\n")
        return BAD


if __name__ == "__main__":
    sys.exit(main())
