from __future__ import annotations

import io
import json
import math
import re

import pytest

from packgame.blend import J_STD, bilinear, vector_to_standard
from packgame.catalog import preset
from packgame.cli import main
from packgame.document import (
    BlendDescriptor,
    PackingDocument,
    document_from_packing,
    dumps,
    loads,
    read_document,
)
from packgame.exact import sqrt_exact
from packgame.orbit import preset_orbit
from packgame.render import RenderSpec, clip_line, invert_document, render_svg, visible_circles


def _doc(n, bound):
    p = preset(n)
    pk = preset_orbit(p, bound, window=(-1, math.sqrt(n) + 1))
    return document_from_packing(pk, {"n": str(n)})


def _run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


# --- documents ----------------------------------------------------------------------


def test_round_trip_exact():
    doc = _doc(7, 20)
    text = dumps(doc)
    back = loads(text)
    assert dumps(back) == text
    assert [c.vec for c in back.circles] == [c.vec for c in doc.circles]
    assert back.circles == doc.circles


def test_numbers_are_strings():
    obj = json.loads(dumps(_doc(2, 10)))
    assert obj["meta"]["bound"] == "10"
    for c in obj["circles"]:
        assert all(isinstance(x, str) for x in c["vec"])
        assert isinstance(c["curvature"], str)


def test_document_geometry_n1():
    doc = _doc(1, 20)
    lines = [c for c in doc.circles if c.line is not None]
    assert len(lines) == 2
    # y = 0 and y = 2
    assert sorted(abs(c.line[2]) for c in lines) == [0, 2]
    unit = [c for c in doc.circles if c.curvature == 1]
    assert all(c.center[1] == 1 for c in unit)
    assert all(c.integer_curvature for c in doc.circles)


def test_blend_descriptor_round_trip():
    d = BlendDescriptor(left="5", right="7", face="v2")
    assert BlendDescriptor.from_json(json.loads(d.dumps())) == d
    with pytest.raises(ValueError):
        BlendDescriptor.from_json({"format": "packgame-blend"})


# --- rendering ----------------------------------------------------------------------


def test_svg_circle_count_matches_window():
    doc = _doc(3, 30)
    spec = RenderSpec.for_strip(3)
    svg = render_svg(doc, spec)
    assert svg.count("<circle ") == len(visible_circles(doc, spec))
    assert svg.count("<line ") == 2
    tight = RenderSpec(x0=0, x1=0.5, y0=0, y1=1)
    assert render_svg(doc, tight).count("<circle ") == len(visible_circles(doc, tight)) < len(doc.circles)


def test_svg_numbers_have_twelve_digits():
    svg = render_svg(_doc(2, 10), RenderSpec.for_strip(2))
    for num in re.findall(r'cx="([^"]+)"', svg):
        digits = num.lstrip("-").replace(".", "").split("e")[0].lstrip("0")
        assert len(digits) <= 12


def test_empty_document_renders():
    svg = render_svg(PackingDocument({"arithmetic": "exact"}, []))
    assert svg.startswith("<?xml") and svg.rstrip().endswith("</svg>")
    assert "<circle" not in svg


def test_bad_window():
    with pytest.raises(ValueError):
        RenderSpec(x0=1, x1=0)


def test_clip_line():
    spec = RenderSpec(x0=-1, x1=3, y0=-0.1, y1=2.1)
    x1, y1, x2, y2 = clip_line(0, 1, 2, spec)
    assert sorted((x1, x2)) == pytest.approx([-1, 3]) and y1 == y2 == pytest.approx(2)
    assert clip_line(0, 1, 5, spec) is None


def test_inversion_preserves_tangency():
    doc = _doc(7, 20)
    q0 = (sqrt_exact(7), 1)
    inv = invert_document(doc, q0, 1)
    assert inv.meta["frame"] == "standard" and inv.arithmetic == "exact"
    a = [vector_to_standard(c.vec, 7).c for c in doc.circles]
    b = [c.vec for c in inv.circles]
    for i in range(0, len(a), 7):
        for j in range(len(a)):
            assert bilinear(J_STD, a[i], a[j]) == bilinear(J_STD, b[i], b[j])
    # Q0 lies on no circle of the packing, so every image (the two lines too) is a finite circle
    assert all(c.line is None and c.curvature > 0 for c in inv.circles)


# --- command line -------------------------------------------------------------------


def test_catalog_commands():
    code, out = _run("catalog", "list")
    assert code == 0 and out.count("\n") >= 26
    code, out = _run("catalog", "show", "21")
    assert code == 0 and "sigma" in out and "glide" in out
    code, out = _run("catalog", "show", "11", "--json")
    assert code == 0 and len(json.loads(out)["generators"]) == 7
    assert _run("catalog", "show", "27")[0] == 2


def test_verify_exit_codes():
    code, out = _run("verify", "7", "--bound", "30")
    assert code == 0 and "[FAIL]" not in out
    code, out = _run("verify", "3/2")
    assert code == 1 and "-1, 1, -1, -1" in out
    assert _run("verify", "x")[0] == 2
    assert _run("verify")[0] == 2


def test_generate_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert _run("generate", "1", "--bound", "20", "--out", str(a))[0] == 0
    assert _run("generate", "1", "--bound", "20", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    doc = read_document(a)
    assert all(c.integer_curvature for c in doc.circles)


def test_generate_n5_has_curvature_ten(tmp_path):
    out = tmp_path / "n5.json"
    assert _run("generate", "5", "--bound", "10", "--out", str(out))[0] == 0
    vecs = [c.vec for c in read_document(out).circles]
    assert (-9, -10, 6, 4) in vecs


def test_generate_blend_and_render(tmp_path):
    desc = tmp_path / "g7.json"
    desc.write_text(BlendDescriptor(left="7", offset="1").dumps())
    out = tmp_path / "g7_doc.json"
    assert _run("generate", "--blend", str(desc), "--bound", "30", "--out", str(out))[0] == 0
    doc = read_document(out)
    assert any(not c.integer_curvature for c in doc.circles)
    svg = tmp_path / "g7.svg"
    assert _run("render", str(out), "--out", str(svg), "--labels")[0] == 0
    assert svg.read_text().count("<circle ") > 10


def test_glue_commands(tmp_path):
    out = tmp_path / "bad.json"
    code, text = _run("glue", "--left", "7", "--offset", "1/3", "--out", str(out))
    assert code == 1 and "-14/9" in text
    assert not out.exists()
    assert (tmp_path / "bad.json.blend.json").exists()
    good = tmp_path / "g57.json"
    code, _ = _run("glue", "--left", "5", "--right", "7", "--face", "v2", "--bound", "20", "--out", str(good))
    assert code == 0 and read_document(good).meta["arithmetic"] == "float"
    assert _run("glue", "--left", "5", "--out", str(good))[0] == 2


def test_render_errors(tmp_path):
    assert _run("render", str(tmp_path / "missing.json"), "--out", str(tmp_path / "x.svg"))[0] == 2
    doc = tmp_path / "n1.json"
    _run("generate", "1", "--bound", "5", "--out", str(doc))
    assert _run("render", str(doc), "--window", "1", "0", "0", "1", "--out", str(tmp_path / "x.svg"))[0] == 2
    code, text = _run("render", str(doc), "--invert", "0", "0", "1", "--out", str(tmp_path / "i.svg"))
    assert code == 0
