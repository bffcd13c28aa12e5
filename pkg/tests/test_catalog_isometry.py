from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from packgame import linalg
from packgame.catalog import CatalogError, default_catalog, load_catalog, parse_expr, preset
from packgame.isometry import (
    NotAnIsometryError,
    from_matrix,
    general_s1_s2,
    glide_n21,
    point_inversion,
    q1_formula,
    reflection,
    rotation_pi,
    verify_symmetry,
)
from packgame.lorentz import frame, gram, primitive_reduce


def test_catalog_covers_1_to_26():
    keys = default_catalog().keys()
    for n in range(1, 27):
        assert str(n) in keys
    with pytest.raises(KeyError):
        preset(27)


def test_every_generator_is_an_integral_orthochronous_symmetry():
    for n in range(1, 27):
        p = preset(n)
        assert "R_e1" not in p.names()
        for g in p.generators:
            rep = verify_symmetry(g.isometry, p.form)
            assert rep.ok, (n, g.name, rep)


def test_common_walls_present():
    for n in range(1, 27):
        names = preset(n).names()
        for w in ("R_h", "R_v1", "R_v2"):
            assert w in names


def test_parse_expr():
    assert parse_expr("-3/2") == Fraction(-3, 2)
    assert float(parse_expr("-12+2*sqrt(2)")) == pytest.approx(-12 + 2 * 2**0.5)
    with pytest.raises(CatalogError):
        parse_expr("__import__('os')")


def test_reflection_properties():
    f = frame(gram(5))
    R = reflection(f.h)
    assert R(f.h) == -f.h
    assert linalg.array_equal(linalg.simplify_array(R.matrix.dot(R.matrix)), linalg.identity(4))
    assert R.det == -1
    with pytest.raises(ValueError):
        reflection(f.D)


def test_rotation_fixes_endpoints():
    g = gram(7)
    A, B = g.vector((-3, -3, 1, 1)), g.vector((-3, -5, 3, 1))
    phi = rotation_pi(A, B)
    assert phi(A) == A and phi(B) == B
    assert phi.det == 1
    assert verify_symmetry(phi, g).ok


def test_point_inversion_n10():
    g = gram(10)
    P = g.vector((6, 6, -3, -1))
    M = point_inversion(P)
    assert M(P) == P
    assert P.norm() == 16
    assert verify_symmetry(M, g).ok


def test_non_isometry_rejected():
    with pytest.raises(NotAnIsometryError):
        from_matrix(np.diag([1, 2, 1, 1]), gram(3))


def test_glide_charpoly():
    assert linalg.charpoly(glide_n21().matrix) == [1, -18, 0, 18, -1]
    assert verify_symmetry(glide_n21(), gram(21)).ok


@pytest.mark.parametrize("n", [7, 11, 15, 19, 23])
def test_q1_formula_matches_catalog(n):
    p = preset(n)
    q1 = [v for g in p.generators for k, v in g.vectors.items() if k == "Q1"]
    assert q1 and primitive_reduce(q1[0]) == q1_formula(n)
    assert q1_formula(n).norm() == 0


def test_general_s1_s2_are_mirrors():
    for n in range(4, 27):
        d = dict(general_s1_s2(n))
        for label in preset(n).formula_checks.keys() & {"s1", "s2"}:
            assert d[label].norm() < 0
            assert verify_symmetry(reflection(d[label]), gram(n)).ok, (n, label)


def test_formula_rows_recorded():
    checks = {n: preset(n).formula_checks for n in range(1, 27)}
    assert all(all(c.values()) for c in checks.values())
    assert sorted(n for n, c in checks.items() if "Q1" in c) == [7, 11, 15, 19, 23]


def test_env_override(tmp_path, monkeypatch):
    src = load_catalog()
    doc = json.loads(open(src.path).read())
    doc["presets"] = {k: v for k, v in doc["presets"].items() if k in ("1", "2")}
    path = tmp_path / "small.json"
    path.write_text(json.dumps(doc))
    cat = load_catalog(path)
    assert cat.keys() == ["1", "2"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"format": "other"}))
    with pytest.raises(CatalogError):
        load_catalog(bad)


@given(st.integers(1, 26), st.tuples(*[st.integers(-30, 30)] * 4))
def test_generators_preserve_products(n, u):
    p = preset(n)
    v = p.form.vector(u)
    e1 = frame(p.form).e1
    for g in p.generators[:4]:
        assert g.isometry(v).dot(g.isometry(e1)) == v.dot(e1)
