from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from packgame.blend import (
    J_STD,
    BlendError,
    InversiveVector,
    bilinear,
    check_compatibility,
    derive_embedding,
    from_standard,
    ghost_face_n7,
    glue,
    mirror_of,
    overlap_witness,
    preset_group,
    shift_wall,
    slice_ghost,
    to_standard,
    vector_to_standard,
)
from packgame.catalog import preset
from packgame.exact import simplify, sqrt_exact
from packgame.lorentz import gram
from packgame.orbit import check_packing_property, preset_orbit, tangency_graph


def _rounded(pk):
    return sorted(tuple(np.round(pk.geometry.to_float(v), 6) + 0.0) for v in pk.vectors)


def test_embedding_reproduces_gram():
    for n in (1, 2, 7, Fraction(3, 2), 21):
        derive_embedding(n)  # asserts the Gram matrix itself
        v = vector_to_standard(gram(n).vector((0, 0, 1, 0)))
        assert v.curvature == 1 and v.center() == (0, 1)


def test_standard_round_trip():
    p = preset(11)
    for g in p.generators:
        G = to_standard(g.isometry, 11)
        back = from_standard(G, 11)
        assert np.array_equal(np.array(back, dtype=object), g.isometry.matrix)


def test_mirror_of_recovers_reflections():
    grp = preset_group(preset(5))
    for G, name in zip(grp.generators, grp.names):
        m = mirror_of(G)
        assert (m is not None) == name.startswith("R_")


@pytest.mark.parametrize("n", [2, 7])
def test_self_glue_is_the_preset(n):
    a = glue(preset(n), preset(n), "v1").orbit(30, window=(-3, 3), exact=False)
    b = preset_group(preset(n)).orbit(30, window=(-3, 3), exact=False)
    assert np.allclose(_rounded(a), _rounded(b), atol=1e-6)


@pytest.mark.parametrize("face", ["v1", "v2"])
def test_glue_5_7_is_compatible_packing(face):
    bl = glue(preset(5), preset(7), face)
    assert not bl.exact_capable
    rep = check_compatibility(bl)
    assert rep.ok and rep.form_ok and rep.witness is None
    pk = bl.orbit(30, exact=False)
    assert check_packing_property(pk).ok


def test_glue_1_n_is_exact():
    bl = glue(preset(1), preset(3), "v1")
    assert bl.exact_capable
    pk = bl.orbit(20)
    assert pk.geometry.exact
    assert check_packing_property(pk).ok


def test_shift_one_is_compatible():
    bl = shift_wall(preset(7), 1)
    assert bl.exact_capable
    assert overlap_witness(bl) is None
    assert check_compatibility(bl).ok


def test_shift_third_has_exact_witness():
    bl = shift_wall(preset(7), Fraction(1, 3))
    w = overlap_witness(bl)
    assert w is not None and w.exact
    assert w.product == Fraction(-14, 9)
    assert bilinear(J_STD, w.u, w.u) == -2 and bilinear(J_STD, w.v, w.v) == -2
    assert bilinear(J_STD, w.u, w.v) == w.product
    rep = check_compatibility(bl)
    assert not rep.ok and rep.witness is not None


def test_shift_zero_rejected():
    with pytest.raises(BlendError):
        shift_wall(preset(7), 0)
    with pytest.raises(BlendError):
        glue(preset(5), preset(7), "h")


def test_integral_curvature_lost_after_shift():
    pk = shift_wall(preset(7), 1).orbit(30, window=(-1, math.sqrt(7) + 1))
    ks = [pk.geometry.curvature(v) for v in pk.vectors]
    assert any(not isinstance(simplify(k), int) for k in ks)
    assert all(isinstance(simplify(k), int) for k in preset_orbit(preset(7), 30).curvatures())


def test_ghost_face_geometry():
    f = ghost_face_n7()
    assert f.norm() == -2
    r7 = sqrt_exact(7)
    assert f.center() == (5 / r7, 1)
    assert f.radius() == 2 / r7


@pytest.mark.parametrize("mode", ["fill", "reflect"])
def test_ghost_slices_are_packings(mode):
    bl = slice_ghost(preset(7), ghost_face_n7(), mode)
    assert "phi_Q0_Q1" not in bl.names
    pk = bl.orbit(30)
    assert pk.geometry.exact
    assert check_packing_property(pk).ok


def test_vertical_ghost_line_rejected():
    # x = sqrt7/2 is orthogonal to e1: it cuts the packing
    r7 = sqrt_exact(7)
    with pytest.raises(BlendError):
        slice_ghost(preset(7), InversiveVector.vertical(r7 / 2), "fill")


def test_existing_mirror_is_not_a_slice():
    grp = preset_group(preset(7))
    m = mirror_of(grp.generators[grp.names.index("R_h")])
    scale = sqrt_exact(Fraction(-2) / m.norm())
    face = InversiveVector(tuple(c * scale for c in m.c))
    with pytest.raises(BlendError):
        slice_ghost(preset(7), face, "reflect")


def test_blend_tangency_graph_edges_have_product_two():
    pk = glue(preset(1), preset(2), "v1").orbit(20)
    adj = tangency_graph(pk)
    g = pk.geometry
    for i, js in adj.items():
        for j in js:
            assert g.dot(pk.vectors[i], pk.vectors[j]) == 2
