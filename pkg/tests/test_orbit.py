from __future__ import annotations

import math

import pytest

from packgame.blend import shift_wall
from packgame.catalog import preset
from packgame.lorentz import frame
from packgame.orbit import (
    OrbitConfig,
    certify_clusters,
    check_apollonian_property,
    check_packing_property,
    direct_search,
    enumerate_orbit,
    lattice_geometry,
    preset_orbit,
    tangency_graph,
)


def _cfg(p, bound, **kw):
    return OrbitConfig(
        generators=kw.pop("generators", p.isometries),
        bound=bound,
        geometry=lattice_geometry(p.form),
        seeds=[p.seed.coords],
        names=kw.pop("names", p.names()),
        **kw,
    )


def test_tiny_bound_gives_the_strip_lines():
    for n in (1, 3, 7):
        pk = preset_orbit(preset(n), 0.5)
        f = frame(preset(n).form)
        assert set(pk.vectors) == {f.e1.coords, f.e2.coords}


def test_orbit_n1_is_the_apollonian_strip():
    # unit circles at x = 0 and x = 2, curvature 4 at x = 1
    pk = preset_orbit(preset(1), 20, window=(0, 2))
    ks = sorted(pk.curvatures())
    assert ks[:5] == [0, 0, 1, 1, 4]
    assert 4 in ks and 9 in ks and 12 in ks
    assert check_packing_property(pk).ok


def test_n5_contains_curvature_ten_circle():
    pk = preset_orbit(preset(5), 10, window=(-1, math.sqrt(5) + 1))
    assert (-9, -10, 6, 4) in pk


def test_orbit_vectors_are_norm_minus_two_and_face_D():
    for n in (2, 11, 21):
        p = preset(n)
        pk = preset_orbit(p, 30)
        D = frame(p.form).D.coords
        for v in pk.vectors:
            assert p.form.product(v, v) == -2
            assert p.form.product(v, D) > 0


@pytest.mark.parametrize("n", [3, 8, 21])
def test_generator_order_does_not_matter(n):
    p = preset(n)
    a = enumerate_orbit(_cfg(p, 30), p.form)
    rev = list(reversed(p.isometries))
    b = enumerate_orbit(_cfg(p, 30, generators=rev, names=list(reversed(p.names()))), p.form)
    assert a.vectors == b.vectors


@pytest.mark.parametrize("n", [2, 7, 13])
def test_kernel_matches_slow_path(n):
    p = preset(n)
    fast = enumerate_orbit(_cfg(p, 25), p.form)
    slow = enumerate_orbit(_cfg(p, 25, kernel=False), p.form)
    assert fast.vectors == slow.vectors


@pytest.mark.parametrize("n", [1, 6, 17])
def test_orbit_is_invariant_under_generators(n):
    p = preset(n)
    rn = math.sqrt(n)
    small = preset_orbit(p, 20, window=(0, rn))
    big = preset_orbit(p, 20, window=(-3 * rn, 4 * rn))
    g = small.geometry
    for iso in p.isometries:
        for v in small.vectors:
            w = iso(v)
            b = g.curvature(w)
            x = g.center_float(w)[0] if b else 0.0
            if b <= 20 and -3 * rn <= x <= 4 * rn:
                assert w in big, (iso.name, v, w)


def test_deterministic_output():
    a = preset_orbit(preset(9), 30)
    b = preset_orbit(preset(9), 30)
    assert a.vectors == b.vectors


def test_direct_search_oracle_small():
    p = preset(3)
    rn = math.sqrt(3)
    orbit = preset_orbit(p, 10, window=(0, rn))
    closure = preset_orbit(p, 30, window=(-2 * rn, 3 * rn))
    found = direct_search(p.form, 10, (0, rn), admissible_against=closure)
    assert set(found) == set(orbit.vectors)


def test_tangency_graph_n1():
    pk = preset_orbit(preset(1), 20, window=(-1, 2))
    adj = tangency_graph(pk)
    g = pk.geometry
    for i, js in adj.items():
        for j in js:
            assert g.dot(pk.vectors[i], pk.vectors[j]) == 2


def test_apollonian_n1_everything_in_cliques():
    pk = preset_orbit(preset(1), 30, window=(-1, 2))
    rep = check_apollonian_property(pk, interior_bound=15, interior_window=(0, 1))
    assert not rep.failures
    assert len(rep.verified) > 20


def test_transport_certifies_beyond_bound_circles():
    pk = shift_wall(preset(7), 1).orbit(30, window=(-1, math.sqrt(7) + 1), exact=True)
    adj = tangency_graph(pk)
    rep = check_apollonian_property(pk, adj, interior_bound=30, interior_window=(-1, math.sqrt(7)))
    assert not rep.failures
    certs = certify_clusters(pk, rep.beyond_bound, adj)
    assert certs and all(c.ok and c.exact for c in certs)
    g = pk.geometry
    for c in certs[:5]:
        for u in c.partners:
            assert g.dot(u, u) == -2
            assert g.dot(u, c.circle) == 2


def test_packing_violation_is_reported():
    pk = preset_orbit(preset(2), 10)
    pk.vectors.append(pk.vectors[2])
    rep = check_packing_property(pk)
    assert rep.duplicates == 1
    assert not rep.ok
