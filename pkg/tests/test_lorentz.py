from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from packgame.lorentz import (
    FormMismatchError,
    frame,
    gram,
    mod8_obstruction,
    norm_class,
    primitive_reduce,
    represents_norm,
)

coords = st.tuples(*[st.integers(-20, 20)] * 4)


def test_gram_entries():
    J = gram(5).int_matrix
    assert J[0, 0] == -2 and J[0, 1] == 2
    assert J[2, 3] == 4 * 5 - 2
    assert gram(Fraction(3, 2)).a == 4


def test_frame_norms():
    for n in range(1, 27):
        f = frame(gram(n))
        assert f.e1.norm() == -2
        assert f.E.norm() == 0
        assert f.D.norm() > 0
        assert f.h.norm() == -8
        assert f.v1.norm() == f.v2.norm() == -8 * n
        assert f.E.dot(f.h) == 0 and f.E.dot(f.v1) == 0


def test_norm_classes():
    f = frame(gram(7))
    assert norm_class(f.e1)[0] == "spacelike"
    assert norm_class(f.E)[0] == "lightlike"
    assert norm_class(f.D)[0] == "timelike"


@given(coords, coords)
def test_product_is_symmetric_and_matches_matrix(u, v):
    g = gram(11)
    a, b = g.vector(u), g.vector(v)
    assert a.dot(b) == b.dot(a)
    assert a.dot(b) == int(np.array(u) @ g.int_matrix @ np.array(v))


@given(coords, st.integers(1, 9))
def test_primitive_reduce(u, k):
    if not any(u):
        return
    g = gram(3)
    v = g.vector(tuple(k * c for c in u))
    p = primitive_reduce(v)
    assert p.is_primitive
    assert primitive_reduce(p) == p
    c = k * int(np.gcd.reduce(u))
    assert p.norm() * c * c == v.norm()
    assert p.dot(frame(g).D) > 0 or (p.dot(frame(g).D) == 0 and next(x for x in p.coords if x) > 0)


def test_forms_do_not_mix():
    with pytest.raises(FormMismatchError):
        gram(2).vector((1, 0, 0, 0)).dot(gram(3).vector((1, 0, 0, 0)))


def test_mod8_against_brute_force():
    # independent: no norm -4 vector in a small box, and no residue hits 4 mod 8
    for n in (1, 2, 5, 13, 26):
        form = gram(n)
        assert mod8_obstruction(form)
        assert represents_norm(form, -4, 3) is None
        J = form.int_matrix
        vals = {int(np.array(x) @ J @ np.array(x)) % 8 for x in itertools.product(range(-3, 4), repeat=4)}
        assert 4 not in vals


def test_half_integer_n_has_norm_minus_four():
    w = represents_norm(gram(Fraction(3, 2)), -4, 10)
    assert w is not None and w.norm() == -4
    assert w.coords == (-1, 1, -1, -1)
    with pytest.raises(ValueError):
        mod8_obstruction(gram(Fraction(3, 2)))
