"""Acceptance criteria 1-9, one PASS/FAIL line each.

Run under pytest (one test per criterion) or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from packgame import linalg
from packgame.blend import glue, overlap_witness, check_compatibility, shift_wall
from packgame.boundary import (
    circle_of,
    boundary_distance,
    lightlike_of,
    moebius_of_rotation,
    point_of,
    point_of_float,
    sigma_n21,
)
from packgame.catalog import load_catalog, preset
from packgame.exact import QuadElem, simplify, sqrt_exact, xadd, xmul
from packgame.isometry import glide_n21, rotation_pi, verify_symmetry
from packgame.lorentz import frame, gram, mod8_obstruction, represents_norm
from packgame.orbit import (
    certify_clusters,
    check_apollonian_property,
    check_packing_property,
    direct_search,
    preset_orbit,
    tangency_graph,
)

NS = range(1, 27)


def _report(number: int, ok: bool, detail: str) -> str:
    return f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"


# --- 1 ------------------------------------------------------------------------------


def criterion_1() -> tuple[bool, str]:
    t = time.perf_counter()
    bad = [n for n in NS if not mod8_obstruction(gram(n))]
    dt = time.perf_counter() - t
    return not bad and dt < 1.0, f"norm -4 excluded mod 8 for n = 1..26, failures {bad}, {dt:.3f} s"


# --- 2 ------------------------------------------------------------------------------


def criterion_2() -> tuple[bool, str]:
    t = time.perf_counter()
    cat = load_catalog()  # fresh load: every generator is verified while loading
    count, bad, formula = 0, [], {}
    for n in NS:
        p = cat[n]
        for g in p.generators:
            count += 1
            if not verify_symmetry(g.isometry, p.form).ok:
                bad.append((n, g.name))
        for label, ok in p.formula_checks.items():
            formula.setdefault(label, []).append(n)
            if not ok:
                bad.append((n, label))
    dt = time.perf_counter() - t
    q1 = sorted(formula.get("Q1", []))
    ok = not bad and dt < 5.0 and q1 == [7, 11, 15, 19, 23] and formula.get("s1") and formula.get("s2")
    return bool(ok), (
        f"{count} generators exact, formula rows s1 {len(formula.get('s1', []))} "
        f"s2 {len(formula.get('s2', []))} Q1 {q1}, failures {bad}, {dt:.2f} s"
    )


# --- 3 ------------------------------------------------------------------------------


def criterion_3() -> tuple[bool, str]:
    checks = {}
    checks["e3 unit circle at i"] = all(
        (c := circle_of(frame(gram(n)).e3)).curvature == 1 and c.center == (0, 1) for n in NS
    )
    dist = []
    for n in NS:
        f = frame(gram(n))
        dist.append(boundary_distance(f.E + 4 * f.e3, f.E + 4 * f.e4) == 4 * n)
    checks["|P3P4|^2 = 4n"] = all(dist)
    checks["v1.v1 = -8n"] = all(frame(gram(n)).v1.norm() == -8 * n for n in NS)
    p5 = preset(5)
    norms = [-2] + [v.norm() for g in p5.generators for v in g.vectors.values()]
    need = [-2, -8, -8, -10, -40]
    checks["n=5 face norms"] = all(norms.count(x) >= need.count(x) for x in set(need)) and set(norms) == set(need)
    (s2,) = p5["R_s2"].vectors.values()
    checks["n=5 s2 curvature sqrt5"] = simplify(circle_of(s2).curvature) == sqrt_exact(5)
    (P,) = preset(10)["-R_P"].vectors.values()
    checks["n=10 P.P = 16"] = P.norm() == 16
    cp = linalg.charpoly(glide_n21().matrix)
    q, r = linalg.poly_divmod(cp, [1, 0, -1])
    lam = QuadElem(9, 4, 5)
    quad_ok = [simplify(c) for c in q] == [1, -18, 1] and not any(simplify(c) for c in r)
    root_ok = all(
        simplify(xadd(xadd(xmul(x, x), xmul(-18, x)), 1)) == 0 for x in (lam, lam.inverse())
    )
    checks["glide eigenvalues 1, -1, 9 +- 4 sqrt5"] = quad_ok and root_ok
    bad = [k for k, ok in checks.items() if not ok]
    return not bad, f"{len(checks) - len(bad)}/{len(checks)} worked numbers exact" + (f", failed {bad}" if bad else "")


# --- 4 and 5 ------------------------------------------------------------------------

_ORBITS: dict = {}


def _orbit50(n):
    if n not in _ORBITS:
        _ORBITS[n] = preset_orbit(preset(n), 50)
    return _ORBITS[n]


def criterion_4() -> tuple[bool, str]:
    t = time.perf_counter()
    bad, total, sizes = [], 0, []
    for n in NS:
        pk = _orbit50(n)
        rep = check_packing_property(pk)
        total += len(pk)
        sizes.append(len(pk))
        if not (pk.complete and rep.ok and rep.mode == "exact-int" and rep.duplicates == 0):
            bad.append(n)
    dt = time.perf_counter() - t
    return not bad, (
        f"bound 50, {total} circles ({min(sizes)}..{max(sizes)} per n), exact products even and >= 2, "
        f"failures {bad}, {dt:.1f} s"
    )


def criterion_5() -> tuple[bool, str]:
    bad = []
    for n in NS:
        pk = _orbit50(n)
        ks = [pk.geometry.curvature(v) for v in pk.vectors]
        if not all(isinstance(k, int) and k >= 0 for k in ks):
            bad.append(n)
    return not bad, f"all curvatures non-negative integers for n = 1..26 at bound 50, failures {bad}"


# --- 6 ------------------------------------------------------------------------------


def _apollonian(pk, interior_window=None) -> tuple[bool, str]:
    adj = tangency_graph(pk)
    rep = check_apollonian_property(pk, adj, interior_bound=50, interior_window=interior_window)
    certs = certify_clusters(pk, rep.beyond_bound, adj)
    ok = not rep.failures and all(c.ok and c.exact for c in certs) and len(certs) == len(rep.beyond_bound)
    return ok, (
        f"{len(pk)} circles, {len(rep.verified)} in cliques, {len(certs)} certified past the bound, "
        f"{len(rep.unverifiable_near_boundary)} near the window edge, {len(rep.failures)} failures"
    )


def criterion_6() -> tuple[bool, str]:
    t = time.perf_counter()
    parts, ok = [], True
    r7 = math.sqrt(7)
    g7 = shift_wall(preset(7), 1).orbit(50, window=(-1, r7 + 1), exact=True)
    good, detail = _apollonian(g7, interior_window=(-1, r7))
    ok &= good and g7.geometry.exact
    parts.append(f"shifted n=7: {detail}")
    for n in (2, 3, 5, 7):
        bl = glue(preset(1), preset(n), "v1")
        pk = bl.orbit(50, exact=bl.exact_capable)
        good, detail = _apollonian(pk)
        ok &= good and check_compatibility(bl).ok
        parts.append(f"glue(1,{n}): {detail}")
    return ok, "; ".join(parts) + f"; {time.perf_counter() - t:.1f} s"


# --- 7 ------------------------------------------------------------------------------


def criterion_7() -> tuple[bool, str]:
    form = gram(Fraction(3, 2))
    w = represents_norm(form, -4, 10)
    lattice_ok = w is not None and w.norm() == -4 and max(abs(c) for c in w.coords) <= 10
    bl = shift_wall(preset(7), Fraction(1, 3))
    wit = overlap_witness(bl)
    rep = check_compatibility(bl)
    cross_ok = (
        wit is not None
        and wit.exact
        and -2 < float(wit.product) < 2
        and not rep.ok
        and rep.witness is not None
    )
    detail = f"n=3/2 witness {list(w.coords) if w else None}"
    detail += f", shift 1/3 witness {wit.describe() if wit else None}"
    return lattice_ok and cross_ok, detail


# --- 8 ------------------------------------------------------------------------------


def _map_error(M, moebius, form, rng, k=100) -> float:
    err = 0.0
    m = M.matrix.astype(float)
    for _ in range(k):
        z = complex(rng.uniform(-3, 6), rng.uniform(-1, 3))
        w4 = point_of_float(m @ lightlike_of(z, form), form)
        w2 = moebius(z)
        err = max(err, abs(w4 - w2) / max(1.0, abs(w2)))
    return err


def criterion_8() -> tuple[bool, str]:
    rng = np.random.default_rng(8)
    g7 = gram(7)
    Q0, Q1 = g7.vector((-3, -3, 1, 1)), g7.vector((-3, -5, 3, 1))
    e_phi = _map_error(rotation_pi(Q0, Q1), moebius_of_rotation(point_of(Q0), point_of(Q1)), g7, rng)
    tau, S = sigma_n21()
    e_sigma = _map_error(S, tau, gram(21), rng)
    ok = e_phi < 1e-9 and e_sigma < 1e-9
    return ok, f"100 points each, max error phi(n=7) {e_phi:.2e}, sigma(n=21) {e_sigma:.2e}"


# --- 9 ------------------------------------------------------------------------------


def criterion_9() -> tuple[bool, str]:
    parts, ok = [], True
    for n in (1, 2):
        p = preset(n)
        rn = math.sqrt(n)
        # five periods of the strip; the closure reaches two more on each side
        window = (-2 * rn, 3 * rn)
        orbit = preset_orbit(p, 10, window=window)
        closure = preset_orbit(p, 30, window=(-6 * rn, 7 * rn))
        found = set(direct_search(p.form, 10, window, admissible_against=closure))
        mine = {tuple(v) for v in orbit.vectors}
        ok &= orbit.complete and found == mine
        parts.append(f"n={n}: orbit {len(mine)}, search {len(found)}, symmetric difference {len(found ^ mine)}")
    return ok, "; ".join(parts)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("number", range(1, 10))
def test_criterion(number, capsys):
    ok, detail = CRITERIA[number - 1]()
    with capsys.disabled():
        print("\n" + _report(number, ok, detail))
    assert ok, detail


def main() -> int:
    failed = 0
    for i, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        failed += not ok
        print(_report(i, ok, detail), flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
