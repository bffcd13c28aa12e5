"""Blended groups: shifted walls, glued presets and sliced ghost circles.

All blends live in one frame, the inversive coordinates
``c = (co-curvature, curvature, curvature*x, curvature*y)`` with the form
``J_std``, so generators coming from different lattices can be mixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import linalg
from .exact import QuadElem, BiQuadElem, sign, simplify, sqrt_exact, to_float, xadd, xdiv, xmul, xsub
from .lorentz import GramForm, LatticeVector, frame, gram
from .orbit import (
    J_STD,
    OrbitConfig,
    Packing,
    check_packing_property,
    enumerate_orbit,
    standard_geometry,
)

__all__ = [
    "InversiveVector",
    "BlendedGroup",
    "BlendError",
    "CompatibilityReport",
    "derive_embedding",
    "embed_standard",
    "to_standard",
    "from_standard",
    "vector_to_standard",
    "shift_wall",
    "glue",
    "check_compatibility",
    "overlap_witness",
    "OverlapWitness",
    "slice_ghost",
    "preset_group",
    "ghost_face_n7",
    "mirror_of",
]


class BlendError(ValueError):
    pass


# --- exact 4x4 helpers ----------------------------------------------------------


def _s(x):
    x = simplify(x)
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def mat_mul(A, B) -> tuple:
    n, m, p = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = 0
            for k in range(m):
                if A[i][k] and B[k][j]:
                    acc = xadd(acc, xmul(A[i][k], B[k][j]))
            row.append(_s(acc))
        out.append(tuple(row))
    return tuple(out)


def mat_vec(A, v) -> tuple:
    return tuple(r[0] for r in mat_mul(A, [[c] for c in v]))


def transpose(A) -> tuple:
    return tuple(zip(*A))


def bilinear(J, u, v):
    acc = 0
    for i in range(4):
        if not u[i]:
            continue
        for j in range(4):
            if J[i][j] and v[j]:
                acc = xadd(acc, xmul(xmul(u[i], J[i][j]), v[j]))
    return _s(acc)


def mat_equal(A, B) -> bool:
    return all(not _s(xsub(a, b)) for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def _fl(x) -> float:
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, Fraction):
        return x.numerator / x.denominator
    return float(to_float(x))


def float_matrix(A) -> np.ndarray:
    return np.array([[_fl(c) for c in row] for row in A], dtype=float)


_IDENTITY = tuple(tuple(int(i == j) for j in range(4)) for i in range(4))
J_STD_INV = ((0, 1, 0, 0), (1, 0, 0, 0), (0, 0, Fraction(-1, 2), 0), (0, 0, 0, Fraction(-1, 2)))


def std_inverse(G) -> tuple:
    """``G^-1 = J^-1 G^T J`` for an isometry of ``J_std``."""
    return mat_mul(mat_mul(J_STD_INV, transpose(G)), J_STD)


def preserves_std(G) -> bool:
    return mat_equal(mat_mul(mat_mul(transpose(G), J_STD), G), J_STD)


def _radicands(A) -> set:
    out = set()
    for row in A:
        for c in row:
            c = simplify(c)
            if isinstance(c, QuadElem):
                out.add(c.d)
            elif isinstance(c, BiQuadElem):
                out.update(c.bases)
    return out


# --- inversive vectors -------------------------------------------------------------


@dataclass(frozen=True)
class InversiveVector:
    """``(co-curvature, curvature, curvature*x, curvature*y)``; lines have curvature 0."""

    c: tuple

    def __post_init__(self):
        if len(self.c) != 4:
            raise ValueError("inversive vectors have four entries")
        object.__setattr__(self, "c", tuple(_s(x) for x in self.c))

    @classmethod
    def circle(cls, x, y, r) -> InversiveVector:
        b = xdiv(1, r)
        co = xsub(xmul(b, xadd(xmul(x, x), xmul(y, y))), r)
        return cls((co, b, xmul(b, x), xmul(b, y)))

    @classmethod
    def line(cls, nx, ny, t) -> InversiveVector:
        """The line ``nx x + ny y = t`` for a unit normal ``(nx, ny)``."""
        return cls((xmul(2, t), 0, nx, ny))

    @classmethod
    def vertical(cls, t) -> InversiveVector:
        return cls.line(1, 0, t)

    def dot(self, other: InversiveVector):
        return bilinear(J_STD, self.c, other.c)

    def norm(self):
        return self.dot(self)

    @property
    def curvature(self):
        return self.c[1]

    @property
    def is_line(self) -> bool:
        return not self.c[1]

    def center(self) -> tuple:
        if self.is_line:
            raise ValueError("a line has no center")
        b = self.c[1]
        return xdiv(self.c[2], b), xdiv(self.c[3], b)

    def radius(self):
        if self.is_line:
            raise ValueError("a line has no radius")
        return xdiv(1, self.c[1])

    def to_float(self) -> np.ndarray:
        return np.array([_fl(x) for x in self.c])

    def __neg__(self) -> InversiveVector:
        return InversiveVector(tuple(-x for x in self.c))

    def __iter__(self):
        return iter(self.c)

    def __getitem__(self, i):
        return self.c[i]

    def __repr__(self):
        return "InversiveVector(" + ", ".join(str(x) for x in self.c) + ")"


# --- the lattice-to-standard embedding ------------------------------------------


def derive_embedding(n) -> tuple:
    """Solve for the images of ``e1..e4`` in the standard frame.

    Geometric frame: ``e1`` is the line ``y = 0``, ``e2`` the line ``y = 2``,
    ``e3`` the unit circle at ``i`` and ``e4`` the unit circle at
    ``2 sqrt(n) + i``.  Each is determined up to orientation; the signs are
    chosen so that the Gram entries with ``e3`` come out right, and the whole
    Gram matrix is then asserted.
    """
    form = gram(n)
    rn = sqrt_exact(form.n)
    cands = [
        InversiveVector.line(0, 1, 0),
        InversiveVector.line(0, 1, 2),
        InversiveVector.circle(0, 1, 1),
        InversiveVector.circle(xmul(2, rn), 1, 1),
    ]
    imgs = [None, None, cands[2], None]
    for i in (0, 1, 3):
        want = form.rows[i][2]
        for sgn in (1, -1):
            v = cands[i] if sgn > 0 else -cands[i]
            if v.dot(cands[2]) == want:
                imgs[i] = v
                break
        else:
            raise AssertionError(f"no orientation of the frame circle {i + 1} matches the Gram matrix")
    M = transpose([v.c for v in imgs])
    G = mat_mul(mat_mul(transpose(M), J_STD), M)
    if not mat_equal(G, form.rows):
        raise AssertionError(f"embedding does not reproduce J_{form.n}")
    return M


@lru_cache(maxsize=None)
def _embedding(n: Fraction) -> tuple:
    return derive_embedding(n)


def embed_standard(n) -> tuple:
    """Change of basis ``M_n`` with ``M_n^T J_std M_n = J_n`` (columns: images of ``e1..e4``)."""
    return _embedding(Fraction(n))


@lru_cache(maxsize=None)
def _embedding_inverse(n: Fraction) -> tuple:
    M = _embedding(n)
    Jinv = linalg.inverse(gram(n).matrix)
    Jinv = tuple(tuple(_s(c) for c in row) for row in Jinv)
    return mat_mul(mat_mul(Jinv, transpose(M)), J_STD)


def to_standard(G, n) -> tuple:
    """Conjugate a lattice isometry (matrix or Isometry) into the standard frame."""
    m = G.matrix if hasattr(G, "matrix") else G
    m = tuple(tuple(_s(c) for c in row) for row in m)
    n = Fraction(n)
    return mat_mul(mat_mul(_embedding(n), m), _embedding_inverse(n))


def from_standard(G, n) -> tuple:
    n = Fraction(n)
    return mat_mul(mat_mul(_embedding_inverse(n), G), _embedding(n))


def vector_to_standard(v: LatticeVector | Sequence, n=None) -> InversiveVector:
    if isinstance(v, LatticeVector):
        n = v.form.n
        v = v.coords
    return InversiveVector(mat_vec(_embedding(Fraction(n)), v))


def reflection_std(m: InversiveVector) -> tuple:
    """``x -> x - 2 (m.x / m.m) m`` in the standard frame."""
    mm = m.norm()
    if sign(mm) >= 0:
        raise BlendError(f"{m} is not spacelike")
    Jm = mat_vec(J_STD, m.c)
    rows = []
    for i in range(4):
        row = []
        for j in range(4):
            v = xsub(1 if i == j else 0, xdiv(xmul(xmul(2, m.c[i]), Jm[j]), mm))
            row.append(_s(v))
        rows.append(tuple(row))
    return tuple(rows)


def mirror_of(G) -> InversiveVector | None:
    """The mirror of ``G`` if it is a reflection (``G - I`` of rank one), else None."""
    D = [[_s(xsub(G[i][j], 1 if i == j else 0)) for j in range(4)] for i in range(4)]
    cols = [tuple(D[i][j] for i in range(4)) for j in range(4)]
    nz = [c for c in cols if any(c)]
    if not nz:
        return None
    m = InversiveVector(nz[0])
    if sign(m.norm()) >= 0:
        return None
    if not mat_equal(reflection_std(m), G):
        return None
    return m


FLIP_X = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, -1, 0), (0, 0, 0, 1))


# --- blended groups ------------------------------------------------------------------


@dataclass
class BlendedGroup:
    """Generators over ``J_std`` with where each came from."""

    generators: list
    names: list
    provenance: list
    shared_wall: InversiveVector | None
    seeds: list
    description: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for G, name in zip(self.generators, self.names):
            if not preserves_std(G):
                raise BlendError(f"{name} does not preserve the standard form")

    @property
    def radicands(self) -> set:
        out = set()
        for G in self.generators:
            out |= _radicands(G)
        for s in self.seeds:
            out |= _radicands([s.c])
        return out

    @property
    def exact_capable(self) -> bool:
        """Exact orbit arithmetic needs a single quadratic field."""
        return len(self.radicands) <= 1

    def float_generators(self) -> list[np.ndarray]:
        return [float_matrix(G) for G in self.generators]

    def __len__(self):
        return len(self.generators)

    def orbit(self, bound, window: tuple | None = None, exact: bool | None = None, **kw) -> Packing:
        if exact is None:
            exact = self.exact_capable
        if exact and not self.exact_capable:
            raise BlendError("exact orbits need entries in a single quadratic field")
        geom = standard_geometry(exact)
        if exact:
            gens = list(self.generators)
            seeds = [s.c for s in self.seeds]
        else:
            gens = [tuple(tuple(float(c) for c in row) for row in float_matrix(G)) for G in self.generators]
            seeds = [tuple(float(c) for c in s.to_float()) for s in self.seeds]
        cfg = OrbitConfig(
            generators=gens, bound=bound, geometry=geom, seeds=seeds, window=window, names=self.names, **kw
        )
        pk = enumerate_orbit(cfg)
        pk.meta["blend"] = self.description
        return pk


def preset_group(preset, drop: Sequence[str] = ()) -> BlendedGroup:
    """A catalog preset moved into the standard frame."""
    n = preset.n
    gens, names, prov = [], [], []
    for g in preset.generators:
        if g.name in drop:
            continue
        gens.append(to_standard(g.isometry, n))
        names.append(g.name)
        prov.append(f"n={n}")
    e1 = vector_to_standard(preset.seed)
    return BlendedGroup(gens, names, prov, None, [e1], f"preset n={n}")


def shift_wall(preset, offset) -> BlendedGroup:
    """Replace ``R_v1`` by the reflection in the line ``x = -offset``.

    Its lattice normal is ``v1' = v1 + offset sqrt(n) E``, with entries in
    ``Q(sqrt n)``; ``v1'.v1' = v1.v1`` since ``E`` is lightlike and ``E.v1 = 0``.
    """
    offset = Fraction(offset) if not isinstance(offset, (QuadElem, BiQuadElem)) else offset
    if not offset:
        raise BlendError("offset must be nonzero")
    form = preset.form
    f = frame(form)
    rn = sqrt_exact(form.n)
    shift = xmul(offset, rn)
    v1p = tuple(_s(xadd(a, xmul(shift, b))) for a, b in zip(f.v1.coords, f.E.coords))
    if form.product(v1p, v1p) != form.product(f.v1.coords, f.v1.coords):
        raise AssertionError("shifted wall changed norm")
    base = preset_group(preset, drop=("R_v1",))
    wall = vector_to_standard(v1p, form.n)
    Rw = reflection_std(wall)
    # the same reflection in the lattice frame must preserve J_n
    lat = from_standard(Rw, form.n)
    if not mat_equal(mat_mul(mat_mul(transpose(lat), form.rows), lat), form.rows):
        raise AssertionError("shifted reflection does not preserve J_n")
    gens = [Rw] + base.generators
    names = ["R_v1'"] + base.names
    prov = [f"n={form.n}: v1 shifted by {offset}"] + base.provenance
    return BlendedGroup(
        gens, names, prov, wall, base.seeds, f"shift_wall(n={form.n}, offset={offset})",
        meta={"n": form.n, "offset": offset},
    )


def _dedupe(gens, names, prov):
    out_g, out_n, out_p = [], [], []
    for G, nm, p in zip(gens, names, prov):
        if any(mat_equal(G, H) for H in out_g):
            continue
        out_g.append(G)
        out_n.append(nm)
        out_p.append(p)
    return out_g, out_n, out_p


def glue(left, right, face: str = "v1") -> BlendedGroup:
    """Glue the fundamental domains of two presets along ``v1`` or ``v2``.

    ``v1``: the left preset is mirrored by ``x -> -x`` and ``R_v1`` is dropped
    from both.  ``v2``: the right preset is mirrored by
    ``x -> sqrt(n_left) + sqrt(n_right) - x`` so that its ``v2`` wall lands on
    ``x = sqrt(n_left)``, and ``R_v2`` is dropped from both.
    """
    if face not in ("v1", "v2"):
        raise BlendError("face must be 'v1' or 'v2'")
    nl, nr = left.n, right.n
    if face == "v1":
        L = preset_group(left, drop=("R_v1",))
        R = preset_group(right, drop=("R_v1",))
        lg = [mat_mul(mat_mul(FLIP_X, G), FLIP_X) for G in L.generators]
        rg = R.generators
        wall = InversiveVector.vertical(0)
        lname = f"n={nl} (mirrored)"
        rname = f"n={nr}"
    else:
        L = preset_group(left, drop=("R_v2",))
        R = preset_group(right, drop=("R_v2",))
        s = xadd(sqrt_exact(nl), sqrt_exact(nr))
        F = reflection_std(InversiveVector.vertical(xdiv(s, 2)))
        lg = L.generators
        rg = [mat_mul(mat_mul(F, G), F) for G in R.generators]
        wall = InversiveVector.vertical(sqrt_exact(nl))
        lname = f"n={nl}"
        rname = f"n={nr} (mirrored)"
    gens = lg + rg
    names = [f"L:{x}" for x in L.names] + [f"R:{x}" for x in R.names]
    prov = [lname] * len(lg) + [rname] * len(rg)
    gens, names, prov = _dedupe(gens, names, prov)
    e1 = InversiveVector.line(0, -1, 0)
    e3 = InversiveVector.circle(0, 1, 1)
    seeds = [e1, e3] if face == "v1" else [e1]
    return BlendedGroup(
        gens, names, prov, wall, seeds, f"glue(n={nl}, n={nr}, {face})",
        meta={"left": nl, "right": nr, "face": face},
    )


# --- compatibility -------------------------------------------------------------------


@dataclass
class CompatibilityReport:
    ok: bool
    form_ok: bool
    faces: list
    packing_ok: bool | None
    witness: tuple | None
    bound: object
    note: str = (
        "operational surrogate: faces meeting the shared wall must do so at an angle pi/k, "
        "and an orbit sample must have all pairwise products >= 2"
    )


def _angle_ok(cosv: float, tol: float = 1e-9) -> tuple[bool, int | None]:
    if cosv >= 1 - tol:
        return True, None
    t = math.acos(max(-1.0, min(1.0, cosv)))
    k = round(math.pi / t) if t > 0 else None
    if k and k >= 2 and abs(math.cos(math.pi / k) - cosv) < tol:
        return True, k
    return False, None


@dataclass
class OverlapWitness:
    """Two orbit circles that cross: ``words[i]`` applied to ``seeds[i]`` (right to left)."""

    u: tuple
    v: tuple
    product: object
    words: tuple
    exact: bool

    def __iter__(self):
        return iter((self.u, self.v, self.product))

    def describe(self) -> str:
        w = [" ".join(word) or "id" for word in self.words]
        return f"({w[0]})(seed) . ({w[1]})(seed) = {self.product}"


def _with_inverses(blend: BlendedGroup) -> tuple[list, list]:
    gens, names = [], []
    for G, name in zip(blend.generators, blend.names):
        gens.append(G)
        names.append(name)
        if not mat_equal(mat_mul(G, G), _IDENTITY):
            gens.append(std_inverse(G))
            names.append(name + "^-1")
    return gens, names


def overlap_witness(blend: BlendedGroup, max_len: int = 8, max_vectors: int = 3_000,
                    tol: float = 1e-9) -> OverlapWitness | None:
    """Shortest-word search for two orbit circles with product in ``(-2, 2)``.

    Words are explored breadth first; the first crossing pair found is
    confirmed exactly when the blend has exact entries.
    """
    gens, names = _with_inverses(blend)
    F = [float_matrix(G) for G in gens]
    J = float_matrix(J_STD)
    seeds = [np.array(sd.to_float(), dtype=float) for sd in blend.seeds]
    vecs: list[np.ndarray] = []
    words: list[tuple] = []
    seen = set()

    def key(v):
        return tuple(np.round(v, 7) + 0.0)

    frontier = []
    for si, sd in enumerate(seeds):
        if key(sd) not in seen:
            seen.add(key(sd))
            vecs.append(sd)
            words.append((si, ()))
            frontier.append(len(vecs) - 1)
    for _ in range(max_len):
        new = []
        for i in frontier:
            for gi, M in enumerate(F):
                w = M @ vecs[i]
                if not np.all(np.isfinite(w)) or key(w) in seen:
                    continue
                seen.add(key(w))
                A = np.array(vecs)
                prod = A @ J @ w
                slack = tol * (1 + np.abs(A).max(axis=1) * np.abs(w).max())
                hit = np.nonzero((prod > -2 + slack) & (prod < 2 - slack))[0]
                vecs.append(w)
                words.append((words[i][0], (gi,) + words[i][1]))
                for j in hit[np.argsort(-np.abs(prod[hit] - 2))]:
                    got = _confirm(blend, gens, names, words[j], words[-1], vecs[j], w, float(prod[j]))
                    if got is not None:
                        return got
                new.append(len(vecs) - 1)
                if len(vecs) >= max_vectors:
                    return None
        frontier = new
    return None


def _confirm(blend: BlendedGroup, gens, names, wa, wb, fa, fb, pf) -> OverlapWitness | None:
    def run(word):
        si, idx = word
        v = blend.seeds[si].c
        for gi in reversed(idx):
            v = mat_vec(gens[gi], v)
        return tuple(v)

    spelled = tuple(tuple(names[i] for i in w[1]) for w in (wa, wb))

    if blend.exact_capable:
        u, v = run(wa), run(wb)
        p = simplify(bilinear(J_STD, u, v))
        if not (sign(xsub(p, 2)) < 0 and sign(xadd(p, 2)) > 0):
            return None
        return OverlapWitness(u, v, p, spelled, True)
    return OverlapWitness(tuple(fa), tuple(fb), pf, spelled, False)


def check_compatibility(
    blend: BlendedGroup, bound=30, window: tuple | None = None, budget: int = 200_000
) -> CompatibilityReport:
    """Check a blend against the compatibility surrogate.

    1. every generator preserves ``J_std`` (exact);
    2. every reflection face that meets the shared wall does so at an angle
       ``pi/k`` (``k = 2`` is the orthogonal case), faces that stay off the
       wall or touch it at infinity are fine;
    3. the orbit up to ``bound`` has no pair with product below 2 (float tol
       ``1e-9``); the first offending pair is returned as a witness.  The
       search stops after ``budget`` vectors (a non-discrete group never ends).
    """
    form_ok = all(preserves_std(G) for G in blend.generators)
    faces = []
    if blend.shared_wall is not None:
        w = blend.shared_wall
        ww = _fl(w.norm())
        for G, name in zip(blend.generators, blend.names):
            m = mirror_of(G)
            if m is None:
                faces.append((name, "not a reflection", True, None))
                continue
            if mat_equal(reflection_std(m), reflection_std(w)):
                faces.append((name, "shared wall", True, None))
                continue
            c = abs(_fl(m.dot(w))) / math.sqrt(_fl(m.norm()) * ww)
            ok, k = _angle_ok(c)
            faces.append((name, f"cos={c:.12g}" + (f" (pi/{k})" if k else ""), ok, k))
    cross = overlap_witness(blend)
    if cross is not None:
        ok = False
        return CompatibilityReport(ok, form_ok, faces, False, cross, bound)
    step = min(2_000, budget)
    while True:
        pk = blend.orbit(bound, window=window, exact=False, max_frontier=step, closure_rounds=0)
        rep = check_packing_property(pk, tol=1e-9, pairs="sweep")
        if rep.violations or pk.complete or step >= budget:
            break
        step = min(10 * step, budget)
    witness = None
    if rep.violations:
        u, v, p = rep.violations[0]
        witness = (u, v, p)
    ok = form_ok and all(f[2] for f in faces) and rep.ok
    return CompatibilityReport(ok, form_ok, faces, rep.ok, witness, bound)


# --- ghost circles --------------------------------------------------------------------


def ghost_face_n7() -> InversiveVector:
    """The ghost circle of the ``n = 7`` packing: center ``5/sqrt 7 + i``, radius ``2/sqrt 7``."""
    r7 = sqrt_exact(7)
    return InversiveVector.circle(xdiv(5, r7), 1, xdiv(2, r7))


def slice_ghost(preset, face, mode: str = "fill", bound=30) -> BlendedGroup:
    """Fill in a ghost circle (``fill``) or add the reflection across it (``reflect``).

    The face must not cut any orbit circle up to ``bound``: products in
    ``(-2, 2)`` are rejected, except that ``reflect`` accepts orthogonal
    circles (product 0), which the reflection maps to themselves.  A face that
    is already a mirror of the preset is a degenerate slice and rejected.
    Generators that send the face to its negative are dropped in both modes.
    """
    if mode not in ("fill", "reflect"):
        raise BlendError("mode must be 'fill' or 'reflect'")
    if isinstance(face, LatticeVector):
        face = vector_to_standard(face)
    elif not isinstance(face, InversiveVector):
        face = InversiveVector(tuple(face))
    if face.norm() != -2:
        raise BlendError(f"face {face} does not have norm -2")
    base = preset_group(preset)
    Rf = reflection_std(face)
    for G, name in zip(base.generators, base.names):
        if mat_equal(G, Rf):
            raise BlendError(f"face is already the mirror of {name}")
    pk = base.orbit(bound, exact=False)
    fv = face.to_float()
    J = np.array(J_STD, dtype=float)
    prods = pk.float_array() @ J @ fv
    tol = 1e-9
    bad = (prods > -2 + tol) & (prods < 2 - tol)
    if mode == "reflect":
        bad &= np.abs(prods) > tol
    if bad.any():
        i = int(np.nonzero(bad)[0][0])
        raise BlendError(f"face cuts the packing: product {prods[i]:.6g} with {pk.vectors[i]}")
    gens, names, prov = list(base.generators), list(base.names), list(base.provenance)
    seeds = list(base.seeds)
    # generators sending the face to its negative swap the two halves of the
    # sliced domain; the half keeps only the others
    keep = [i for i, G in enumerate(gens) if InversiveVector(mat_vec(G, face.c)) != -face]
    gens = [gens[i] for i in keep]
    names = [names[i] for i in keep]
    prov = [prov[i] for i in keep]
    if mode == "fill":
        seeds.append(face)
    else:
        gens.append(Rf)
        names.append("R_ghost")
        prov.append("slice")
    return BlendedGroup(
        gens, names, prov, None, seeds, f"slice_ghost(n={preset.n}, {mode})",
        meta={"n": preset.n, "mode": mode, "face": face},
    )
