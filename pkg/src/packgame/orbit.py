"""Bounded orbit enumeration of ``Gamma(e1)`` and the packing predicates.

Every preset contains reflections in two parallel vertical walls (``x = 0``
and ``x = sqrt n`` for the plain presets), so the orbit is invariant under
the infinite dihedral group ``W`` they generate and infinitely many circles
share each curvature.  The search therefore runs on ``W``-classes: each class
is stored through its representative folded into the strip between the
walls.  For a generator ``g`` that moves ``E`` the curvature of ``g(w x)`` is
``(w x).F / 4`` with ``F = g^-1 E``, a convex quadratic in the translation
index of ``w``, so the finitely many useful ``w`` are found exactly by
scanning outwards from the minimum.  Circles are materialised afterwards in
an ``x``-window.

The search keeps everything with curvature ``<= bound``.  A child above the
bound but below ``grace_factor * bound`` is kept in a side set and expanded
once (only its in-bound children are kept), which is how words that leave
the window and come back are caught.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .exact import QuadElem, BiQuadElem, sign, simplify, to_float, xmul
from .lorentz import GramForm, LatticeVector, frame, gram

__all__ = [
    "Geometry",
    "lattice_geometry",
    "standard_geometry",
    "OrbitConfig",
    "Packing",
    "PackingReport",
    "ApollonianReport",
    "OrbitIncomplete",
    "enumerate_orbit",
    "check_packing_property",
    "tangency_graph",
    "candidate_pairs",
    "candidate_chunks",
    "cluster_partners",
    "certify_clusters",
    "ClusterCertificate",
    "check_apollonian_property",
    "transitivity_check",
    "direct_search",
    "pair_products",
    "preset_orbit",
    "default_window",
]

DELTA = 4
FLOAT_TOL = 1e-9


class OrbitIncomplete(RuntimeError):
    pass


def _tidy(x):
    if isinstance(x, (QuadElem, BiQuadElem)):
        x = simplify(x)
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def _div(a, b):
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        return q if r == 0 else Fraction(a, b)
    if isinstance(a, float) or isinstance(b, float):
        return float(a) / float(b)
    return _tidy(a / b)


def _fl(x) -> float:
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, Fraction):
        return x.numerator / x.denominator
    return float(to_float(x))


def _sign(x) -> int:
    if isinstance(x, float):
        return (x > 0) - (x < 0)
    return sign(x)


@dataclass(frozen=True)
class Geometry:
    """A Lorentz frame together with the data that locates circles in the plane.

    ``gram`` is the form; ``E`` the point at infinity (``curvature = v.E / 4``);
    the vertical line ``x = xscale * u`` has normal ``N0 + u N1`` and the
    horizontal line ``y = t`` has normal ``H0 + t H1``.  The scale keeps the
    wall arithmetic rational for the lattice frames.  ``exact`` is False for
    float frames.
    """

    gram: tuple
    E: tuple
    N0: tuple
    N1: tuple
    H0: tuple
    H1: tuple
    exact: bool = True
    name: str = ""
    ndigits: int = 7
    xscale: object = 1

    def dot(self, u: Sequence, v: Sequence):
        J = self.gram
        total = 0
        for i in range(4):
            ui = u[i]
            if not ui:
                continue
            row = J[i]
            s = 0
            for j in range(4):
                if row[j] and v[j]:
                    s = s + row[j] * v[j]
            total = total + ui * s
        return _tidy(total) if self.exact else total

    def curvature(self, v: Sequence):
        return _div(self.dot(v, self.E), DELTA)

    def center(self, v: Sequence) -> tuple:
        y = _div(-self.dot(v, self.H0), self.dot(v, self.H1))
        return self.center_x(v), y

    def center_u(self, v: Sequence):
        return _div(-self.dot(v, self.N0), self.dot(v, self.N1))

    def center_x(self, v: Sequence):
        u = self.center_u(v)
        if self.xscale == 1:
            return u
        if not self.exact:
            return u * self.xscale
        return _tidy(xmul(u, self.xscale))

    @property
    def xscale_float(self) -> float:
        return _fl(self.xscale)

    def center_float(self, v: Sequence) -> tuple[float, float]:
        y = _fl(-self.dot(v, self.H0)) / _fl(self.dot(v, self.H1))
        return _fl(self.center_u(v)) * self.xscale_float, y

    def wall(self, t) -> tuple:
        return tuple(_tidy(a + t * b) if self.exact else a + t * b for a, b in zip(self.N0, self.N1))

    def reflect(self, m: Sequence, v: Sequence, mm=None) -> tuple:
        if mm is None:
            mm = self.dot(m, m)
        c = _div(2 * self.dot(m, v), mm)
        if not c:
            return tuple(v)
        if self.exact:
            return tuple(_tidy(a - c * b) for a, b in zip(v, m))
        return tuple(a - c * b for a, b in zip(v, m))

    def apply(self, M: Sequence[Sequence], v: Sequence) -> tuple:
        out = []
        for row in M:
            s = 0
            for a, b in zip(row, v):
                if a and b:
                    s = s + a * b
            out.append(_tidy(s) if self.exact else s)
        return tuple(out)

    def key(self, v: Sequence):
        if self.exact:
            return tuple(v)
        return tuple(round(c, self.ndigits) + 0.0 for c in v)

    def to_float(self, v: Sequence) -> np.ndarray:
        return np.array([_fl(c) for c in v], dtype=float)

    def gram_float(self) -> np.ndarray:
        return np.array([[_fl(c) for c in row] for row in self.gram], dtype=float)

    def float_circles(self, V: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Curvature and center ``(b, x, y)`` of float rows (``nan`` centers for lines)."""
        J = self.gram_float()
        VJ = V @ J
        b = VJ @ self.to_float(self.E) / DELTA
        with np.errstate(divide="ignore", invalid="ignore"):
            u = -(VJ @ self.to_float(self.N0)) / (VJ @ self.to_float(self.N1))
            y = -(VJ @ self.to_float(self.H0)) / (VJ @ self.to_float(self.H1))
        line = np.abs(b) < 1e-12
        x = np.where(line, np.nan, u * self.xscale_float)
        y = np.where(line, np.nan, y)
        return b, x, y


def lattice_geometry(form: GramForm) -> Geometry:
    f = frame(form)
    rn = form.sqrt_n
    E = f.E.coords
    return Geometry(
        gram=form.rows,
        E=E,
        N0=f.v1.coords,
        N1=tuple(_tidy(-form.n * c) for c in E),
        H0=tuple(-c for c in f.e1.coords),
        H1=tuple(Fraction(c, 2) if c % 2 else c // 2 for c in E),
        exact=True,
        name=f"lattice n={form.n}",
        xscale=rn,
    )


J_STD = ((0, 1, 0, 0), (1, 0, 0, 0), (0, 0, -2, 0), (0, 0, 0, -2))


def standard_geometry(exact: bool = True) -> Geometry:
    """Inversive coordinates ``(co-curvature, curvature, curvature*x, curvature*y)``."""
    if exact:
        return Geometry(J_STD, (4, 0, 0, 0), (0, 0, 1, 0), (2, 0, 0, 0), (0, 0, 0, 1), (2, 0, 0, 0), True, "standard")
    fl = tuple(tuple(float(c) for c in row) for row in J_STD)
    return Geometry(fl, (4.0, 0.0, 0.0, 0.0), (0.0, 0.0, 1.0, 0.0), (2.0, 0.0, 0.0, 0.0),
                    (0.0, 0.0, 0.0, 1.0), (2.0, 0.0, 0.0, 0.0), False, "standard-float")


def _matrix_tuple(M) -> tuple:
    arr = M.matrix if hasattr(M, "matrix") else M
    return tuple(tuple(_tidy(c) for c in row) for row in np.asarray(arr, dtype=object))


def _inverse_gram_transpose(geom: Geometry, M: tuple) -> tuple:
    """``g^-1 = J^-1 g^T J`` for an isometry ``g`` of ``J``."""
    from . import linalg

    J = np.array(geom.gram, dtype=object if geom.exact else float)
    m = np.array(M, dtype=object if geom.exact else float)
    if geom.exact:
        inv = linalg.inverse(J).dot(m.T).dot(J)
        return _matrix_tuple(linalg.simplify_array(inv))
    inv = np.linalg.inv(J) @ m.T @ J
    return tuple(tuple(float(c) for c in row) for row in inv)


@dataclass
class OrbitConfig:
    generators: list
    bound: object
    geometry: Geometry
    seeds: list = None
    grace_factor: float = 4.0
    max_frontier: int = 10**7
    window: tuple | None = None
    names: list | None = None
    closure_rounds: int = 4
    kernel: bool = True

    def __post_init__(self):
        if not self.bound or _sign(self.bound) <= 0:
            raise ValueError("curvature bound must be positive")


@dataclass
class _Walls:
    lo: object
    hi: object
    m_lo: tuple
    m_hi: tuple
    mm: object
    period: object


@dataclass
class Packing:
    """Orbit classes and the circles they give inside an ``x``-window."""

    geometry: Geometry
    bound: object
    classes: list
    depth: dict
    walls: _Walls | None
    window: tuple
    vectors: list
    complete: bool
    complete_up_to: object
    form: GramForm | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __contains__(self, v) -> bool:
        return self.geometry.key(tuple(v)) in self._keyset

    @property
    def _keyset(self) -> set:
        ks = self.__dict__.get("_ks")
        if ks is None:
            ks = {self.geometry.key(v) for v in self.vectors}
            self.__dict__["_ks"] = ks
        return ks

    def curvatures(self) -> list:
        return [self.geometry.curvature(v) for v in self.vectors]

    def lattice_vectors(self) -> list[LatticeVector]:
        if self.form is None:
            raise ValueError("not a lattice packing")
        return [self.form.vector(v) for v in self.vectors]

    def float_array(self) -> np.ndarray:
        if not self.vectors:
            return np.zeros((0, 4))
        return np.array([self.geometry.to_float(v) for v in self.vectors])

    def in_window(self, v, window=None) -> bool:
        lo, hi = window or self.window
        if not self.geometry.curvature(v):
            return True
        x = self.geometry.center_float(v)[0]
        return lo - 1e-12 <= x <= hi + 1e-12


class _Engine:
    def __init__(self, cfg: OrbitConfig):
        self.cfg = cfg
        g = cfg.geometry
        self.g = g
        self.E = g.E
        mats = []
        for M in cfg.generators:
            M = _matrix_tuple(M)
            mats.append(M)
            if not self._involution(M):
                mats.append(_inverse_gram_transpose(g, M))
        self.walls, others = self._find_walls(mats)
        self.efix = []
        self.moving = []
        for M in others:
            gE = g.apply(M, self.E)
            if self._proportional(gE, self.E):
                self._check_commutes(M)
                self.efix.append(M)
            else:
                Minv = _inverse_gram_transpose(g, M)
                F = g.apply(Minv, self.E)
                self.moving.append((M, F))
        self.last_run = None
        self.class_nodes: dict = {}
        self.origin: dict = {}

    # -- set-up -------------------------------------------------------------
    def _involution(self, M) -> bool:
        g = self.g
        for k in range(4):
            e = tuple(1 if i == k else 0 for i in range(4))
            back = g.apply(M, g.apply(M, e))
            if any(not _is_zero(g, _sub(g, x, y)) for x, y in zip(back, e)):
                return False
        return True

    def _proportional(self, u, v) -> bool:
        return _proportional(self.g, u, v)

    def _mirror_of(self, M) -> tuple | None:
        """Mirror vector if ``M`` is a reflection (``M - I`` of rank one), else None."""
        g = self.g
        D = [[_tidy(M[i][j] - (1 if i == j else 0)) if g.exact else M[i][j] - (1.0 if i == j else 0.0)
              for j in range(4)] for i in range(4)]
        cols = [tuple(D[i][j] for i in range(4)) for j in range(4)]
        nz = [c for c in cols if any((abs(x) > 1e-12) if not g.exact else x for x in c)]
        if not nz:
            return None
        m = nz[0]
        for c in nz[1:]:
            if not self._proportional(c, m):
                return None
        # check M v = v - 2 (m.v)/(m.m) m on a basis
        mm = g.dot(m, m)
        if not mm or _sign(mm) >= 0:
            return None
        for k in range(4):
            e = tuple(1 if i == k else 0 for i in range(4))
            a = g.apply(M, e)
            b = g.reflect(m, e, mm)
            if g.exact:
                if any(_tidy(x - y) for x, y in zip(a, b)):
                    return None
            elif max(abs(x - y) for x, y in zip(a, b)) > 1e-9 * (1 + max(abs(x) for x in a)):
                return None
        return m

    def _find_walls(self, mats):
        g = self.g
        walls = []
        others = []
        for M in mats:
            m = self._mirror_of(M)
            if m is not None and _is_zero(g, g.dot(m, self.E)) and _is_vertical(g, m):
                walls.append((_line_x(g, m), M))
            else:
                others.append(M)
        if len(walls) != 2:
            raise NotImplementedError(
                f"orbit search needs exactly two vertical wall reflections, found {len(walls)}"
            )
        (x1, M1), (x2, M2) = sorted(walls, key=lambda w: _fl(w[0]))
        self.wall_mats = (M1, M2)
        if _sign(_sub(g, x2, x1)) <= 0:
            raise ValueError("the two walls coincide")
        m_lo, m_hi = g.wall(x1), g.wall(x2)
        mm = g.dot(m_lo, m_lo)
        return _Walls(x1, x2, m_lo, m_hi, mm, _mul2(g, _sub(g, x2, x1))), others

    def _check_commutes(self, M):
        g = self.g
        for m in (self.walls.m_lo, self.walls.m_hi):
            for k in range(4):
                e = tuple(1 if i == k else 0 for i in range(4))
                a = g.apply(M, g.reflect(m, e))
                b = g.reflect(m, g.apply(M, e))
                if any(not _is_zero(g, _sub(g, x, y)) for x, y in zip(a, b)):
                    raise NotImplementedError("a generator fixing infinity does not commute with the walls")

    # -- W action -------------------------------------------------------------
    def translate(self, v, k: int):
        """``T^k v`` where ``T`` translates by one period."""
        if k == 0:
            return tuple(v)
        W = self.walls
        g = self.g
        t = _add(g, W.lo, _half(g, _mulk(g, W.period, k)))
        v = g.reflect(W.m_lo, v, W.mm)
        return g.reflect(g.wall(t), v, W.mm)

    def replay(self, run: "_RunResult") -> tuple[dict, dict, dict]:
        """Exact vectors for the in-bound nodes of a float-backed search."""
        g = self.g
        ker, res = run.kernel, run.search
        gens = [M for M in self.efix] + [M for M, _ in self.moving]
        want = set(np.nonzero(res.inbound)[0].tolist())
        need = set()
        stack = list(want)
        while stack:
            i = stack.pop()
            if i in need:
                continue
            need.add(i)
            p = int(res.meta[i, 0])
            if p >= 0:
                stack.append(p)
        exact: dict[int, tuple] = {}
        seeds = self.cfg.seeds
        for i in sorted(need):
            p, gi, k, refl = (int(x) for x in res.meta[i])
            if p < 0:
                v = self.fold(tuple(seeds[gi]))
            else:
                y = exact[p]
                M = gens[gi]
                if gi >= len(self.efix) and not _is_zero(g, g.curvature(y)):
                    if refl:
                        y = g.reflect(self.walls.m_lo, y, self.walls.mm)
                    y = self.translate(y, k)
                v = self.fold(g.apply(M, y))
            ref = res.rows[i]
            got = g.to_float(v)
            if np.abs(got - ref).max() > 1e-6 * (1 + np.abs(ref).max()):
                raise AssertionError(f"exact replay diverged from the float search at node {i}")
            exact[i] = v
        found, depth, nodes = {}, {}, {}
        for i in want:
            v = exact[i]
            k = g.key(v)
            found[k] = v
            depth[k] = int(res.depth[i])
            nodes[k] = i
        return found, depth, nodes

    def fold(self, v):
        return self.fold_ops(v)[0]

    def fold_ops(self, v) -> tuple[tuple, int, bool]:
        """Folded ``v`` with the translation index ``k`` (applied as ``T^-k``) and the ``R_hi`` flag."""
        g = self.g
        b = g.curvature(v)
        if _is_zero(g, b):
            return tuple(v), 0, False
        W = self.walls
        x = g.center_u(v)
        k = math.floor((_fl(x) - _fl(W.lo)) / _fl(W.period))
        # exact correction of the float estimate
        for _ in range(4):
            base = _add(g, W.lo, _mulk(g, W.period, k))
            if _sign(_sub(g, x, base)) < 0:
                k -= 1
            elif _sign(_sub(g, x, _add(g, base, W.period))) >= 0:
                k += 1
            else:
                break
        v = self.translate(v, -k)
        x = g.center_u(v)
        over = _sign(_sub(g, x, W.hi)) > 0
        if over:
            v = g.reflect(W.m_hi, v, W.mm)
        return v, k, over

    def carry(self, run: "_RunResult", node: int, start: dict) -> tuple | None:
        """Exact images of ``start[seed]`` along the recorded word of ``node``.

        Returns ``(row, images)`` with ``row`` the node's vector, or ``None``
        when the root seed has no entry in ``start``.
        """
        g = self.g
        res = run.search
        gens = [M for M in self.efix] + [M for M, _ in self.moving]
        path = []
        i = node
        while res.meta[i, 0] >= 0:
            path.append(i)
            i = int(res.meta[i, 0])
        seed = int(res.meta[i, 1])
        if seed not in start:
            return None
        y = self.fold(tuple(self.cfg.seeds[seed]))
        Q = [tuple(q) for q in start[seed]]
        for i in reversed(path):
            _, gi, k, refl = (int(x) for x in res.meta[i])
            if gi >= len(self.efix) and not _is_zero(g, g.curvature(y)):
                if refl:
                    y = g.reflect(self.walls.m_lo, y, self.walls.mm)
                    Q = [g.reflect(self.walls.m_lo, q, self.walls.mm) for q in Q]
                y = self.translate(y, k)
                Q = [self.translate(q, k) for q in Q]
            M = gens[gi]
            y, kk, over = self.fold_ops(g.apply(M, y))
            Q = [self.translate(g.apply(M, q), -kk) for q in Q]
            if over:
                Q = [g.reflect(self.walls.m_hi, q, self.walls.mm) for q in Q]
        return y, Q

    def w_images(self, v, F, cap):
        """All ``w v`` (``w`` in ``W``) with ``(w v).F / 4 <= cap``; v is a folded circle."""
        g = self.g
        W = self.walls
        out = []
        P = _fl(W.period)
        xF = self._x_of_point(F)
        for y in (v, g.reflect(W.m_lo, v, W.mm)):
            if y is not v and self._same(y, v):
                continue
            xy = _fl(g.center_u(y))
            kstar = (xF - xy) / P if xF is not None else 0.0
            k0 = math.floor(kstar)
            for direction, start in ((-1, k0), (1, k0 + 1)):
                k = start
                while True:
                    yk = self.translate(y, k)
                    c = _div(g.dot(yk, F), DELTA)
                    if _sign(_sub(g, c, cap)) > 0:
                        break
                    out.append(yk)
                    k += direction
        return out

    def _x_of_point(self, F):
        g = self.g
        if _is_zero(g, g.dot(F, self.E)):
            return None
        return _fl(g.center_u(F))

    def _same(self, a, b) -> bool:
        return self.g.key(a) == self.g.key(b)

    # -- search ---------------------------------------------------------------
    def run(self, bound=None) -> "_RunResult":
        g = self.g
        cfg = self.cfg
        bound = cfg.bound if bound is None else bound
        grace_cap = _mul_float_cap(g, bound, cfg.grace_factor)
        if cfg.kernel:
            mode = "int" if _ArrayKernel.int_usable(self) else "float"
            try:
                ker = _ArrayKernel(self, mode)
                res = ker.run(cfg.seeds, bound, grace_cap, cfg.max_frontier)
            except OverflowError:
                ker = _ArrayKernel(self, "float")
                res = ker.run(cfg.seeds, bound, grace_cap, cfg.max_frontier)
            replay = g.exact and ker.mode == "float"
            found, depth, nodes = {}, {}, {}
            for i in np.nonzero(res.inbound)[0]:
                row = res.rows[i]
                v = tuple(int(c) for c in row) if ker.mode == "int" else tuple(float(c) for c in row)
                k = res.keys[i] if replay else g.key(v)
                found[k] = v
                depth[k] = int(res.depth[i])
                nodes[k] = int(i)
            return _RunResult(found, depth, res.complete, ker, res, replay, nodes)
        found, depth, complete = self._run_slow(bound, grace_cap)
        return _RunResult(found, depth, complete)

    def _run_slow(self, bound, grace_cap):
        g = self.g
        cfg = self.cfg
        seeds = cfg.seeds
        found: dict = {}
        depth: dict = {}
        grace: set = set()
        queue = deque()
        for s in seeds:
            s = self.fold(tuple(s))
            k = g.key(s)
            if k not in found:
                found[k] = s
                depth[k] = 0
                queue.append((s, 0))
        complete = True
        while queue:
            v, d = queue.popleft()
            for child in self.children(v, grace_cap):
                c = g.curvature(child)
                k = g.key(child)
                if _sign(_sub(g, c, bound)) <= 0:
                    if k not in found:
                        found[k] = child
                        depth[k] = d + 1
                        queue.append((child, d + 1))
                elif k not in grace and k not in found:
                    grace.add(k)
                    for gc in self.children(child, bound):
                        kk = g.key(gc)
                        if kk not in found and _sign(_sub(g, g.curvature(gc), bound)) <= 0:
                            found[kk] = gc
                            depth[kk] = d + 2
                            queue.append((gc, d + 2))
            if len(found) + len(grace) > cfg.max_frontier:
                complete = False
                break
        return found, depth, complete

    def children(self, v, cap):
        g = self.g
        out = []
        is_line = _is_zero(g, g.curvature(v))
        for M in self.efix:
            out.append(self.fold(g.apply(M, v)))
        for M, F in self.moving:
            if is_line:
                if _sign(_sub(g, _div(g.dot(v, F), DELTA), cap)) <= 0:
                    out.append(self.fold(g.apply(M, v)))
                continue
            for y in self.w_images(v, F, cap):
                out.append(self.fold(g.apply(M, y)))
        return out

    def materialize(self, classes: Iterable, window) -> list:
        """Translates of the classes (and their mirror images) inside the window.

        ``self.origin`` maps each key to ``(class key, reflected, k)``.
        """
        g = self.g
        W = self.walls
        xs = g.xscale_float
        lo, hi = window[0] / xs, window[1] / xs
        P = _fl(W.period)
        out = {}
        origin = self.origin = {}
        for v in classes:
            cv = g.key(v)
            if _is_zero(g, g.curvature(v)):
                out[cv] = v
                origin[cv] = (cv, 0, 0)
                continue
            for refl, y in enumerate((v, g.reflect(W.m_lo, v, W.mm))):
                xy = _fl(g.center_u(y))
                kmin = math.floor((lo - xy) / P) - 1
                kmax = math.ceil((hi - xy) / P) + 1
                for k in range(kmin, kmax + 1):
                    yk = self.translate(y, k)
                    x = _fl(g.center_u(yk))
                    if lo - 1e-12 <= x <= hi + 1e-12:
                        kk = g.key(yk)
                        if kk not in out:
                            out[kk] = yk
                            origin[kk] = (cv, refl, k)
        return list(out.values())


def _is_zero(g: Geometry, x) -> bool:
    if g.exact:
        return not x
    return abs(x) < 1e-12


def _proportional(g: Geometry, u, v) -> bool:
    if g.exact:
        if not any(u) or not any(v):
            return False
        return all(not _tidy(u[i] * v[j] - u[j] * v[i]) for i in range(4) for j in range(i + 1, 4))
    a = np.asarray(u, dtype=float)
    b = np.asarray(v, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return False
    return min(np.linalg.norm(a / na - b / nb), np.linalg.norm(a / na + b / nb)) < 1e-9


def _is_vertical(g: Geometry, m) -> bool:
    """A line normal is vertical iff it is orthogonal to the horizontal-line normals."""
    return _is_zero(g, g.dot(m, g.H0)) and _is_zero(g, g.dot(m, g.H1))


def _line_x(g: Geometry, m):
    """``u`` with ``m`` proportional to ``N0 + u N1``."""
    i = next(k for k in range(4) if _is_zero(g, g.N1[k]) and not _is_zero(g, g.N0[k]))
    j = next(k for k in range(4) if not _is_zero(g, g.N1[k]))
    s = _div(m[i], g.N0[i])
    return _div(_sub(g, _div(m[j], s), g.N0[j]), g.N1[j])


def _sub(g, a, b):
    return _tidy(a - b) if g.exact else a - b


def _add(g, a, b):
    return _tidy(a + b) if g.exact else a + b


def _mulk(g, a, k: int):
    return _tidy(a * k) if g.exact else a * k


def _half(g, a):
    return _div(a, 2)


def _mul2(g, a):
    return _tidy(2 * a) if g.exact else 2 * a


def _mul_float_cap(g, bound, factor):
    if g.exact:
        return _tidy(bound * Fraction(factor).limit_denominator(1000))
    return bound * factor


def default_window(walls: _Walls, xscale: float = 1.0) -> tuple[float, float]:
    lo, hi = _fl(walls.lo) * xscale, _fl(walls.hi) * xscale
    w = hi - lo
    return (lo - w, hi + w)


def enumerate_orbit(cfg: OrbitConfig, form: GramForm | None = None) -> Packing:
    """Enumerate ``Gamma(seeds)`` up to the curvature bound (plus lines)."""
    g = cfg.geometry
    if cfg.seeds is None:
        raise ValueError("no seed vectors")
    seeds = [tuple(s) for s in cfg.seeds]
    for s in seeds:
        nn = g.dot(s, s)
        if (g.exact and nn != -2) or (not g.exact and abs(nn + 2) > 1e-9):
            raise ValueError(f"seed {s} does not have norm -2")
    cfg.seeds = seeds
    eng = _Engine(cfg)
    found, depth, complete, internal, stable = _closure(eng, g, cfg)
    classes = _canonical_sort(g, found.values())
    window = cfg.window or default_window(eng.walls, g.xscale_float)
    vectors = _canonical_sort(g, eng.materialize(classes, window))
    if g.exact:
        for v in vectors:
            if g.dot(v, v) != -2:
                raise AssertionError(f"norm drift at {v}")
    pk = Packing(
        geometry=g,
        bound=cfg.bound,
        classes=classes,
        depth=depth,
        walls=eng.walls,
        window=window,
        vectors=vectors,
        complete=complete and stable,
        complete_up_to=cfg.bound if complete and stable else None,
        form=form,
        meta={"internal_bound": internal, "stable": stable, "grace_factor": cfg.grace_factor},
    )
    pk.__dict__["_engine"] = eng
    return pk


@dataclass
class _RunResult:
    found: dict
    depth: dict
    complete: bool
    kernel: object = None
    search: object = None
    replay: bool = False
    nodes: dict = field(default_factory=dict)

    def curvature(self, g: Geometry, k) -> float:
        v = self.found[k]
        if self.replay:
            return float(np.dot(v, self.kernel.JE)) / DELTA
        return _fl(g.curvature(v))


def _closure(eng: _Engine, g: Geometry, cfg: OrbitConfig):
    """Search with internal bounds ``B, 2B, 4B, ...`` until the part ``<= B`` stops changing.

    Words through circles above ``B`` can land below it; doubling the
    internal bound until two successive answers agree catches them.  With
    ``closure_rounds = 0`` a single search at ``B`` is returned (``stable`` False).
    """
    bound = cfg.bound
    fb = _fl(bound)

    def inside(run: _RunResult) -> set:
        if not run.replay and g.exact:
            return {k for k, v in run.found.items() if _sign(_sub(g, g.curvature(v), bound)) <= 0}
        return {k for k in run.found if run.curvature(g, k) <= fb * (1 + 1e-12) + 1e-9}

    def finish(run: _RunResult, keys: set, internal, stable):
        if run.replay:
            found, depth, nodes = eng.replay(run)
            found = {k: v for k, v in found.items() if _sign(_sub(g, g.curvature(v), bound)) <= 0}
        else:
            found = {k: run.found[k] for k in keys}
            depth, nodes = run.depth, run.nodes
        eng.last_run = run
        eng.class_nodes = {k: nodes[k] for k in found if k in nodes}
        return found, {k: depth[k] for k in found}, run.complete, internal, stable

    run = eng.run(bound)
    keys = inside(run)
    internal = bound
    if cfg.closure_rounds <= 0:
        return finish(run, keys, internal, False)
    for _ in range(cfg.closure_rounds):
        internal = _mulk(g, internal, 2)
        run2 = eng.run(internal)
        keys2 = inside(run2)
        if _same_keys(g, keys, keys2):
            return finish(run2, keys2, internal, True)
        run, keys = run2, keys2
    return finish(run, keys, internal, False)


def _same_keys(g: Geometry, a: set, b: set) -> bool:
    if len(a) != len(b):
        return False
    if g.exact and all(isinstance(c, int) for k in a for c in k):
        return a == b
    A = np.array(sorted(a), dtype=float).reshape(-1, 4)
    B = np.array(sorted(b), dtype=float).reshape(-1, 4)
    return bool(np.allclose(A, B, rtol=1e-6, atol=1e-6))


def _canonical_sort(g: Geometry, vecs: Iterable) -> list:
    def key(v):
        b = g.curvature(v)
        if _is_zero(g, b):
            x, y = 0.0, _fl(_div(-g.dot(v, g.H0), g.dot(v, g.H1))) if not _is_zero(g, g.dot(v, g.H1)) else 0.0
        else:
            x, y = g.center_float(v)
        return (round(_fl(b), 9), round(x, 9), round(y, 9), tuple(repr(c) for c in v))

    return sorted(vecs, key=key)


# --- predicates -------------------------------------------------------------


def pair_products(pk: Packing, block: int = 2048) -> Iterable[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield ``(i, j, product)`` arrays for all pairs ``i < j`` in float64, blockwise."""
    V = pk.float_array()
    J = pk.geometry.gram_float()
    VJ = V @ J
    n = len(V)
    for s in range(0, n, block):
        blk = VJ[s : s + block] @ V.T
        ii, jj = np.nonzero(_upper(blk.shape, s))
        yield ii + s, jj, blk[ii, jj]


def _upper(shape, offset):
    rows, cols = shape
    r = np.arange(rows)[:, None] + offset
    c = np.arange(cols)[None, :]
    return c > r


def _exact_int_ok(pk: Packing) -> bool:
    """True when float64 products of these integer vectors are exact."""
    if not pk.geometry.exact or not pk.vectors:
        return False
    if not all(isinstance(c, int) for v in pk.vectors for c in v):
        return False
    m = max(abs(c) for v in pk.vectors for c in v)
    jmax = max(abs(c) for row in pk.geometry.gram for c in row)
    return 16 * jmax * m * m < 2**52


@dataclass
class PackingReport:
    ok: bool
    pairs: int
    violations: list
    odd_products: list
    duplicates: int
    mode: str


def check_packing_property(
    pk: Packing, tol: float = FLOAT_TOL, max_report: int = 20, pairs: str = "all"
) -> PackingReport:
    """All distinct pairs have product ``>= 2`` (and even, for integer lattices).

    ``pairs="sweep"`` only looks at pairs whose bounding boxes touch; circles
    with disjoint boxes are disjoint, so overlaps are still all found, but
    parity is then checked on those pairs only.
    """
    if pairs not in ("all", "sweep"):
        raise ValueError(f"unknown pair mode {pairs!r}")
    g = pk.geometry
    keys = [g.key(v) for v in pk.vectors]
    dups = len(keys) - len(set(keys))
    int_exact = _exact_int_ok(pk)
    mode = "exact-int" if int_exact else ("exact" if g.exact else "float")
    violations = []
    odd = []
    count = 0
    for ii, jj, prod in pair_products(pk) if pairs == "all" else _sweep_products(pk):
        count += len(prod)
        if int_exact:
            bad = np.nonzero(prod < 2)[0]
            for t in bad[:max_report]:
                violations.append((pk.vectors[ii[t]], pk.vectors[jj[t]], int(prod[t])))
            oddm = np.nonzero(np.mod(prod, 2) != 0)[0]
            for t in oddm[:max_report]:
                odd.append((pk.vectors[ii[t]], pk.vectors[jj[t]], int(prod[t])))
        elif g.exact:
            # float prefilter, exact confirmation near the threshold
            near = np.nonzero(prod < 2 + 1e-6 * (1 + np.abs(prod)))[0]
            for t in near:
                u, v = pk.vectors[ii[t]], pk.vectors[jj[t]]
                p = g.dot(u, v)
                if _sign(p - 2) < 0:
                    violations.append((u, v, p))
        else:
            bad = np.nonzero(prod < 2 - tol)[0]
            for t in bad[:max_report]:
                violations.append((pk.vectors[ii[t]], pk.vectors[jj[t]], float(prod[t])))
        if pairs == "sweep" and len(violations) >= max_report:
            break
    return PackingReport(not violations and not odd, count, violations[:max_report], odd[:max_report], dups, mode)


def _sweep_products(pk: Packing):
    V = pk.float_array()
    VJ = V @ pk.geometry.gram_float()
    for ii, jj in candidate_chunks(pk):
        yield ii, jj, np.einsum("ij,ij->i", VJ[ii], V[jj])


def candidate_chunks(pk: Packing, slack: float = 1e-7, chunk: int = 2_000_000):
    """Yield ``(i, j)`` arrays (``i < j``) of pairs whose bounding boxes touch.

    Lines and inverted circles pair with everything.  Each pair appears once.
    """
    V = pk.float_array()
    n = len(V)
    if n < 2:
        return
    b, x, y = pk.geometry.float_circles(V)
    flat = ~(b > 1e-12)
    circ = np.nonzero(~flat)[0]
    r = 1.0 / b[circ]
    pad = slack * (1 + r)
    left, right = x[circ] - r - pad, x[circ] + r + pad
    order = np.argsort(left, kind="stable")
    ls, rs = left[order], right[order]
    stop = np.searchsorted(ls, rs, side="right")
    counts = stop - np.arange(len(order)) - 1
    cum = np.cumsum(counts)
    s0 = 0
    while s0 < len(order):
        s1 = int(np.searchsorted(cum, (cum[s0 - 1] if s0 else 0) + chunk, side="right"))
        s1 = max(s1, s0 + 1)
        cnt = counts[s0:s1]
        a = np.repeat(np.arange(s0, s1), cnt)
        start = np.cumsum(cnt) - cnt
        bb = np.arange(int(cnt.sum())) - np.repeat(start, cnt) + a + 1
        ci, cj = circ[order[a]], circ[order[bb]]
        ri, rj = 1.0 / b[ci], 1.0 / b[cj]
        keep = np.abs(y[ci] - y[cj]) <= ri + rj + slack * (1 + ri + rj)
        ci, cj = ci[keep], cj[keep]
        if len(ci):
            yield np.minimum(ci, cj), np.maximum(ci, cj)
        s0 = s1
    fl = np.nonzero(flat)[0]
    others = np.nonzero(~flat)[0]
    for t, f in enumerate(fl):
        j = np.concatenate([fl[t + 1 :], others])
        if len(j):
            yield np.minimum(f, j), np.maximum(f, j)


def candidate_pairs(pk: Packing, slack: float = 1e-7) -> tuple[np.ndarray, np.ndarray]:
    """All pairs ``i < j`` whose bounding boxes touch, as two index arrays."""
    parts = list(candidate_chunks(pk, slack))
    if not parts:
        e = np.zeros(0, dtype=np.int64)
        return e, e
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def tangency_graph(pk: Packing, tol: float = FLOAT_TOL) -> dict[int, set[int]]:
    """Adjacency on indices of ``pk.vectors``: an edge iff the product is exactly 2."""
    g = pk.geometry
    int_exact = _exact_int_ok(pk)
    adj: dict[int, set[int]] = {i: set() for i in range(len(pk.vectors))}
    ii, jj = candidate_pairs(pk)
    if not len(ii):
        return adj
    V = pk.float_array()
    prod = np.einsum("ij,ij->i", V[ii] @ g.gram_float(), V[jj])
    cand = np.nonzero(np.abs(prod - 2) < (0.5 if int_exact else 1e-6 * (1 + np.abs(prod))))[0]
    for t in cand:
        i, j = int(ii[t]), int(jj[t])
        if int_exact:
            ok = prod[t] == 2
        elif g.exact:
            ok = g.dot(pk.vectors[i], pk.vectors[j]) == 2
        else:
            ok = abs(prod[t] - 2) < tol * max(1.0, abs(prod[t]))
        if ok:
            adj[i].add(j)
            adj[j].add(i)
    return adj


@dataclass
class ApollonianReport:
    verified: list
    failures: list
    unverifiable_near_boundary: list
    interior_bound: object
    interior_window: tuple
    beyond_bound: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def verified_circles(self) -> list:
        return self.verified

    @property
    def unverifiable(self) -> list:
        return self.unverifiable_near_boundary + self.beyond_bound


def _clique4(adj: dict, i: int) -> tuple | None:
    nb = adj[i]
    for a in sorted(nb):
        common = nb & adj[a]
        for b in sorted(common):
            rest = common & adj[b]
            if rest:
                return (a, b, min(rest))
    return None


def _in_clique4(adj: dict, i: int) -> bool:
    return _clique4(adj, i) is not None


def cluster_partners(pk: Packing, adj: dict) -> dict:
    """For every circle, the images of the seed's clique partners (float rows).

    A circle ``g(seed)`` lies in the cluster ``g(C)`` of a clique ``C`` through
    the seed, so its partners follow from the word that produced it.  Circles
    whose word is unknown (slow search, no seed clique) map to ``None``.
    """
    eng = pk.__dict__.get("_engine")
    run = getattr(eng, "last_run", None)
    if run is None or run.kernel is None or not eng.class_nodes:
        return {}
    g = pk.geometry
    ker, res = run.kernel, run.search
    index = {g.key(v): i for i, v in enumerate(pk.vectors)}
    V = pk.float_array()
    seed_partners = {}
    for ck, node in eng.class_nodes.items():
        if res.meta[node, 0] >= 0 or ck not in index:
            continue
        cl = _clique4(adj, index[ck])
        if cl is not None:
            seed_partners[int(res.meta[node, 1])] = V[list(cl)]
    want = set(eng.class_nodes.values())
    Q = ker.transport(res, seed_partners, want)
    Rlo = ker.Rlo.astype(float)
    out = {}
    for i, v in enumerate(pk.vectors):
        ck, refl, k = eng.origin.get(g.key(v), (None, 0, 0))
        node = eng.class_nodes.get(ck)
        P = None if node is None else Q.get(node)
        if P is not None:
            if refl:
                P = P @ Rlo.T
            P = ker.power_float(P, k)
        out[i] = P
    return out


@dataclass
class ClusterCertificate:
    circle: tuple
    partners: list
    exact: bool
    ok: bool


def certify_clusters(pk: Packing, circles: Iterable, adj: dict | None = None) -> list[ClusterCertificate]:
    """Rebuild the carried seed clique of each circle along its word and check it.

    The seed's clique partners are orbit circles, so their images are too;
    a certificate is ``ok`` when the circle equals the carried seed and the
    four circles have norm ``-2`` and pairwise product ``2`` (exactly when the
    geometry is exact, to ``FLOAT_TOL`` otherwise).
    """
    eng = pk.__dict__.get("_engine")
    run = getattr(eng, "last_run", None)
    if run is None or run.search is None:
        raise ValueError("certificates need a kernel search")
    g = pk.geometry
    if adj is None:
        adj = tangency_graph(pk)
    index = {g.key(v): i for i, v in enumerate(pk.vectors)}
    res = run.search
    start = {}
    for ck, node in eng.class_nodes.items():
        if res.meta[node, 0] < 0 and ck in index:
            cl = _clique4(adj, index[ck])
            if cl is not None:
                start[int(res.meta[node, 1])] = [pk.vectors[j] for j in cl]
    W = eng.walls
    out = []
    for v in circles:
        ck, refl, k = eng.origin[g.key(v)]
        node = eng.class_nodes.get(ck)
        got = None if node is None else eng.carry(run, node, start)
        if got is None:
            out.append(ClusterCertificate(tuple(v), [], g.exact, False))
            continue
        y, Q = got
        if refl:
            y = g.reflect(W.m_lo, y, W.mm)
            Q = [g.reflect(W.m_lo, q, W.mm) for q in Q]
        y = eng.translate(y, k)
        Q = [eng.translate(q, k) for q in Q]
        four = [y] + Q
        if g.exact:
            ok = g.key(y) == g.key(v) and all(
                g.dot(a, b) == (-2 if i == j else 2) for i, a in enumerate(four) for j, b in enumerate(four)
            )
        else:
            F = np.array([g.to_float(c) for c in four])
            G = F @ g.gram_float() @ F.T
            want = np.full((4, 4), 2.0) - 4 * np.eye(4)
            ok = bool(np.abs(G - want).max() <= FLOAT_TOL * max(1.0, np.abs(G).max())) and bool(
                np.allclose(g.to_float(y), g.to_float(v), rtol=1e-9, atol=1e-9)
            )
        out.append(ClusterCertificate(tuple(v), Q, g.exact, ok))
    return out


def check_apollonian_property(
    pk: Packing,
    adj: dict | None = None,
    interior_bound=None,
    interior_window: tuple | None = None,
) -> ApollonianReport:
    """Which circles lie in four mutually tangent circles of the packing.

    Circles with curvature ``<= interior_bound`` and center inside
    ``interior_window`` are interior.  An interior circle without a clique
    whose cluster partners (carried from the seed's clique) have curvature
    above the enumeration bound goes to ``beyond_bound``; one whose partners
    leave the window goes to ``unverifiable_near_boundary``; otherwise it is
    a failure.  Non-interior circles without a clique are unverifiable.
    """
    g = pk.geometry
    if adj is None:
        adj = tangency_graph(pk)
    if interior_bound is None:
        interior_bound = _fl(pk.bound) / 2
    if interior_window is None:
        lo, hi = pk.window
        w = (hi - lo) / 4
        interior_window = (lo + w, hi - w)
    verified, failures, unver, beyond = [], [], [], []
    partners = None
    fb = _fl(pk.bound)
    lo, hi = pk.window
    for i, v in enumerate(pk.vectors):
        if _in_clique4(adj, i):
            verified.append(v)
            continue
        b = _fl(g.curvature(v))
        interior = b <= _fl(interior_bound) + 1e-12 and (
            b == 0 or interior_window[0] <= g.center_float(v)[0] <= interior_window[1]
        )
        if not interior:
            unver.append(v)
            continue
        if partners is None:
            partners = cluster_partners(pk, adj)
        P = partners.get(i)
        if P is None:
            failures.append(v)
            continue
        pb, px, _ = g.float_circles(P)
        if (pb > fb * (1 + 1e-9) + 1e-9).any():
            beyond.append(v)
        elif ((pb > 1e-12) & ((px < lo - 1e-9) | (px > hi + 1e-9))).any():
            unver.append(v)
        else:
            failures.append(v)
    return ApollonianReport(verified, failures, unver, interior_bound, interior_window, beyond)


def transitivity_check(candidates: Iterable, orbit: Packing) -> bool:
    """True iff every candidate vector is in the enumerated orbit."""
    return all(tuple(c) in orbit for c in candidates)


def direct_search(form: GramForm, bound: int, window: tuple, admissible_against: Packing | None = None) -> list:
    """All norm ``-2`` vectors of ``Lambda_n`` with curvature ``<= bound`` between the strip lines.

    Independent of the group: for ``v = (p, q, r, s)`` the curvature is
    ``b = r + s``, the center is ``x = 2 sqrt(n) s / b`` and
    ``y = (q - p + b) / b``; we scan ``b``, ``s`` (from the ``x``-window) and
    ``d = q - p`` with ``0 < y < 2`` and solve the norm equation for ``p``.
    Lines: the only admissible ones are the horizontal lines ``y = 0, 2``;
    all horizontal norm ``-2`` lines ``y = 2k`` with ``|k| <= 3`` are offered.
    With ``admissible_against`` the candidates are filtered to those with
    product ``>= 2`` against every member of that packing (other than itself).
    """
    n = form.n
    rn = math.sqrt(float(n))
    out = []
    for q in range(-3, 4):
        for sgn in (1, -1):
            # lines: s = r = 0, q - p = sgn
            v = (q - sgn, q, 0, 0)
            if form.product(v, v) == -2:
                out.append(v)
    for b in range(1, int(bound) + 1):
        smin = math.floor(window[0] * b / (2 * rn)) - 1
        smax = math.ceil(window[1] * b / (2 * rn)) + 1
        for s in range(smin, smax + 1):
            x = 2 * rn * s / b
            if not (window[0] - 1e-12 <= x <= window[1] + 1e-12):
                continue
            r = b - s
            for d in range(-b, b + 1):
                # q = p + d; norm = Q(p, p + d, r, s) is linear in p
                c0 = form.product((0, d, r, s), (0, d, r, s))
                c1 = 2 * form.product((1, 1, 0, 0), (0, d, r, s))
                # (1,1,0,0) is lightlike, so the norm is c0 + c1 p
                if c1 == 0:
                    continue
                num = -2 - c0
                if num % c1:
                    continue
                p = num // c1
                v = (p, p + d, r, s)
                if form.product(v, v) == -2:
                    out.append(v)
    out = sorted(set(out))
    if admissible_against is not None:
        out = _filter_admissible(out, admissible_against)
    return out


def _filter_admissible(cands: list, pk: Packing) -> list:
    g = pk.geometry
    V = pk.float_array()
    J = g.gram_float()
    C = np.array(cands, dtype=float)
    prod = C @ J @ V.T
    keep = []
    keys = {g.key(v) for v in pk.vectors}
    for i, c in enumerate(cands):
        row = prod[i]
        bad = row < 2 - 1e-9
        if g.key(c) in keys:
            # its own entry has product -2
            bad &= np.abs(row + 2) > 1e-9
        if not bad.any():
            keep.append(c)
    return keep


def preset_orbit(preset, bound, window: tuple | None = None, grace_factor: float = 4.0,
                 max_frontier: int = 10**7) -> Packing:
    """``Gamma_n(e1)`` for a catalog preset."""
    form = preset.form
    geom = lattice_geometry(form)
    cfg = OrbitConfig(
        generators=preset.isometries,
        bound=bound,
        geometry=geom,
        seeds=[preset.seed.coords],
        grace_factor=grace_factor,
        max_frontier=max_frontier,
        window=window,
        names=preset.names(),
    )
    return enumerate_orbit(cfg, form)


# --- vectorised kernel --------------------------------------------------------

_INT_LIMIT = 2**40


def _common_denominator(vecs) -> int:
    d = 1
    for v in vecs:
        for c in v:
            if isinstance(c, Fraction):
                d = d * c.denominator // math.gcd(d, c.denominator)
            elif not isinstance(c, int):
                return 0
    return d


def _all_int(mats) -> bool:
    return all(isinstance(c, int) for M in mats for row in M for c in row)


@dataclass
class _Search:
    rows: np.ndarray
    meta: np.ndarray
    depth: np.ndarray
    inbound: np.ndarray
    complete: bool
    keys: list


class _ArrayKernel:
    """Batched search over numpy arrays, exact in int64 or approximate in float64.

    ``T = R_hi R_lo`` is unipotent with ``(T - I)^3 = 0``, so
    ``T^k = I + k N + k(k-1)/2 N^2`` for every integer ``k`` and the useful
    ``k`` for a given child are the integers under a parabola.  Every node
    records ``(parent, generator, k, reflected)`` so that exact vectors can be
    rebuilt from a float search.
    """

    def __init__(self, eng: "_Engine", mode: str):
        self.eng = eng
        self.mode = mode
        self.inverted = 0
        g = eng.g
        if mode == "int":
            dt, conv = np.int64, int
        else:
            dt, conv = float, _fl

        def arr(M):
            return np.array([[conv(c) for c in row] for row in M], dtype=dt)

        self.dt = dt
        self.J = arr(g.gram)
        self.Rlo, self.Rhi = (arr(M) for M in eng.wall_mats)
        T = self.Rhi @ self.Rlo
        self.N = T - np.eye(4, dtype=dt)
        self.N2 = self.N @ self.N
        N3 = self.N2 @ self.N
        if mode == "int" and np.any(N3):
            raise ValueError("wall translation is not parabolic")
        if mode == "float" and np.abs(N3).max() > 1e-9 * (1 + np.abs(self.N).max() ** 3):
            raise ValueError("wall translation is not parabolic")
        if mode == "int":
            d = _common_denominator([g.N0, g.N1])
            N0 = np.array([int(c * d) for c in g.N0], dtype=dt)
            N1 = np.array([int(c * d) for c in g.N1], dtype=dt)
        else:
            N0 = np.array([_fl(c) for c in g.N0])
            N1 = np.array([_fl(c) for c in g.N1])
        self.JN0 = self.J @ N0
        self.JN1 = self.J @ N1
        self.JE = self.J @ np.array([conv(c) for c in g.E], dtype=dt)
        W = eng.walls
        if mode == "int":
            self.lo, self.hi, self.P = (Fraction(x) for x in (W.lo, W.hi, W.period))
        else:
            self.lo, self.hi, self.P = (_fl(x) for x in (W.lo, W.hi, W.period))
        self.gens = [("fix", arr(M), None) for M in eng.efix]
        self.gens += [("move", arr(M), self.J @ np.array([conv(c) for c in F], dtype=dt)) for M, F in eng.moving]
        self.ndigits = 6

    @staticmethod
    def int_usable(eng: "_Engine") -> bool:
        g = eng.g
        if not g.exact:
            return False
        mats = list(eng.wall_mats) + eng.efix + [M for M, _ in eng.moving]
        if not _all_int(mats) or not _all_int([g.gram]):
            return False
        if any(not isinstance(c, int) for _, F in eng.moving for c in F):
            return False
        if _common_denominator([g.N0, g.N1]) == 0:
            return False
        return all(isinstance(x, (int, Fraction)) for x in (eng.walls.lo, eng.walls.hi))

    # -- arithmetic ----------------------------------------------------------
    def power(self, V: np.ndarray, k: np.ndarray) -> np.ndarray:
        """Row-wise ``T^k v``."""
        k = k[:, None]
        return V + k * (V @ self.N.T) + (k * (k - 1) // 2 if self.mode == "int" else k * (k - 1) / 2) * (
            V @ self.N2.T
        )

    def _guard(self, V):
        if self.mode == "int" and len(V) and np.abs(V).max() > _INT_LIMIT:
            raise OverflowError("coordinates too large for the int64 kernel")

    def curv4(self, V):
        return V @ self.JE

    def le_cap(self, c4: np.ndarray, cap) -> np.ndarray:
        """``c4 / 4 <= cap``."""
        if self.mode == "int":
            return c4 * cap.denominator <= 4 * cap.numerator
        return c4 <= 4 * cap * (1 + 1e-12) + 1e-9

    def is_line(self, V):
        c4 = self.curv4(V)
        if self.mode == "int":
            return c4 == 0
        return np.abs(c4) < 1e-9

    def fold(self, V: np.ndarray) -> np.ndarray:
        return self.fold_ops(V)[0]

    def fold_ops(self, V: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Folded rows with the translation index ``k`` (applied as ``T^-k``) and the ``R_hi`` flag."""
        zero = np.zeros(len(V), dtype=np.int64)
        if not len(V):
            return V, zero, zero.astype(bool)
        circ = ~self.is_line(V)
        if not circ.any():
            return V, zero, zero.astype(bool)
        A = V @ self.JN0
        Bn = V @ self.JN1
        if self.mode == "int":
            ln, ld = self.lo.numerator, self.lo.denominator
            pn, pd = self.P.numerator, self.P.denominator
            num = np.where(circ, (-A * ld - ln * Bn) * pd, 0)
            den = np.where(circ, Bn * ld * pn, 1)
            k = np.floor_divide(num, den)
        else:
            u = -A / np.where(circ, Bn, 1.0)
            k = np.where(circ, np.floor((u - self.lo) / self.P), 0.0)
        out = self.power(V, -k)
        A = out @ self.JN0
        Bn = out @ self.JN1
        if self.mode == "int":
            hn, hd = self.hi.numerator, self.hi.denominator
            over = circ & ((-A * hd - hn * Bn) * np.sign(Bn) > 0)
        else:
            over = circ & (-A / np.where(circ, Bn, 1.0) > self.hi)
        if over.any():
            out[over] = out[over] @ self.Rhi.T
        self._guard(out)
        return out, k.astype(np.int64), over

    def children(self, V: np.ndarray, cap) -> tuple[np.ndarray, np.ndarray]:
        """All folded ``g w v`` with curvature ``<= cap`` and their provenance ``(src, gen, k, refl)``."""
        rows, metas = [], []
        lines = self.is_line(V)
        li = np.nonzero(lines)[0]
        ci = np.nonzero(~lines)[0]
        capf = float(cap)
        for gi, (kind, M, JF) in enumerate(self.gens):
            if kind == "fix":
                rows.append(V @ M.T)
                metas.append(np.stack([np.arange(len(V)), np.full(len(V), gi), np.zeros(len(V)), np.zeros(len(V))], 1))
                continue
            if len(li):
                L = V[li]
                ok = self.le_cap(L @ JF, cap)
                rows.append(L[ok] @ M.T)
                m = np.zeros((int(ok.sum()), 4))
                m[:, 0] = li[ok]
                m[:, 1] = gi
                metas.append(m)
            if not len(ci):
                continue
            C = V[ci]
            Z = np.concatenate([C, C @ self.Rlo.T])
            src = np.concatenate([ci, ci])
            refl = np.concatenate([np.zeros(len(ci)), np.ones(len(ci))])
            a = (Z @ JF).astype(float)
            b = ((Z @ self.N.T) @ JF).astype(float)
            c = ((Z @ self.N2.T) @ JF).astype(float)
            bad = c <= 0
            if bad.any():
                # inverted circles (negative curvature): only possible when the
                # group is not a packing; they stay in the orbit, unexpanded
                self.inverted += int(bad.sum())
                Z, src, refl, a, b, c = (t[~bad] for t in (Z, src, refl, a, b, c))
                if not len(Z):
                    continue
            # c/2 k^2 + (b - c/2) k + a - 4 cap <= 0
            B2 = b - c / 2
            C0 = a - 4 * capf
            disc = B2 * B2 - 2 * c * C0
            has = disc >= -1e-9 * (B2 * B2 + np.abs(2 * c * C0))
            if not has.any():
                continue
            sq = np.sqrt(np.where(has, np.maximum(disc, 0), 0))
            r1 = np.floor((-B2 - sq) / c) - 1
            r2 = np.ceil((-B2 + sq) / c) + 1
            cnt = np.where(has, r2 - r1 + 1, 0).astype(np.int64)
            idx = np.repeat(np.arange(len(Z)), cnt)
            if not len(idx):
                continue
            k = np.repeat(r1.astype(np.int64), cnt) + (np.arange(len(idx)) - np.repeat(np.cumsum(cnt) - cnt, cnt))
            kk = k if self.mode == "int" else k.astype(float)
            Zk = self.power(Z[idx], kk)
            self._guard(Zk)
            ok = self.le_cap(Zk @ JF, cap)
            rows.append(Zk[ok] @ M.T)
            m = np.stack([src[idx][ok], np.full(int(ok.sum()), gi), k[ok], refl[idx][ok]], 1)
            metas.append(m)
        if not rows:
            return np.zeros((0, 4), dtype=self.dt), np.zeros((0, 4), dtype=np.int64)
        out = np.concatenate(rows)
        self._guard(out)
        return self.fold(out), np.concatenate(metas).astype(np.int64)

    def key(self, row) -> tuple:
        if self.mode == "int":
            return tuple(row)
        return tuple(round(c, self.ndigits) + 0.0 for c in row)

    # -- search ----------------------------------------------------------------
    def run(self, seeds, bound, grace_cap, max_frontier) -> _Search:
        if self.mode == "int":
            bound, grace_cap = Fraction(bound), Fraction(grace_cap)
        else:
            bound, grace_cap = _fl(bound), _fl(grace_cap)
        index: dict = {}
        rows: list = []
        metas: list = []
        depth: list = []
        inb: list = []

        def add(row, meta, d, inbound):
            k = self.key(row)
            if k in index:
                return None
            index[k] = len(rows)
            rows.append(row)
            metas.append(meta)
            depth.append(d)
            inb.append(inbound)
            return len(rows) - 1

        S = self.fold(np.array([[self.eng_conv(c) for c in s] for s in seeds], dtype=self.dt))
        frontier = []
        for i, row in enumerate(S.tolist()):
            j = add(tuple(row), (-1, i, 0, 0), 0, True)
            if j is not None:
                frontier.append(j)
        complete = True
        d = 0
        while frontier and complete:
            d += 1
            new = []
            for s0 in range(0, len(frontier), 8192):
                if len(rows) > max_frontier:
                    complete = False
                    break
                new += self._level(frontier[s0 : s0 + 8192], d, rows, add, bound, grace_cap)
            frontier = new
            if len(rows) > max_frontier:
                complete = False
        return _Search(
            rows=np.array(rows, dtype=self.dt).reshape(-1, 4),
            meta=np.array(metas, dtype=np.int64).reshape(-1, 4),
            depth=np.array(depth, dtype=np.int64),
            inbound=np.array(inb, dtype=bool),
            complete=complete and not self.inverted,
            keys=list(index),
        )

    def _level(self, frontier, d, rows, add, bound, grace_cap) -> list:
        V = np.array([rows[j] for j in frontier], dtype=self.dt)
        kids, meta = self.children(V, grace_cap)
        meta[:, 0] = np.asarray(frontier)[meta[:, 0]]
        inside = self.le_cap(self.curv4(kids), bound)
        new = []
        grace_new = []
        for row, m, ok in zip(kids.tolist(), meta.tolist(), inside.tolist()):
            j = add(tuple(row), tuple(m), d, ok)
            if j is not None:
                (new if ok else grace_new).append(j)
        if grace_new:
            G = np.array([rows[j] for j in grace_new], dtype=self.dt)
            gk, gm = self.children(G, bound)
            gm[:, 0] = np.asarray(grace_new)[gm[:, 0]]
            ok = self.le_cap(self.curv4(gk), bound)
            for row, m in zip(gk[ok].tolist(), gm[ok].tolist()):
                j = add(tuple(row), tuple(m), d + 1, True)
                if j is not None:
                    new.append(j)
        return new

    def power_float(self, Q: np.ndarray, k: int) -> np.ndarray:
        N = self.N.astype(float)
        N2 = self.N2.astype(float)
        return Q + k * (Q @ N.T) + (k * (k - 1) / 2) * (Q @ N2.T)

    def transport(self, res: _Search, seed_partners: dict, want: Iterable) -> dict:
        """Carry the seed clusters along the recorded steps to the nodes in ``want`` (float)."""
        Rlo = self.Rlo.astype(float)
        Rhi = self.Rhi.astype(float)
        need = set()
        stack = list(want)
        while stack:
            i = stack.pop()
            if i not in need:
                need.add(i)
                if res.meta[i, 0] >= 0:
                    stack.append(int(res.meta[i, 0]))
        out: dict[int, np.ndarray | None] = {}
        for i in sorted(need):
            p, gi, k, refl = (int(x) for x in res.meta[i])
            if p < 0:
                out[i] = seed_partners.get(gi)
                continue
            Q = out.get(p)
            if Q is None:
                out[i] = None
                continue
            kind, M, _ = self.gens[gi]
            x = res.rows[p][None, :]
            if kind == "move" and not self.is_line(x)[0]:
                if refl:
                    x = x @ self.Rlo.T
                    Q = Q @ Rlo.T
                x = self.power(x, np.array([k], dtype=x.dtype))
                Q = self.power_float(Q, k)
            x = x @ M.T
            Q = Q @ M.astype(float).T
            _, kk, over = self.fold_ops(x)
            Q = self.power_float(Q, -int(kk[0]))
            if over[0]:
                Q = Q @ Rhi.T
            out[i] = Q
        return out

    def eng_conv(self, c):
        return int(c) if self.mode == "int" else _fl(c)
