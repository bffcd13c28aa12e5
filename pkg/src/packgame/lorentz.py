"""The Lorentz lattice spanned by four mutually tangent-ish circles.

The Gram matrix ``J_n`` has ``-2`` on the diagonal and ``2`` off it, except
for the ``(e3, e4)`` entry ``a = 4n - 2``.  It has signature (1, 3).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np

from .exact import simplify, sign, sqrt_exact

__all__ = [
    "GramForm",
    "LatticeVector",
    "FrameVectors",
    "gram",
    "frame",
    "lorentz_product",
    "norm_class",
    "primitive_reduce",
    "represents_norm",
    "mod8_obstruction",
    "FormMismatchError",
]


class FormMismatchError(ValueError):
    """Vectors from different lattices were combined."""


@dataclass(frozen=True)
class GramForm:
    """Gram matrix ``J_n``; ``n`` may be any positive rational with ``4n - 2`` integral."""

    n: Fraction

    def __post_init__(self):
        n = Fraction(self.n)
        object.__setattr__(self, "n", n)
        if n <= 0:
            raise ValueError("n must be positive")
        if (4 * n - 2).denominator != 1:
            raise ValueError(f"4n - 2 must be an integer (n = {n})")

    @property
    def a(self) -> int:
        return int(4 * self.n - 2)

    @property
    def is_integral_n(self) -> bool:
        return self.n.denominator == 1

    @cached_property
    def rows(self) -> tuple[tuple[int, ...], ...]:
        a = self.a
        return (
            (-2, 2, 2, 2),
            (2, -2, 2, 2),
            (2, 2, -2, a),
            (2, 2, a, -2),
        )

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.array(self.rows, dtype=object)

    @cached_property
    def int_matrix(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)

    @cached_property
    def sqrt_n(self):
        return sqrt_exact(self.n)

    def product(self, u: Sequence, v: Sequence):
        """``u^T J v`` on raw coordinate tuples."""
        J = self.rows
        total = 0
        for i in range(4):
            ui = u[i]
            if not ui:
                continue
            Ji = J[i]
            s = Ji[0] * v[0] + Ji[1] * v[1] + Ji[2] * v[2] + Ji[3] * v[3]
            total = total + ui * s
        return total

    def vector(self, coords: Sequence) -> LatticeVector:
        return LatticeVector(tuple(coords), self)

    def __repr__(self):
        return f"GramForm(n={self.n})"


@lru_cache(maxsize=None)
def gram(n) -> GramForm:
    return GramForm(Fraction(n))


@dataclass(frozen=True)
class LatticeVector:
    """Coordinates in the basis ``e1..e4`` together with the Gram form."""

    coords: tuple
    form: GramForm

    def __post_init__(self):
        if len(self.coords) != 4:
            raise ValueError("lattice vectors have four coordinates")
        object.__setattr__(self, "coords", tuple(_tidy(c) for c in self.coords))

    def _check(self, other: LatticeVector):
        if other.form != self.form:
            raise FormMismatchError(f"{self.form} vs {other.form}")

    def dot(self, other: LatticeVector):
        self._check(other)
        return simplify(self.form.product(self.coords, other.coords))

    def norm(self):
        return self.dot(self)

    def __add__(self, other: LatticeVector) -> LatticeVector:
        self._check(other)
        return LatticeVector(tuple(a + b for a, b in zip(self.coords, other.coords)), self.form)

    def __sub__(self, other: LatticeVector) -> LatticeVector:
        self._check(other)
        return LatticeVector(tuple(a - b for a, b in zip(self.coords, other.coords)), self.form)

    def __neg__(self) -> LatticeVector:
        return LatticeVector(tuple(-a for a in self.coords), self.form)

    def __mul__(self, k) -> LatticeVector:
        return LatticeVector(tuple(k * a for a in self.coords), self.form)

    __rmul__ = __mul__

    def __truediv__(self, k) -> LatticeVector:
        if isinstance(k, int):
            k = Fraction(k)
        return LatticeVector(tuple(a / k for a in self.coords), self.form)

    def __iter__(self) -> Iterator:
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    @property
    def is_integral(self) -> bool:
        return all(isinstance(c, int) for c in self.coords)

    @property
    def is_primitive(self) -> bool:
        return self.is_integral and math.gcd(*self.coords) == 1

    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=object)

    def __repr__(self):
        return "[" + ", ".join(str(c) for c in self.coords) + "]"


def _tidy(c):
    c = simplify(c)
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


@dataclass(frozen=True)
class FrameVectors:
    e1: LatticeVector
    e2: LatticeVector
    e3: LatticeVector
    e4: LatticeVector
    E: LatticeVector
    D: LatticeVector
    h: LatticeVector
    v1: LatticeVector
    v2: LatticeVector
    s0: LatticeVector


@lru_cache(maxsize=None)
def frame(form: GramForm) -> FrameVectors:
    n = form.n
    v = form.vector
    return FrameVectors(
        e1=v((1, 0, 0, 0)),
        e2=v((0, 1, 0, 0)),
        e3=v((0, 0, 1, 0)),
        e4=v((0, 0, 0, 1)),
        E=v((1, 1, 0, 0)),
        D=v((1, 1, 1, 1)),
        h=v((-1, 1, 0, 0)),
        v1=v((n, n, 1, -1)),
        v2=v((0, 0, -1, 1)),
        s0=v((0, -1, 1, 0)),
    )


def lorentz_product(u: LatticeVector, v: LatticeVector):
    return u.dot(v)


def norm_class(v: LatticeVector) -> tuple[str, object]:
    """Classify ``v`` by the sign of ``v.v``: timelike (>0), lightlike, spacelike (<0)."""
    val = v.norm()
    s = sign(val)
    return ({1: "timelike", 0: "lightlike", -1: "spacelike"}[s], val)


def primitive_reduce(v: LatticeVector) -> LatticeVector:
    """Divide out the content and orient so that ``v.D > 0``.

    Vectors orthogonal to ``D`` get their first nonzero coordinate positive.
    """
    if not v.is_integral:
        raise ValueError("primitive_reduce needs integer coordinates")
    g = math.gcd(*v.coords)
    if g == 0:
        raise ValueError("zero vector")
    w = LatticeVector(tuple(c // g for c in v.coords), v.form)
    s = sign(w.dot(frame(v.form).D))
    if s == 0:
        s = sign(next(c for c in w.coords if c))
    return w if s > 0 else -w


def represents_norm(form: GramForm, target: int, coeff_bound: int) -> LatticeVector | None:
    """Exhaustive search for ``x`` with ``x.x == target`` and ``|x_i| <= coeff_bound``.

    Returns the witness with the smallest sup-norm (ties broken lexicographically),
    or ``None`` when no vector exists inside the box.
    """
    if coeff_bound < 1:
        raise ValueError("coeff_bound must be >= 1")
    J = form.int_matrix
    best = None
    for r in range(1, coeff_bound + 1):
        # shell of sup-norm r only
        grid = np.arange(-r, r + 1, dtype=np.int64)
        pts = np.array(np.meshgrid(grid, grid, grid, grid, indexing="ij")).reshape(4, -1).T
        pts = pts[np.abs(pts).max(axis=1) == r]
        vals = np.einsum("ki,ij,kj->k", pts, J, pts)
        hits = pts[vals == target]
        if len(hits):
            best = min(tuple(int(c) for c in h) for h in hits)
            break
    if best is None:
        return None
    return form.vector(best)


def mod8_obstruction(form: GramForm) -> bool:
    """True iff ``x.x`` is never ``4 (mod 8)`` for integer ``x``.

    Every coefficient of ``J_n`` is even, so ``x.x mod 8`` only depends on
    ``x mod 4``: replacing ``x`` by ``x + 4z`` changes the value by
    ``8 x.z + 16 z.z``, and ``x.z`` is even times an integer.  Hence the 256
    residues in ``(Z/4Z)^4`` decide it.  The value ``-4`` is ``4 (mod 8)``.
    """
    if not form.is_integral_n:
        raise ValueError("the mod-8 test is only meaningful for integer n")
    J = form.int_matrix
    pts = np.array(list(itertools.product(range(4), repeat=4)), dtype=np.int64)
    vals = np.einsum("ki,ij,kj->k", pts, J, pts) % 8
    return bool(np.all(vals != 4))


def residue_values(form: GramForm) -> np.ndarray:
    """All 256 values of ``x.x mod 8`` for ``x`` in ``(Z/4Z)^4`` (lexicographic order)."""
    J = np.array(form.rows, dtype=np.int64)
    pts = np.array(list(itertools.product(range(4), repeat=4)), dtype=np.int64)
    return np.einsum("ki,ij,kj->k", pts, J, pts) % 8
