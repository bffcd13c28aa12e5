"""Isometries of the Lorentz lattice and their exact verification.

Matrices act on column vectors of ``e``-basis coordinates from the left, so
an isometry ``M`` of the form ``J`` satisfies ``M^T J M == J``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .exact import simplify, sign
from .lorentz import GramForm, LatticeVector, frame, gram, primitive_reduce

__all__ = [
    "Isometry",
    "SymmetryReport",
    "NotAnIsometryError",
    "reflection",
    "rotation_pi",
    "point_inversion",
    "glide_n21",
    "composite",
    "from_matrix",
    "verify_symmetry",
    "general_s1_s2",
    "q1_formula",
    "GLIDE_N21",
]


class NotAnIsometryError(ValueError):
    pass


KINDS = ("reflection", "rotation", "point_inversion", "glide", "composite")


@dataclass(eq=False)
class Isometry:
    matrix: np.ndarray
    kind: str
    form: GramForm
    data: tuple = ()
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown isometry kind {self.kind!r}")
        self.matrix = linalg.simplify_array(np.asarray(self.matrix, dtype=object))
        if not preserves_form(self.matrix, self.form.matrix):
            raise NotAnIsometryError(f"{self.name or self.kind} does not preserve J_{self.form.n}")

    def __call__(self, v):
        if isinstance(v, LatticeVector):
            if v.form != self.form:
                raise ValueError("form mismatch")
            return LatticeVector(tuple(self.matrix.dot(v.array())), self.form)
        return tuple(simplify(x) for x in self.matrix.dot(np.asarray(v, dtype=object)))

    def __matmul__(self, other: Isometry) -> Isometry:
        return composite(self, other)

    @property
    def det(self):
        return linalg.det(self.matrix)

    def inverse(self) -> Isometry:
        J = self.form.matrix
        inv = linalg.inverse(J).dot(self.matrix.T).dot(J)
        return Isometry(inv, "composite" if self.kind in ("glide", "composite") else self.kind,
                        self.form, self.data, (self.name + "^-1") if self.name else "")

    def is_rational(self) -> bool:
        return linalg.is_rational(self.matrix)

    def __repr__(self):
        return f"Isometry({self.name or self.kind}, n={self.form.n})"


def preserves_form(m: np.ndarray, J: np.ndarray) -> bool:
    return linalg.array_equal(linalg.simplify_array(m.T.dot(J).dot(m)), J)


def _outer_J(u: LatticeVector, w: LatticeVector) -> np.ndarray:
    """Matrix of ``x -> (w.x) u``."""
    Jw = w.form.matrix.dot(w.array())
    return np.outer(u.array(), Jw)


def reflection(mirror: LatticeVector, name: str = "") -> Isometry:
    """``x -> x - 2 (n.x / n.n) n``."""
    nn = mirror.norm()
    if sign(nn) >= 0:
        raise ValueError(f"mirror {mirror} is not spacelike (norm {nn})")
    m = linalg.identity(4) - _outer_J(mirror, mirror) * (Fraction(2) / nn)
    return Isometry(m, "reflection", mirror.form, (mirror,), name)


def rotation_pi(A: LatticeVector, B: LatticeVector, name: str = "") -> Isometry:
    """Rotation by pi about the geodesic with ideal endpoints ``A`` and ``B``."""
    if A.norm() != 0 or B.norm() != 0:
        raise ValueError("rotation endpoints must be lightlike")
    ab = A.dot(B)
    if not ab:
        raise ValueError("rotation endpoints must be distinct (A.B != 0)")
    m = (_outer_J(B, A) + _outer_J(A, B)) * (Fraction(2) / ab)
    m = m - linalg.identity(4)
    return Isometry(m, "rotation", A.form, (A, B), name)


def point_inversion(P: LatticeVector, name: str = "") -> Isometry:
    """The -1 map of hyperbolic space centred at ``P``: ``x -> 2 (P.x / P.P) P - x``."""
    pp = P.norm()
    if sign(pp) <= 0:
        raise ValueError(f"{P} is not timelike")
    m = _outer_J(P, P) * (Fraction(2) / pp) - linalg.identity(4)
    return Isometry(m, "point_inversion", P.form, (P,), name)


GLIDE_N21 = (
    (-24, -68, -69, -1182),
    (-24, -69, -68, -1202),
    (3, 8, 8, 142),
    (2, 6, 6, 103),
)


def glide_n21() -> Isometry:
    """The glide reflection ``T`` of ``Lambda_21``, with matrix entries as printed."""
    return Isometry(np.array(GLIDE_N21, dtype=object), "glide", gram(21), (), "T")


def composite(*isos: Isometry, name: str = "") -> Isometry:
    form = isos[0].form
    m = linalg.identity(4)
    for g in isos:
        if g.form != form:
            raise ValueError("form mismatch")
        m = m.dot(g.matrix)
    return Isometry(m, "composite", form, (), name or "*".join(g.name for g in isos))


def from_matrix(m, form: GramForm, kind: str = "composite", name: str = "") -> Isometry:
    return Isometry(np.array(m, dtype=object), kind, form, (), name)


@dataclass(frozen=True)
class SymmetryReport:
    form_ok: bool
    lattice_ok: bool
    orthochronous_ok: bool

    @property
    def ok(self) -> bool:
        return self.form_ok and self.lattice_ok and self.orthochronous_ok


def verify_symmetry(M: Isometry | np.ndarray, form: GramForm) -> SymmetryReport:
    m = M.matrix if isinstance(M, Isometry) else np.asarray(M, dtype=object)
    J = form.matrix
    form_ok = preserves_form(m, J)
    lattice_ok = linalg.is_integral(m)
    if lattice_ok:
        try:
            lattice_ok = linalg.is_integral(linalg.inverse(m))
        except ZeroDivisionError:
            lattice_ok = False
    D = frame(form).D
    MD = m.dot(D.array())
    orth = sign(simplify(form.product(tuple(MD), D.coords))) > 0
    return SymmetryReport(form_ok, lattice_ok, orth)


def general_s1_s2(n: int) -> list[tuple[str, LatticeVector]]:
    """Mirrors ``s1``, ``s2`` (and the cusps ``Q0``, ``Q0'`` used to build them).

    Odd n: ``Q0' = [4-n, -n, 2, 2]``, ``s1 = (Q0' - E)/2``,
    ``Q0 = [(1-n)/2, (1-n)/2, 1, 1]``, ``s2 = n Q0 - v2``.
    Even n: ``Q0 = [1-n, 1-n, 2, 2]``, ``Q0' = [2-n/2, -n/2, 1, 1]``;
    ``s1 = Q0' - E`` for n = 2 mod 4 and ``(Q0 - E)/2`` for n = 0 mod 4;
    ``s2 = (n/2) Q0' - v2``, except n = 12 where ``(3 Q0' - v2)/2`` is used.
    All mirrors are returned primitive and oriented by ``D``.
    """
    if n < 4:
        raise ValueError("the s1/s2 construction needs n >= 4")
    form = gram(n)
    f = frame(form)
    E, v2 = f.E, f.v2
    vec = form.vector
    if n % 2:
        q0p = vec((4 - n, -n, 2, 2))
        q0 = vec((Fraction(1 - n, 2), Fraction(1 - n, 2), 1, 1))
        s1 = (q0p - E) / 2
        s2 = n * q0 - v2
    else:
        q0 = vec((1 - n, 1 - n, 2, 2))
        q0p = vec((2 - n // 2, -(n // 2), 1, 1))
        s1 = q0p - E if n % 4 == 2 else (q0 - E) / 2
        s2 = (3 * q0p - v2) / 2 if n == 12 else (n // 2) * q0p - v2
    out = []
    for name, v in (("Q0", q0), ("Q0'", q0p), ("s1", s1), ("s2", s2)):
        if name.startswith("s"):
            v = primitive_reduce(_integral(v))
        out.append((name, v))
    return out


def _integral(v: LatticeVector) -> LatticeVector:
    if not v.is_integral:
        raise ValueError(f"{v} is not integral")
    return v


def q1_formula(n: int) -> LatticeVector:
    """Cusp ``Q1 = [25 - n^2, 9 - n^2, 2n + 10, 2n - 6]`` made primitive, for n = 3 mod 4."""
    if n % 4 != 3:
        raise ValueError("Q1 formula needs n = 3 (mod 4)")
    v = gram(n).vector((25 - n * n, 9 - n * n, 2 * n + 10, 2 * n - 6))
    return primitive_reduce(v)
