"""Boundary geometry in the perspective with ``E = e1 + e2`` at infinity.

The frame: ``e1`` is the real axis, ``v1`` the imaginary axis and
``P3 = E + 4 e3`` the point ``i``; ``delta = 4`` throughout.  With these
choices a norm ``-2`` vector ``v`` is a circle of curvature ``v.E / 4``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exact import (
    QuadElem,
    join,
    sign,
    simplify,
    sqrt_exact,
    to_float,
    xadd,
    xdiv,
    xmul,
    xsub,
)
from .isometry import Isometry, composite, reflection
from .lorentz import GramForm, LatticeVector, frame, gram

__all__ = [
    "DELTA",
    "Line",
    "BoundaryCircle",
    "BoundaryPoint",
    "CNum",
    "MoebiusMap",
    "circle_of",
    "point_of",
    "lightlike_of",
    "point_of_float",
    "boundary_distance",
    "point_line_distance",
    "tangency_point",
    "moebius_of_rotation",
    "moebius_of_translation",
    "sigma_n21",
    "invert_in_point",
    "invert_point_in_circle",
    "plane_gap",
    "eigenvector",
    "inversion_circle_of",
]

DELTA = 4


def _f(x) -> float:
    return float(to_float(x)) if not isinstance(x, float) else x


@dataclass(frozen=True)
class Line:
    """The line ``a x + b y = c``."""

    a: object
    b: object
    c: object

    @property
    def kind(self) -> str:
        if not self.a:
            return "horizontal"
        if not self.b:
            return "vertical"
        return "oblique"

    @property
    def value(self):
        """``y`` for horizontal lines, ``x`` for vertical ones."""
        if self.kind == "horizontal":
            return xdiv(self.c, self.b)
        if self.kind == "vertical":
            return xdiv(self.c, self.a)
        raise ValueError("oblique line")


@dataclass(frozen=True)
class BoundaryCircle:
    curvature: object
    center: tuple | None
    line: Line | None
    source: LatticeVector
    orientation: int

    @property
    def is_line(self) -> bool:
        return self.line is not None

    @property
    def radius(self):
        if self.is_line:
            return math.inf
        return xdiv(1, self.curvature) if self.curvature else math.inf

    def center_complex(self) -> complex:
        return complex(_f(self.center[0]), _f(self.center[1]))


@dataclass(frozen=True)
class BoundaryPoint:
    x: object
    y: object
    source: LatticeVector | None = None

    def __complex__(self) -> complex:
        return complex(_f(self.x), _f(self.y))

    @property
    def c(self) -> CNum:
        return CNum(self.x, self.y)


def _vE(v: LatticeVector):
    return v.dot(frame(v.form).E)


def _center(v: LatticeVector, vE):
    f = frame(v.form)
    x = xdiv(v.dot(f.v1), xmul(v.form.sqrt_n, vE))
    y = xdiv(2 * v.dot(f.e1), vE)
    return x, y


def circle_of(v: LatticeVector) -> BoundaryCircle:
    """Circle (or line) on the boundary represented by the spacelike vector ``v``.

    Curvature is ``(v.E / delta) * sqrt(2) / ||v||``; for norm ``-2`` this is ``v.E / 4``.
    """
    vv = v.norm()
    if sign(vv) >= 0:
        raise ValueError(f"{v} is not spacelike")
    vE = _vE(v)
    if not vE:
        p, q, r, s = v.coords
        n, rn = v.form.n, v.form.sqrt_n
        # the line through all lightlike A with A.v = 0
        line = Line(xmul(2 * s, rn), simplify(q - p), simplify(2 * q + 2 * n * s))
        return BoundaryCircle(0, None, line, v, 0)
    scale = sqrt_exact(Fraction(-2) / vv) if vv != -2 else 1
    curv = xmul(xdiv(vE, DELTA), scale)
    return BoundaryCircle(curv, _center(v, vE), None, v, sign(vE))


def point_of(A: LatticeVector) -> BoundaryPoint:
    """Coordinates ``(A.v1 / (sqrt(n) A.E), 2 A.e1 / A.E)`` of a lightlike vector."""
    if A.norm() != 0:
        raise ValueError(f"{A} is not lightlike")
    aE = _vE(A)
    if not aE:
        raise ZeroDivisionError("A is the point at infinity")
    x, y = _center(A, aE)
    return BoundaryPoint(x, y, A)


def lightlike_of(z: complex, form: GramForm) -> np.ndarray:
    """Float lattice coordinates of a lightlike vector whose boundary point is ``z``.

    Inverts the standard inversive coordinates ``(|z|^2, 1, x, y)`` of a
    point: for ``v = (p, q, r, s)`` these are ``(4q + 4ns, r + s, 2 sqrt(n) s,
    q - p + r + s)``.
    """
    n = float(form.n)
    c1, c2, c3, c4 = abs(z) ** 2, 1.0, z.real, z.imag
    s = c3 / (2 * math.sqrt(n))
    r = c2 - s
    q = (c1 - 4 * n * s) / 4
    p = q + r + s - c4
    return np.array([p, q, r, s])


def point_of_float(v: np.ndarray, form: GramForm) -> complex:
    J = form.int_matrix.astype(float)
    Jv = J @ v
    vE = Jv[0] + Jv[1]
    v1 = np.array([float(form.n), float(form.n), 1.0, -1.0])
    return complex(v1 @ Jv / (math.sqrt(float(form.n)) * vE), 2 * Jv[0] / vE)


def boundary_distance(A: LatticeVector, B: LatticeVector):
    """Squared Euclidean distance ``delta^2 (A.B) / ((A.E)(B.E))`` of two boundary points."""
    aE, bE = _vE(A), _vE(B)
    if not aE or not bE:
        raise ZeroDivisionError("point at infinity")
    return xdiv(DELTA * DELTA * A.dot(B), xmul(aE, bE))


def point_line_distance(A: LatticeVector, line: LatticeVector):
    """Signed distance ``delta (A.n) / (sqrt(-2 n.n) (A.E))`` from ``A`` to a line."""
    if _vE(line):
        raise ValueError("not a line (n.E != 0)")
    aE = _vE(A)
    if not aE:
        raise ZeroDivisionError("point at infinity")
    root = sqrt_exact(-2 * line.norm())
    return xdiv(DELTA * A.dot(line), xmul(root, aE))


def tangency_point(u: LatticeVector, v: LatticeVector) -> LatticeVector:
    if u.norm() != -2 or v.norm() != -2:
        raise ValueError("tangency_point needs norm -2 vectors")
    if u.dot(v) != 2:
        raise ValueError("circles are not tangent")
    return u + v


def invert_point_in_circle(z: complex, circ: BoundaryCircle) -> complex:
    """Classical inversion (reflection for lines), in floats."""
    if circ.is_line:
        a, b, c = (_f(t) for t in (circ.line.a, circ.line.b, circ.line.c))
        nrm = a * a + b * b
        d = (a * z.real + b * z.imag - c) / nrm
        return complex(z.real - 2 * a * d, z.imag - 2 * b * d)
    c0 = circ.center_complex()
    r = 1 / _f(circ.curvature)
    w = z - c0
    return c0 + r * r / w.conjugate()


def plane_gap(u: LatticeVector, v: LatticeVector) -> float:
    """Hyperbolic distance ``arcosh(|u.v| / 2)`` between disjoint planes (diagnostics only)."""
    return math.acosh(abs(_f(u.dot(v))) / 2)


# --- complex numbers and Moebius maps -------------------------------------


@dataclass(frozen=True)
class CNum:
    """Exact complex number ``re + i im`` with field-element parts."""

    re: object
    im: object = 0

    def __add__(self, o):
        o = _c(o)
        return CNum(xadd(self.re, o.re), xadd(self.im, o.im))

    __radd__ = __add__

    def __neg__(self):
        return CNum(-self.re, -self.im)

    def __sub__(self, o):
        o = _c(o)
        return CNum(xsub(self.re, o.re), xsub(self.im, o.im))

    def __rsub__(self, o):
        return _c(o) - self

    def __mul__(self, o):
        o = _c(o)
        return CNum(
            xsub(xmul(self.re, o.re), xmul(self.im, o.im)),
            xadd(xmul(self.re, o.im), xmul(self.im, o.re)),
        )

    __rmul__ = __mul__

    def conj(self) -> CNum:
        return CNum(self.re, -self.im)

    def abs2(self):
        return xadd(xmul(self.re, self.re), xmul(self.im, self.im))

    def __truediv__(self, o):
        o = _c(o)
        d = o.abs2()
        num = self * o.conj()
        return CNum(xdiv(num.re, d), xdiv(num.im, d))

    def __rtruediv__(self, o):
        return _c(o) / self

    def __eq__(self, o):
        o = _c(o)
        return xsub(self.re, o.re) == 0 and xsub(self.im, o.im) == 0

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(_f(self.re), _f(self.im))


I = CNum(0, 1)


def _c(x) -> CNum:
    if isinstance(x, CNum):
        return x
    if isinstance(x, complex):
        raise TypeError("use exact values")
    return CNum(x, 0)


@dataclass(frozen=True)
class MoebiusMap:
    """``z -> (a w + b) / (c w + d)`` with ``w = z`` or ``w = conj(z)``."""

    a: CNum
    b: CNum
    c: CNum
    d: CNum
    antiholomorphic: bool = False

    def __post_init__(self):
        if not self.det():
            raise ValueError("degenerate Moebius map")

    def det(self) -> CNum:
        return self.a * self.d - self.b * self.c

    def entries(self) -> tuple[complex, complex, complex, complex]:
        return tuple(complex(t) for t in (self.a, self.b, self.c, self.d))

    def __call__(self, z):
        if isinstance(z, CNum):
            w = z.conj() if self.antiholomorphic else z
            return (self.a * w + self.b) / (self.c * w + self.d)
        z = complex(z)
        w = z.conjugate() if self.antiholomorphic else z
        a, b, c, d = self.entries()
        den = c * w + d
        if den == 0:
            return cmath.inf
        return (a * w + b) / den

    def __matmul__(self, other: MoebiusMap) -> MoebiusMap:
        """Composition ``self o other``."""
        a2, b2, c2, d2 = other.a, other.b, other.c, other.d
        if self.antiholomorphic:
            a2, b2, c2, d2 = a2.conj(), b2.conj(), c2.conj(), d2.conj()
        a = self.a * a2 + self.b * c2
        b = self.a * b2 + self.b * d2
        c = self.c * a2 + self.d * c2
        d = self.c * b2 + self.d * d2
        return MoebiusMap(a, b, c, d, self.antiholomorphic != other.antiholomorphic)

    def trace(self) -> CNum:
        return self.a + self.d

    def is_scalar(self) -> bool:
        """True when the matrix is a scalar multiple of the identity."""
        return not self.b and not self.c and self.a == self.d and not self.antiholomorphic

    def inverse(self) -> MoebiusMap:
        if self.antiholomorphic:
            # (M conj)^-1 = conj(M^-1) as a matrix acting on conj
            a, b, c, d = self.d.conj(), -self.b.conj(), -self.c.conj(), self.a.conj()
            return MoebiusMap(a, b, c, d, True)
        return MoebiusMap(self.d, -self.b, -self.c, self.a)


def moebius_of_rotation(A: BoundaryPoint, B: BoundaryPoint) -> MoebiusMap:
    """``[[A + B, -2AB], [2, -(A + B)]]``: the rotation by pi with fixed points A, B."""
    a, b = A.c, B.c
    if a == b:
        raise ValueError("coincident endpoints")
    s = a + b
    return MoebiusMap(s, -2 * (a * b), CNum(2), -s)


def moebius_of_translation(lam, A: BoundaryPoint, B: BoundaryPoint) -> MoebiusMap:
    """``tau`` with fixed points ``A`` and ``B``; the derivative at ``A`` is ``1 / lam``."""
    a, b = A.c, B.c
    if a == b:
        raise ValueError("coincident endpoints")
    if abs(_f(lam)) == 1:
        raise ValueError("|lambda| must differ from 1")
    lam = CNum(lam)
    one = CNum(1)
    return MoebiusMap(lam * a - b, (one - lam) * (a * b), lam - one, a - lam * b)


def eigenvector(M: Isometry, lam) -> LatticeVector:
    """Eigenvector of ``M`` for the exact eigenvalue ``lam``, scaled so the last coordinate is 1."""
    from . import linalg

    m = M.matrix - linalg.identity(4) * lam
    ns = linalg.nullspace(linalg.simplify_array(m))
    if len(ns) != 1:
        raise ValueError(f"eigenspace of {lam} has dimension {len(ns)}")
    v = ns[0]
    piv = next(c for c in reversed(v) if c)
    return LatticeVector(tuple(xdiv(c, piv) for c in v), M.form)


def sigma_n21() -> tuple[MoebiusMap, Isometry]:
    """Boundary map of ``S = R_s3 o T`` for n = 21, together with ``S`` itself.

    ``S`` has eigenvalues ``lam, 1/lam, -1, -1`` with ``lam = 9 + 4 sqrt 5``; its
    Moebius representative is ``tau_{-lam, A, B}`` (the overall sign of the
    matrix is projectively irrelevant).
    """
    from .isometry import glide_n21

    form = gram(21)
    T = glide_n21()
    s3 = form.vector((-12, -15, 2, 1))
    S = composite(reflection(s3, "R_s3"), T, name="S")
    lam = QuadElem(9, 4, 5)
    A = eigenvector(S, lam)
    B = eigenvector(S, lam.inverse())
    tau = moebius_of_translation(-lam, point_of(A), point_of(B))
    return tau, S


def invert_in_point(center: BoundaryPoint | CNum, radius=1) -> MoebiusMap:
    """Anti-holomorphic inversion ``z -> c + r^2 / conj(z - c)``."""
    c = center.c if isinstance(center, BoundaryPoint) else _c(center)
    r2 = xmul(radius, radius)
    cc = c.conj()
    # (c w + r^2 - |c|^2) / (w - conj c) with w = conj z
    return MoebiusMap(c, CNum(xsub(r2, c.abs2())), CNum(1), -cc, True)


def inversion_circle_of(P: LatticeVector) -> tuple[tuple, object]:
    """Center and radius of the circle attached to a timelike point ``P``.

    ``-R_P`` acts on the boundary as inversion in this circle followed by the
    half turn about its center.
    """
    pp = P.norm()
    if sign(pp) <= 0:
        raise ValueError(f"{P} is not timelike")
    pE = _vE(P)
    center = _center(P, pE)
    radius = xmul(sqrt_exact(Fraction(pp) / 2), xdiv(DELTA, abs(pE)))
    return center, radius
