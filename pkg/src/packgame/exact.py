"""Exact number types for lattice geometry.

Rationals are :class:`fractions.Fraction`.  On top of them this module
provides elements of a real quadratic field ``Q(sqrt d)`` (:class:`QuadElem`)
and of a biquadratic field ``Q(sqrt d1, sqrt d2)`` (:class:`BiQuadElem`).
Both are immutable, hashable, totally ordered (exactly, without floats) and
interoperate with ``int`` and ``Fraction`` operands.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from numbers import Rational as _Rational
from typing import Union

import mpmath

__all__ = [
    "IncompatibleFieldError",
    "QuadElem",
    "BiQuadElem",
    "Number",
    "squarefree_decompose",
    "sqrt_exact",
    "quad_mul",
    "quad_sign",
    "sign",
    "to_float",
    "simplify",
    "is_zero",
    "format_rational",
    "parse_rational",
]


_ZERO = Fraction(0)


class IncompatibleFieldError(ValueError):
    """Raised when two quadratic elements live in different fields."""


def squarefree_decompose(d: int) -> tuple[int, int]:
    """Return ``(f, m)`` with ``d == f*f*m`` and ``m`` square-free (sign kept in m)."""
    if d == 0:
        return 0, 0
    s = -1 if d < 0 else 1
    d = abs(d)
    f = 1
    p = 2
    while p * p <= d:
        while d % (p * p) == 0:
            d //= p * p
            f *= p
        p += 1 if p == 2 else 2
    return f, s * d


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, _Rational)):
        return Fraction(x)
    raise TypeError(f"not a rational: {x!r}")


def format_rational(x) -> str:
    x = _frac(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str | int) -> Fraction:
    return Fraction(s)


@total_ordering
class QuadElem:
    """``a + b*sqrt(d)`` with rational ``a, b`` and square-free ``d > 1``.

    Rational values are stored with ``b == 0`` and ``d == 1`` so that equal
    numbers have equal representations regardless of the field they came from.
    """

    __slots__ = ("a", "b", "d", "_hash")

    def __init__(self, a=0, b=0, d: int = 1):
        a = _frac(a)
        b = _frac(b)
        if d < 0:
            raise ValueError("only real quadratic fields are supported")
        if d == 0:
            b = Fraction(0)
            d = 1
        f, m = squarefree_decompose(d)
        b *= f
        if m == 1:
            a, b = a + b, Fraction(0)
        if b == 0:
            m = 1
        self.a = a
        self.b = b
        self.d = m
        self._hash = None

    @classmethod
    def _new(cls, a: Fraction, b: Fraction, d: int) -> QuadElem:
        # d already square-free
        obj = object.__new__(cls)
        if b == 0:
            d = 1
        obj.a = a
        obj.b = b
        obj.d = d
        obj._hash = None
        return obj

    @classmethod
    def sqrt(cls, d: int) -> QuadElem:
        return cls(0, 1, d)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def conjugate(self) -> QuadElem:
        return QuadElem._new(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def _coerce(self, other) -> QuadElem | None:
        if isinstance(other, QuadElem):
            if self.d != 1 and other.d != 1 and self.d != other.d:
                raise IncompatibleFieldError(f"Q(sqrt {self.d}) vs Q(sqrt {other.d})")
            return other
        if isinstance(other, int):
            return QuadElem._new(Fraction(other), _ZERO, 1)
        if isinstance(other, Fraction):
            return QuadElem._new(other, _ZERO, 1)
        return None

    def _field(self, other: QuadElem) -> int:
        return self.d if self.d != 1 else other.d

    def __add__(self, other):
        if isinstance(other, BiQuadElem):
            return NotImplemented
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadElem._new(self.a + o.a, self.b + o.b, self._field(o))

    __radd__ = __add__

    def __neg__(self):
        return QuadElem._new(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, BiQuadElem):
            return NotImplemented
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadElem._new(self.a - o.a, self.b - o.b, self._field(o))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, BiQuadElem):
            return NotImplemented
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = self._field(o)
        return QuadElem._new(
            self.a * o.a + d * self.b * o.b, self.a * o.b + self.b * o.a, d
        )

    __rmul__ = __mul__

    def inverse(self) -> QuadElem:
        nrm = self.norm()
        if nrm == 0:
            raise ZeroDivisionError("QuadElem division by zero")
        return QuadElem._new(self.a / nrm, -self.b / nrm, self.d)

    def __truediv__(self, other):
        if isinstance(other, BiQuadElem):
            return NotImplemented
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadElem(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def sign(self) -> int:
        return quad_sign(self)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __eq__(self, other):
        if isinstance(other, QuadElem):
            return self.a == other.a and self.b == other.b and self.d == other.d
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, BiQuadElem):
            return other == self
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, BiQuadElem):
            return (other - self).sign() > 0
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.a) if self.b == 0 else hash((self.a, self.b, self.d))
        return self._hash

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __float__(self):
        return float(to_float(self))

    def __repr__(self):
        if self.b == 0:
            return f"QuadElem({self.a})"
        return f"QuadElem({self.a}, {self.b}, {self.d})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        head = "" if self.a == 0 else f"{self.a}"
        b = self.b
        op = "-" if b < 0 else ("+" if head else "")
        coeff = "" if abs(b) == 1 else f"{abs(b)}*"
        return f"{head}{op}{coeff}sqrt({self.d})"

    def to_json(self) -> dict:
        return {"a": format_rational(self.a), "b": format_rational(self.b), "d": self.d}

    @classmethod
    def from_json(cls, obj: dict) -> QuadElem:
        return cls(Fraction(obj["a"]), Fraction(obj["b"]), int(obj["d"]))


def _canonical_pair(d1: int, d2: int) -> tuple[int, int, int]:
    """Canonical generating radicands of Q(sqrt d1, sqrt d2) plus the third one."""
    g = math.gcd(d1, d2)
    m = (d1 // g) * (d2 // g)
    a, b, c = sorted((d1, d2, m))
    return a, b, c


@total_ordering
class BiQuadElem:
    """``c0 + c1*sqrt(d1) + c2*sqrt(d2) + c3*sqrt(d1)*sqrt(d2)``.

    Internally the value is ``x + y*sqrt(d2)`` with ``x, y`` in ``Q(sqrt d1)``.
    ``(d1, d2)`` are the two smallest radicands of the three quadratic
    subfields, which makes the representation canonical.
    """

    __slots__ = ("d1", "d2", "x", "y", "_hash")

    def __init__(self, d1: int, d2: int, c0=0, c1=0, c2=0, c3=0):
        f1, r1 = squarefree_decompose(d1)
        f2, r2 = squarefree_decompose(d2)
        if r1 <= 1 or r2 <= 1 or r1 == r2:
            raise ValueError("BiQuadElem needs two distinct non-square radicands; use make_biquad")
        g = math.gcd(r1, r2)
        m = (r1 // g) * (r2 // g)
        coeffs = {1: _frac(c0), r1: _frac(c1) * f1, r2: _frac(c2) * f2, m: _frac(c3) * f1 * f2 * g}
        a, b, _ = _canonical_pair(r1, r2)
        self.d1 = a
        self.d2 = b
        self.x, self.y = _from_coeffs(a, b, coeffs)
        self._hash = None

    @classmethod
    def _raw(cls, d1: int, d2: int, x: QuadElem, y: QuadElem) -> BiQuadElem:
        obj = object.__new__(cls)
        obj.d1 = d1
        obj.d2 = d2
        obj.x = x
        obj.y = y
        obj._hash = None
        return obj

    @property
    def coeffs(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """Coefficients over the basis 1, sqrt(d1), sqrt(d2), sqrt(d1)*sqrt(d2)."""
        return (self.x.a, self.x.b, self.y.a, self.y.b)

    @property
    def bases(self) -> tuple[int, int]:
        return (self.d1, self.d2)

    def _lift(self, other) -> BiQuadElem | None:
        if isinstance(other, BiQuadElem):
            if (other.d1, other.d2) != (self.d1, self.d2):
                raise IncompatibleFieldError(
                    f"Q(sqrt {self.d1}, sqrt {self.d2}) vs Q(sqrt {other.d1}, sqrt {other.d2})"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return BiQuadElem._raw(self.d1, self.d2, QuadElem(other), QuadElem(0))
        if isinstance(other, QuadElem):
            return lift_quad(other, self.d1, self.d2)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return BiQuadElem._raw(self.d1, self.d2, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __neg__(self):
        return BiQuadElem._raw(self.d1, self.d2, -self.x, -self.y)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return BiQuadElem._raw(self.d1, self.d2, self.x - o.x, self.y - o.y)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        x = self.x * o.x + self.d2 * (self.y * o.y)
        y = self.x * o.y + self.y * o.x
        return BiQuadElem._raw(self.d1, self.d2, x, y)

    __rmul__ = __mul__

    def inverse(self) -> BiQuadElem:
        den = self.x * self.x - self.d2 * (self.y * self.y)
        if not den:
            raise ZeroDivisionError("BiQuadElem division by zero")
        inv = den.inverse()
        return BiQuadElem._raw(self.d1, self.d2, self.x * inv, -(self.y * inv))

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = BiQuadElem._raw(self.d1, self.d2, QuadElem(1), QuadElem(0))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def sign(self) -> int:
        sx = quad_sign(self.x)
        sy = quad_sign(self.y)
        if sy == 0:
            return sx
        if sx == 0 or sx == sy:
            return sy
        # opposite signs: compare x^2 with d2*y^2
        diff = self.x * self.x - self.d2 * (self.y * self.y)
        return sx * quad_sign(diff)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def simplify(self):
        """Drop to QuadElem or Fraction when only one subfield is used."""
        c0, c1, c2, c3 = self.coeffs
        if c2 == 0 and c3 == 0:
            return simplify(QuadElem(c0, c1, self.d1))
        if c1 == 0 and c3 == 0:
            return simplify(QuadElem(c0, c2, self.d2))
        if c1 == 0 and c2 == 0:
            g = math.gcd(self.d1, self.d2)
            m = (self.d1 // g) * (self.d2 // g)
            return simplify(QuadElem(c0, c3 * g, m))
        return self

    def __eq__(self, other):
        if isinstance(other, (BiQuadElem, QuadElem, int, Fraction)):
            try:
                o = self._lift(other)
            except IncompatibleFieldError:
                return False
            return self.x == o.x and self.y == o.y
        return NotImplemented

    def __lt__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self):
        if self._hash is None:
            s = self.simplify()
            self._hash = hash(s) if not isinstance(s, BiQuadElem) else hash(
                (self.d1, self.d2, self.coeffs)
            )
        return self._hash

    def __bool__(self):
        return bool(self.x) or bool(self.y)

    def __float__(self):
        return float(to_float(self))

    def __repr__(self):
        return f"BiQuadElem({self.d1}, {self.d2}, " + ", ".join(str(c) for c in self.coeffs) + ")"

    def __str__(self):
        basis = ("", f"sqrt({self.d1})", f"sqrt({self.d2})", f"sqrt({self.d1 * self.d2})")
        terms = []
        for c, e in zip(self.coeffs, basis):
            if not c:
                continue
            mag = abs(c)
            body = str(mag) if not e else (e if mag == 1 else f"{mag}*{e}")
            terms.append(("-" if c < 0 else "+", body))
        if not terms:
            return "0"
        head = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        return head + "".join(f"{sg}{t}" for sg, t in terms[1:])

    def to_json(self) -> dict:
        return {
            "d1": self.d1,
            "d2": self.d2,
            "c": [format_rational(c) for c in self.coeffs],
        }


def _from_coeffs(a: int, b: int, coeffs: dict[int, Fraction]):
    g = math.gcd(a, b)
    m = (a // g) * (b // g)
    x = QuadElem(coeffs.get(1, 0), coeffs.get(a, 0), a)
    y = QuadElem(coeffs.get(b, 0), Fraction(coeffs.get(m, 0)) / g, a)
    return x, y


def lift_quad(q: QuadElem, d1: int, d2: int) -> BiQuadElem:
    """Embed a quadratic element into ``Q(sqrt d1, sqrt d2)`` (canonical pair)."""
    zero = QuadElem(0)
    if q.b == 0:
        return BiQuadElem._raw(d1, d2, QuadElem(q.a), zero)
    if q.d == d1:
        return BiQuadElem._raw(d1, d2, q, zero)
    if q.d == d2:
        return BiQuadElem._raw(d1, d2, QuadElem(q.a), QuadElem(q.b))
    g = math.gcd(d1, d2)
    m = (d1 // g) * (d2 // g)
    if q.d == m:
        return BiQuadElem._raw(d1, d2, QuadElem(q.a), QuadElem(0, q.b / g, d1))
    raise IncompatibleFieldError(f"sqrt {q.d} not in Q(sqrt {d1}, sqrt {d2})")


def make_biquad(d1: int, d2: int, c0=0, c1=0, c2=0, c3=0):
    """Build an element of ``Q(sqrt d1, sqrt d2)``, degenerating when a radicand is square."""
    f1, r1 = squarefree_decompose(d1)
    f2, r2 = squarefree_decompose(d2)
    if r1 == 1 or r2 == 1 or r1 == r2:
        # field collapses to a single quadratic field (or Q)
        s1 = QuadElem(0, f1, r1) if d1 else QuadElem(0)
        s2 = QuadElem(0, f2, r2) if d2 else QuadElem(0)
        return simplify(QuadElem(c0) + c1 * s1 + c2 * s2 + c3 * (s1 * s2))
    return BiQuadElem(d1, d2, c0, c1, c2, c3)


def sqrt_exact(n) -> Fraction | QuadElem:
    """Exact square root of a non-negative rational, as Fraction or QuadElem."""
    n = _frac(n)
    if n < 0:
        raise ValueError("negative radicand")
    p, q = n.numerator, n.denominator
    # sqrt(p/q) = sqrt(p*q)/q
    f, m = squarefree_decompose(p * q)
    if m == 1 or m == 0:
        return Fraction(f, q)
    return QuadElem(0, Fraction(f, q), m)


Number = Union[int, Fraction, QuadElem, BiQuadElem]


def quad_mul(x: QuadElem, y: QuadElem) -> QuadElem:
    return x * y


def quad_sign(x) -> int:
    """Exact sign of a rational or quadratic element."""
    if isinstance(x, (int, Fraction)):
        return (x > 0) - (x < 0)
    if isinstance(x, BiQuadElem):
        return x.sign()
    a, b, d = x.a, x.b, x.d
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # opposite signs: |a| vs |b| sqrt d
    lhs = a * a
    rhs = d * b * b
    if lhs > rhs:
        return sa
    if lhs < rhs:
        return sb
    return 0


def sign(x) -> int:
    if isinstance(x, float):
        return (x > 0) - (x < 0)
    return quad_sign(x)


def is_zero(x) -> bool:
    return not x


def simplify(x):
    """Collapse rational-valued field elements to Fraction (ints are kept)."""
    if isinstance(x, QuadElem):
        return x.a if x.b == 0 else x
    if isinstance(x, BiQuadElem):
        s = x.simplify()
        return s if s is x else simplify(s)
    return x


def to_float(x, precision_bits: int = 53) -> mpmath.mpf:
    """Evaluate an exact number at the given binary precision."""
    if precision_bits < 53:
        raise ValueError("precision_bits must be >= 53")
    with mpmath.workprec(precision_bits + 16):
        if isinstance(x, (int, Fraction)):
            x = _frac(x)
            val = mpmath.mpf(x.numerator) / x.denominator
        elif isinstance(x, QuadElem):
            val = _mpq(x.a) + _mpq(x.b) * mpmath.sqrt(x.d)
        elif isinstance(x, BiQuadElem):
            c0, c1, c2, c3 = x.coeffs
            r1 = mpmath.sqrt(x.d1)
            r2 = mpmath.sqrt(x.d2)
            val = _mpq(c0) + _mpq(c1) * r1 + _mpq(c2) * r2 + _mpq(c3) * r1 * r2
        elif isinstance(x, float):
            val = mpmath.mpf(x)
        else:
            raise TypeError(f"cannot convert {type(x).__name__}")
    with mpmath.workprec(precision_bits):
        return +val


def _mpq(q: Fraction) -> mpmath.mpf:
    return mpmath.mpf(q.numerator) / q.denominator


def join(x, y):
    """Lift ``x`` and ``y`` into a common field (biquadratic if their radicands differ)."""
    if isinstance(x, QuadElem) and isinstance(y, QuadElem) and x.d != 1 and y.d != 1 and x.d != y.d:
        d1, d2, _ = _canonical_pair(x.d, y.d)
        return lift_quad(x, d1, d2), lift_quad(y, d1, d2)
    if isinstance(x, BiQuadElem) and isinstance(y, QuadElem):
        return x, x._lift(y)
    if isinstance(y, BiQuadElem) and isinstance(x, QuadElem):
        return y._lift(x), y
    return x, y


def xadd(x, y):
    x, y = join(x, y)
    return simplify(x + y)


def xsub(x, y):
    x, y = join(x, y)
    return simplify(x - y)


def xmul(x, y):
    x, y = join(x, y)
    return simplify(x * y)


def xdiv(x, y):
    x, y = join(x, y)
    if isinstance(x, int) and isinstance(y, int):
        x = Fraction(x)
    return simplify(x / y)


def number_to_json(x):
    """JSON form: "p/q" for rationals, ``{a, b, d}`` for QuadElem, ``{d1, d2, c}`` for BiQuadElem."""
    x = simplify(x)
    if isinstance(x, (int, Fraction)):
        return format_rational(x)
    return x.to_json()


def number_from_json(obj):
    if isinstance(obj, (str, int)):
        return _tidy_int(parse_rational(obj))
    if "d1" in obj:
        c = [Fraction(s) for s in obj["c"]]
        return simplify(BiQuadElem(int(obj["d1"]), int(obj["d2"]), *c))
    return simplify(QuadElem.from_json(obj))


def _tidy_int(x: Fraction):
    return x.numerator if x.denominator == 1 else x
