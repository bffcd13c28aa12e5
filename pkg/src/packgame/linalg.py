"""Exact linear algebra on numpy object arrays.

Entries may be ``int``, ``Fraction``, :class:`QuadElem` or :class:`BiQuadElem`;
every routine here uses only field operations, so results stay exact.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .exact import BiQuadElem, QuadElem, simplify


def _div(x, p):
    if isinstance(x, int) and isinstance(p, int):
        return Fraction(x, p)
    return x / p


def exact_array(rows) -> np.ndarray:
    """Object array of exact entries (floats are rejected)."""
    arr = np.array(rows, dtype=object)
    for x in arr.flat:
        if isinstance(x, float):
            raise TypeError("floats are not exact")
    return arr


def identity(k: int = 4) -> np.ndarray:
    out = np.empty((k, k), dtype=object)
    for i in range(k):
        for j in range(k):
            out[i, j] = 1 if i == j else 0
    return out


def simplify_array(arr: np.ndarray) -> np.ndarray:
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        x = simplify(x)
        if isinstance(x, Fraction) and x.denominator == 1:
            x = x.numerator
        out[idx] = x
    return out


def is_integral(arr: np.ndarray) -> bool:
    for x in arr.flat:
        x = simplify(x)
        if isinstance(x, (QuadElem, BiQuadElem)):
            return False
        if isinstance(x, Fraction) and x.denominator != 1:
            return False
    return True


def is_rational(arr: np.ndarray) -> bool:
    return not any(isinstance(simplify(x), (QuadElem, BiQuadElem)) for x in arr.flat)


def array_equal(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and all(x == y for x, y in zip(a.flat, b.flat))


def inverse(m: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse over the entries' field."""
    k = m.shape[0]
    aug = np.empty((k, 2 * k), dtype=object)
    aug[:, :k] = m
    aug[:, k:] = identity(k)
    for col in range(k):
        piv = next((r for r in range(col, k) if aug[r, col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        p = aug[col, col]
        aug[col] = [_div(x, p) if x else 0 for x in aug[col]]
        for r in range(k):
            if r != col and aug[r, col]:
                f = aug[r, col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return simplify_array(aug[:, k:])


def nullspace(m: np.ndarray) -> list[np.ndarray]:
    """Basis of the right null space (reduced row echelon form)."""
    rows, cols = m.shape
    a = m.copy()
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i, c]), None)
        if piv is None:
            continue
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        p = a[r, c]
        a[r] = [_div(x, p) if x else 0 for x in a[r]]
        for i in range(rows):
            if i != r and a[i, c]:
                f = a[i, c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = np.empty(cols, dtype=object)
        v[:] = 0
        v[fc] = 1
        for i, pc in enumerate(pivots):
            v[pc] = -a[i, fc]
        basis.append(simplify_array(v))
    return basis


def charpoly(m: np.ndarray) -> list:
    """Characteristic polynomial coefficients, highest degree first (Faddeev-LeVerrier)."""
    k = m.shape[0]
    coeffs = [Fraction(1)]
    mk = np.zeros((k, k), dtype=object)
    eye = identity(k)
    c = Fraction(1)
    for i in range(1, k + 1):
        mk = m.dot(mk + c * eye) if i > 1 else m.copy()
        c = -sum(mk[j, j] for j in range(k)) / Fraction(i)
        coeffs.append(simplify(c))
    return coeffs


def poly_divmod(num: list, den: list) -> tuple[list, list]:
    """Polynomial long division, coefficients highest degree first."""
    num = list(num)
    out = []
    while len(num) >= len(den):
        f = _div(num[0], den[0])
        out.append(f)
        for i in range(len(den)):
            num[i] = num[i] - f * den[i]
        num.pop(0)
    return out, num


def det(m: np.ndarray):
    k = m.shape[0]
    return simplify((-1) ** k * charpoly(m)[-1])
