"""Monic polynomials over exact rationals or big floats, and the operators on them.

Coefficients are stored in descending order, ``p(x) = sum_k c_k x^(d-k)``.
The alternating convention ``a_k = (-1)^k c_k`` is exposed through
:meth:`Poly.a` but never used for storage.
"""

from __future__ import annotations

import json
from fractions import Fraction
from numbers import Integral, Rational

import gmpy2

__all__ = [
    "BigReal",
    "Poly",
    "MonicPoly",
    "to_scalar",
    "parse_scalar",
    "format_scalar",
    "falling",
    "poly_from_roots",
    "poly_mul",
    "differentiate",
    "normalized_derivative",
    "apply_Mn",
    "apply_Mn_power_normalized",
    "dilate",
    "reverse",
    "square_lift",
    "evaluate",
    "DEFAULT_PREC",
]

DEFAULT_PREC = 256


class BigReal:
    """Binary floating point number that carries its own precision.

    Arithmetic between two values rounds to the smaller of the two
    precisions. Exact rationals and integers mixed in are rounded to the
    precision of the ``BigReal`` operand.

    Parameters
    ----------
    value : int, Fraction, str, float, gmpy2.mpfr or BigReal
        Value to round.
    prec : int, optional
        Precision in bits. Defaults to the precision of ``value`` when it is
        already a ``BigReal``, otherwise 256.
    """

    __slots__ = ("value", "prec")

    def __init__(self, value, prec=None):
        if isinstance(value, BigReal):
            prec = value.prec if prec is None else prec
            value = value.value
        prec = DEFAULT_PREC if prec is None else int(prec)
        if prec < 2:
            raise ValueError("precision must be at least 2 bits")
        if isinstance(value, Fraction):
            value = gmpy2.mpq(value.numerator, value.denominator)
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            self.value = gmpy2.mpfr(value, prec)
        self.prec = prec

    @classmethod
    def _raw(cls, value, prec):
        obj = cls.__new__(cls)
        obj.value = value
        obj.prec = prec
        return obj

    def _binary(self, other, op, swap=False):
        if isinstance(other, BigReal):
            prec = min(self.prec, other.prec)
            b = other.value
        elif isinstance(other, (Integral, Fraction)):
            prec = self.prec
            b = gmpy2.mpfr(gmpy2.mpq(Fraction(other).numerator, Fraction(other).denominator), prec)
        else:
            return NotImplemented
        a = self.value
        if swap:
            a, b = b, a
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            return BigReal._raw(op(a, b), prec)

    def __add__(self, o):
        return self._binary(o, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, o):
        return self._binary(o, lambda a, b: a - b)

    def __rsub__(self, o):
        return self._binary(o, lambda a, b: a - b, swap=True)

    def __mul__(self, o):
        return self._binary(o, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self._binary(o, lambda a, b: a / b)

    def __rtruediv__(self, o):
        return self._binary(o, lambda a, b: a / b, swap=True)

    def __pow__(self, k):
        if not isinstance(k, Integral):
            return NotImplemented
        with gmpy2.context(gmpy2.get_context(), precision=self.prec):
            return BigReal._raw(self.value ** int(k), self.prec)

    def __neg__(self):
        # mpfr unary ops round to the ambient context, not the operand
        with gmpy2.context(gmpy2.get_context(), precision=self.prec):
            return BigReal._raw(-self.value, self.prec)

    def __pos__(self):
        return self

    def __abs__(self):
        with gmpy2.context(gmpy2.get_context(), precision=self.prec):
            return BigReal._raw(abs(self.value), self.prec)

    def _cmp_value(self, o):
        if isinstance(o, BigReal):
            return o.value
        if isinstance(o, (Integral, Fraction)):
            return gmpy2.mpq(Fraction(o).numerator, Fraction(o).denominator)
        if isinstance(o, float):
            return gmpy2.mpfr(o, 53)
        return None

    def __eq__(self, o):
        v = self._cmp_value(o)
        return NotImplemented if v is None else self.value == v

    def __lt__(self, o):
        v = self._cmp_value(o)
        return NotImplemented if v is None else self.value < v

    def __le__(self, o):
        v = self._cmp_value(o)
        return NotImplemented if v is None else self.value <= v

    def __gt__(self, o):
        v = self._cmp_value(o)
        return NotImplemented if v is None else self.value > v

    def __ge__(self, o):
        v = self._cmp_value(o)
        return NotImplemented if v is None else self.value >= v

    def __hash__(self):
        return hash((self.value, self.prec))

    def __float__(self):
        return float(self.value)

    def __bool__(self):
        return bool(self.value)

    def sqrt(self):
        with gmpy2.context(gmpy2.get_context(), precision=self.prec):
            return BigReal._raw(gmpy2.sqrt(self.value), self.prec)

    def to_string(self):
        """Decimal string that parses back to the identical value at ``prec`` bits."""
        if gmpy2.is_zero(self.value):
            return "0"
        mant, exp, _ = self.value.digits(10)
        sign = ""
        if mant.startswith("-"):
            sign, mant = "-", mant[1:]
        return f"{sign}0.{mant}e{exp}"

    def __repr__(self):
        return f"BigReal('{self.to_string()}', prec={self.prec})"


def to_scalar(x, field="rational", prec=None):
    """Coerce ``x`` into the requested scalar field.

    Parameters
    ----------
    x : int, Fraction, str, float or BigReal
    field : {"rational", "bigfloat"}
    prec : int, optional
        Bits for the big float field.
    """
    if field == "rational":
        if isinstance(x, BigReal):
            raise TypeError("cannot convert a BigReal to an exact rational")
        if isinstance(x, str):
            return Fraction(x)
        if isinstance(x, float):
            raise TypeError("machine floats are not accepted as exact scalars")
        return Fraction(x)
    if field == "bigfloat":
        if isinstance(x, str) and "/" in x:
            x = Fraction(x)
        return BigReal(x, prec)
    raise ValueError(f"unknown scalar field {field!r}")


def parse_scalar(s, field="rational", prec=None):
    return to_scalar(s, field, prec)


def format_scalar(x):
    if isinstance(x, BigReal):
        return x.to_string()
    x = Fraction(x)
    return str(x)


def falling(x, k):
    """Falling factorial ``(x)_k = x (x-1) ... (x-k+1)``; ``(x)_0 = 1``."""
    out = 1
    for i in range(int(k)):
        out = out * (x - i)
    return out


def _normalize_coeffs(coeffs):
    coeffs = list(coeffs)
    if not coeffs:
        raise ValueError("a polynomial needs at least one coefficient")
    precs = [c.prec for c in coeffs if isinstance(c, BigReal)]
    if precs:
        prec = min(precs)
        out = []
        for c in coeffs:
            if isinstance(c, BigReal):
                out.append(c if c.prec == prec else BigReal(c, prec))
            elif isinstance(c, (Integral, Fraction)):
                out.append(BigReal(Fraction(c), prec))
            else:
                raise TypeError(f"unsupported coefficient type {type(c).__name__}")
        coeffs = out
    else:
        out = []
        for c in coeffs:
            if isinstance(c, bool) or not isinstance(c, (Integral, Rational)):
                raise TypeError(f"unsupported coefficient type {type(c).__name__}")
            out.append(Fraction(c))
        coeffs = out
    # strip leading zeros, keep a single zero for the zero polynomial
    i = 0
    while i < len(coeffs) - 1 and coeffs[i] == 0:
        i += 1
    return tuple(coeffs[i:])


class Poly:
    """Univariate polynomial with descending coefficients.

    Parameters
    ----------
    coeffs : sequence
        ``c_0, ..., c_d`` with ``p(x) = sum c_k x^(d-k)``. Leading zeros are
        dropped. Integers are promoted to ``Fraction``; if any coefficient is
        a :class:`BigReal` all of them are rounded to the smallest precision.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = _normalize_coeffs(coeffs)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def field(self):
        return "bigfloat" if isinstance(self.coeffs[0], BigReal) else "rational"

    @property
    def precision(self):
        return self.coeffs[0].prec if self.field == "bigfloat" else None

    @property
    def leading(self):
        return self.coeffs[0]

    @property
    def is_zero(self):
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def a(self, k):
        """Alternating-sign coefficient ``(-1)^k c_k``."""
        if not 0 <= k <= self.degree:
            raise IndexError(k)
        c = self.coeffs[k]
        return -c if k % 2 else c

    def monic(self):
        """Divide by the leading coefficient."""
        if self.is_zero:
            raise ZeroDivisionError("zero polynomial has no monic normalization")
        lead = self.coeffs[0]
        return MonicPoly([1] + [c / lead for c in self.coeffs[1:]])

    def __call__(self, z):
        return evaluate(self, z)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        d = max(self.degree, other.degree)
        a = [0] * (d - self.degree) + list(self.coeffs)
        b = [0] * (d - other.degree) + list(other.coeffs)
        return Poly([x + y for x, y in zip(a, b)])

    def __sub__(self, other):
        return self + other.scale(-1)

    def __mul__(self, other):
        if isinstance(other, Poly):
            return poly_mul(self, other)
        return self.scale(other)

    def scale(self, s):
        return Poly([c * s for c in self.coeffs])

    def to_json(self):
        obj = {
            "degree": self.degree,
            "field": self.field,
            "coeffs": [format_scalar(c) for c in self.coeffs],
        }
        if self.field == "bigfloat":
            obj["precision_bits"] = self.precision
        return obj

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        field = obj.get("field", "rational")
        prec = obj.get("precision_bits")
        coeffs = [parse_scalar(str(c), field, prec) for c in obj["coeffs"]]
        p = cls(coeffs)
        if "degree" in obj and obj["degree"] != p.degree:
            raise ValueError("declared degree does not match coefficient list")
        return p

    def __repr__(self):
        body = ", ".join(format_scalar(c) for c in self.coeffs)
        return f"{type(self).__name__}([{body}])"


class MonicPoly(Poly):
    """A :class:`Poly` whose leading coefficient is exactly 1."""

    __slots__ = ()

    def __init__(self, coeffs):
        super().__init__(coeffs)
        if self.coeffs[0] != 1:
            raise ValueError("leading coefficient must be 1")

    @classmethod
    def from_roots(cls, roots):
        return poly_from_roots(roots)


def _same_field(value, p):
    if p.field == "bigfloat" and not isinstance(value, BigReal):
        return BigReal(Fraction(value), p.precision)
    return value


def poly_mul(p, q):
    out = [0] * (p.degree + q.degree + 1)
    for i, a in enumerate(p.coeffs):
        if a == 0:
            continue
        for j, b in enumerate(q.coeffs):
            out[i + j] = out[i + j] + a * b
    return Poly(out)


def poly_from_roots(roots):
    """Monic polynomial ``prod (x - r)``."""
    coeffs = [Fraction(1)]
    for r in roots:
        if not isinstance(r, BigReal):
            r = Fraction(r)
        nxt = coeffs + [0]
        for i in range(1, len(nxt)):
            nxt[i] = nxt[i] - r * coeffs[i - 1]
        coeffs = nxt
    return MonicPoly(coeffs)


def differentiate(p):
    """Coefficientwise derivative.

    A degree 0 input yields the zero polynomial, which callers can detect with
    ``result.is_zero``.
    """
    d = p.degree
    if d == 0:
        return Poly([_same_field(0, p)])
    return Poly([c * (d - k) for k, c in enumerate(p.coeffs[:-1])])


def normalized_derivative(p, ell):
    """Return ``(ell!/d!) D^(d-ell) p``, monic of degree ``ell``.

    Coefficient ``k`` is scaled by ``(ell)_k / (d)_k`` so no factorial is ever
    formed.
    """
    d = p.degree
    ell = int(ell)
    if not 0 <= ell <= d:
        raise ValueError(f"ell must lie in [0, {d}], got {ell}")
    out = []
    for k in range(ell + 1):
        out.append(p.coeffs[k] * Fraction(falling(ell, k), falling(d, k)))
    return MonicPoly(out)


def _check_n(n):
    if not n > -1:
        raise ValueError(f"index n must exceed -1, got {n}")


def apply_Mn(p, n):
    """Apply ``M_n = x D^2 + (n+1) D``.

    Uses ``M_n x^m = m (m+n) x^(m-1)`` termwise, so ``n`` may be any real
    scalar above ``-1``.
    """
    _check_n(n)
    d = p.degree
    if d == 0:
        return Poly([_same_field(0, p)])
    out = []
    for k, c in enumerate(p.coeffs[:-1]):
        m = d - k
        out.append(c * m * (m + n))
    return Poly(out)


def apply_Mn_power_normalized(p, n, j):
    """Return ``M_n^j p / ((d)_j (n+d)_j)``, monic of degree ``d - j``."""
    _check_n(n)
    d = p.degree
    j = int(j)
    if not 0 <= j <= d:
        raise ValueError(f"j must lie in [0, {d}], got {j}")
    den = falling(d, j) * falling(n + d, j)
    out = []
    for k in range(d - j + 1):
        num = falling(d - k, j) * falling(n + d - k, j)
        out.append(p.coeffs[k] * num / den)
    return MonicPoly(out)


def dilate(p, alpha):
    """Multiply every root by ``alpha``: ``c_k -> alpha^k c_k``.

    Negative ``alpha`` is allowed and reflects the roots.
    """
    if alpha == 0:
        raise ValueError("dilation factor must be nonzero")
    out = []
    w = 1
    for c in p.coeffs:
        out.append(c * w)
        w = w * alpha
    cls = MonicPoly if p.coeffs[0] == 1 else Poly
    return cls(out)


def reverse(p):
    """Return ``z^d p(1/z)``, i.e. the reversed coefficient list."""
    return Poly(list(reversed(p.coeffs)))


def square_lift(p):
    """Return ``p(x^2)``."""
    out = []
    for c in p.coeffs[:-1]:
        out.extend([c, _same_field(0, p)])
    out.append(p.coeffs[-1])
    cls = MonicPoly if p.coeffs[0] == 1 else Poly
    return cls(out)


def evaluate(p, z, prec=None):
    """Horner evaluation.

    Real scalars are evaluated in the coefficient field. A Python ``complex``
    or a ``(re, im)`` pair is evaluated in multiprecision complex arithmetic
    and returns a ``gmpy2.mpc``.
    """
    if isinstance(z, (complex, tuple, gmpy2.mpc().__class__)):
        prec = prec or p.precision or DEFAULT_PREC
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            if isinstance(z, tuple):
                re, im = (gmpy2.mpfr(_to_mpfr_arg(v), prec) for v in z)
                w = gmpy2.mpc(re, im)
            else:
                w = gmpy2.mpc(z)
            acc = gmpy2.mpc(0)
            for c in p.coeffs:
                acc = acc * w + gmpy2.mpfr(_to_mpfr_arg(c), prec)
            return acc
    if isinstance(z, float):
        raise TypeError("pass an exact rational or a BigReal, not a machine float")
    acc = _same_field(0, p)
    for c in p.coeffs:
        acc = acc * z + c
    return acc


def _to_mpfr_arg(v):
    if isinstance(v, BigReal):
        return v.value
    if isinstance(v, Fraction):
        return gmpy2.mpq(v.numerator, v.denominator)
    return v

