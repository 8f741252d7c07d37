"""Square and rectangular finite free additive convolutions.

Each convolution has two implementations that never share code paths, so
each serves as an oracle for the other: a coefficient formula and an
operator-symbol formula.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Integral

from .cumulants import (
    apply_operator_symbol,
    apply_rect_operator_symbol,
    to_operator_symbol,
    to_rect_operator_symbol,
)
from .poly_core import MonicPoly, apply_Mn, falling

__all__ = [
    "boxplus",
    "boxplus_via_operators",
    "rect_boxplus",
    "rect_boxplus_via_operators",
    "rect_boxplus_factorial",
    "boxplus_power",
]


def _same_degree(p, q):
    if p.degree != q.degree:
        raise ValueError(f"degree mismatch: {p.degree} vs {q.degree}")
    return p.degree


def _check_n(n):
    if not n > -1:
        raise ValueError(f"index n must exceed -1, got {n}")


def boxplus(p, q):
    """Square convolution ``p ⊞_d q`` from the coefficient formula.

    The weight ``(d-i)!(d-j)! / (d!(d-k)!)`` is evaluated as
    ``(d-j)_i / (d)_i``.
    """
    d = _same_degree(p, q)
    a, b = p.coeffs, q.coeffs
    out = []
    for k in range(d + 1):
        acc = 0
        for i in range(k + 1):
            j = k - i
            acc = acc + a[i] * b[j] * Fraction(falling(d - j, i), falling(d, i))
        out.append(acc)
    return MonicPoly(out)


def boxplus_via_operators(p, q):
    """Square convolution as ``p̂(D) q̂(D) x^d`` with unnormalized symbols."""
    d = _same_degree(p, q)
    sym = to_operator_symbol(p, normalized=False) * to_operator_symbol(q, normalized=False)
    return apply_operator_symbol(sym, d, normalized=False)


def boxplus_power(p, k):
    """``k``-fold ``⊞_d`` power of ``p`` via one symbol exponentiation."""
    if not isinstance(k, Integral) or k < 1:
        raise ValueError(f"power must be a positive integer, got {k}")
    sym = to_operator_symbol(p, normalized=False)
    out = sym
    for _ in range(int(k) - 1):
        out = out * sym
    return apply_operator_symbol(out, p.degree, normalized=False)


def rect_boxplus(p, q, n):
    """Rectangular convolution ``p ⊞_{d,n} q`` through powers of ``M_n``.

    Evaluates ``(1/(d! (d+n)_d)) sum_k [M_n^(d-k) q](0) M_n^k p``, valid for
    any real ``n > -1``. The constant ``[M_n^(d-k) q](0)`` only sees the
    ``x^(d-k)`` term of ``q``, since ``M_n^m x^m = m! (n+m)_m``.
    """
    d = _same_degree(p, q)
    _check_n(n)
    norm = math.factorial(d) * falling(d + n, d)
    acc = [0] * (d + 1)
    mp = p
    for k in range(d + 1):
        m = d - k
        const = q.coeffs[k] * math.factorial(m) * falling(n + m, m)
        # mp = M_n^k p has degree d - k and fills acc[k:]
        for i, c in enumerate(mp.coeffs):
            acc[k + i] = acc[k + i] + const * c
        if k < d:
            mp = apply_Mn(mp, n)
    return MonicPoly([c / norm for c in acc])


def rect_boxplus_via_operators(p, q, n):
    """Rectangular convolution as ``P(M_n) Q(M_n) x^d`` with unnormalized symbols."""
    d = _same_degree(p, q)
    _check_n(n)
    sym = to_rect_operator_symbol(p, n, normalized=False) * to_rect_operator_symbol(q, n, normalized=False)
    return apply_rect_operator_symbol(sym, d, n, normalized=False)


def rect_boxplus_factorial(p, q, n):
    """Rectangular convolution from the integer-``n`` factorial formula.

    Uses literal factorials ``(n+d-i)!`` and therefore requires a
    nonnegative integer ``n``. Kept as a verification path.
    """
    d = _same_degree(p, q)
    if isinstance(n, Fraction) and n.denominator == 1:
        n = n.numerator
    if not isinstance(n, Integral) or n < 0:
        raise ValueError("the factorial formula needs a nonnegative integer n")
    f = math.factorial
    a, b = p.coeffs, q.coeffs
    out = []
    for k in range(d + 1):
        acc = 0
        for i in range(k + 1):
            j = k - i
            w = Fraction(f(d - i) * f(d - j), f(d) * f(d - k))
            w *= Fraction(f(n + d - i) * f(n + d - j), f(n + d) * f(n + d - k))
            acc = acc + a[i] * b[j] * w
        out.append(acc)
    return MonicPoly(out)
