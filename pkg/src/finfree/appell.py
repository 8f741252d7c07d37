"""Appell, Jensen and Laguerre–Appell families built from Laguerre–Pólya data.

Sign convention: :class:`LaguerrePolyaData` stores the drift ``c`` of

    f(z) = exp(-c z - sigma2 z^2 / 2) prod_j (1 - z/x_j) exp(z/x_j),

so the form with ``exp(+c z)`` is obtained by passing ``-c``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cumulants import TruncatedSeries, apply_operator_symbol, apply_rect_operator_symbol
from .poly_core import BigReal, MonicPoly, Poly, apply_Mn, falling, format_scalar, parse_scalar, reverse

__all__ = [
    "LaguerrePolyaData",
    "LpiData",
    "RadonAtoms",
    "lp_series",
    "lpi_series",
    "appell_poly",
    "jensen_poly",
    "hermite",
    "laguerre",
    "normalized_appell",
    "laguerre_appell",
    "laguerre_appell_via_operator",
    "laguerre_jensen",
    "normalized_laguerre_appell",
    "MembershipReport",
    "lpi_membership",
    "LevyData",
    "levy_data",
    "rect_levy_data",
    "exact_sqrt",
]


def _exact(x):
    if isinstance(x, BigReal):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def exact_sqrt(x, prec=256):
    """Square root, exact when ``x`` is the square of a rational."""
    if isinstance(x, BigReal):
        return x.sqrt()
    x = Fraction(x)
    if x < 0:
        raise ValueError("square root of a negative number")
    rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return BigReal(x, prec).sqrt()


@dataclass(frozen=True)
class LaguerrePolyaData:
    """Finite truncation ``(c, sigma2, roots)`` of a Laguerre–Pólya function.

    Parameters
    ----------
    c : rational
        Drift in the ``exp(-c z)`` convention.
    sigma2 : rational
        Gaussian variance, nonnegative.
    roots : tuple of rationals
        Nonzero real zeros, with multiplicity.
    """

    c: Fraction = Fraction(0)
    sigma2: Fraction = Fraction(0)
    roots: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "c", _exact(self.c))
        object.__setattr__(self, "sigma2", _exact(self.sigma2))
        object.__setattr__(self, "roots", tuple(_exact(r) for r in self.roots))
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        if any(r == 0 for r in self.roots):
            raise ValueError("roots must be nonzero")

    def inverse_square_sum(self):
        return sum((1 / r**2 for r in self.roots), Fraction(0))

    def to_json(self):
        return {
            "c": format_scalar(self.c),
            "sigma2": format_scalar(self.sigma2),
            "roots": [format_scalar(r) for r in self.roots],
        }

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(
            parse_scalar(str(obj.get("c", "0"))),
            parse_scalar(str(obj.get("sigma2", "0"))),
            tuple(parse_scalar(str(r)) for r in obj.get("roots", [])),
        )


@dataclass(frozen=True)
class LpiData:
    """Finite truncation ``(sigma2, alpha_j^2)`` of ``exp(-sigma2 z) prod (1 - z/alpha_j^2)``."""

    sigma2: Fraction = Fraction(0)
    roots_sq: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "sigma2", _exact(self.sigma2))
        object.__setattr__(self, "roots_sq", tuple(_exact(r) for r in self.roots_sq))
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        if any(r <= 0 for r in self.roots_sq):
            raise ValueError("squared roots must be positive")

    def to_json(self):
        return {"sigma2": format_scalar(self.sigma2), "roots_sq": [format_scalar(r) for r in self.roots_sq]}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(
            parse_scalar(str(obj.get("sigma2", "0"))),
            tuple(parse_scalar(str(r)) for r in obj.get("roots_sq", [])),
        )


@dataclass(frozen=True)
class RadonAtoms:
    """Finite positive measure given by weighted atoms."""

    atoms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        atoms = tuple((loc, mass) for loc, mass in self.atoms)
        if any(not mass > 0 for _, mass in atoms):
            raise ValueError("atom masses must be positive")
        object.__setattr__(self, "atoms", atoms)

    def canonical(self):
        """Merge equal locations and sort."""
        acc = {}
        for loc, mass in self.atoms:
            key = loc.value if isinstance(loc, BigReal) else loc
            if key in acc:
                acc[key] = (acc[key][0], acc[key][1] + mass)
            else:
                acc[key] = (loc, mass)
        return RadonAtoms(tuple(sorted(acc.values(), key=lambda a: float(a[0]))))

    @property
    def total_mass(self):
        return sum((m for _, m in self.atoms), Fraction(0))

    def window_mass(self, lo, hi):
        """Mass in the closed window ``[lo, hi]``."""
        return sum((m for x, m in self.atoms if lo <= x <= hi), Fraction(0))

    def __len__(self):
        return len(self.atoms)


# --------------------------------------------------------------------------
# series


def lp_series(data, order):
    """Taylor coefficients ``gamma_k / k!`` of the Laguerre–Pólya function of ``data``.

    Computed as ``exp(-c z - sigma2 z^2/2 - sum_{m>=2} s_m z^m / m)`` with
    power sums ``s_m = sum_j x_j^(-m)``; the ``exp(z/x_j)`` factors cancel
    the ``m = 1`` term.
    """
    order = int(order)
    if order < 0:
        raise ValueError("order must be nonnegative")
    e = [Fraction(0)] * (order + 1)
    if order >= 1:
        e[1] = -data.c
    if order >= 2:
        e[2] = -data.sigma2 / 2
    for m in range(2, order + 1):
        s_m = sum((1 / x**m for x in data.roots), Fraction(0))
        e[m] = e[m] - s_m / m
    return TruncatedSeries(e, order).exp()


def lpi_series(data, order):
    """Taylor coefficients ``eta_k / k!`` of ``exp(-sigma2 z) prod (1 - z/alpha_j^2)``."""
    order = int(order)
    e = [Fraction(0)] * (order + 1)
    if order >= 1:
        e[1] = -data.sigma2
    for m in range(1, order + 1):
        t_m = sum((1 / a**m for a in data.roots_sq), Fraction(0))
        e[m] = e[m] - t_m / m
    return TruncatedSeries(e, order).exp()


def _as_series(f, d, builder):
    if isinstance(f, TruncatedSeries):
        if f.order < d:
            f = TruncatedSeries(f.coeffs, d)
        return f
    return builder(f, d)


def _check_unit(f):
    if f[0] != 1:
        raise ValueError("the series must have constant term 1")


# --------------------------------------------------------------------------
# Appell and Jensen


def appell_poly(f, d):
    """Appell polynomial ``A_{d,f}(z) = sum gamma_k C(d,k) z^(d-k) = f(D) z^d``.

    ``f`` is a :class:`TruncatedSeries` (missing high coefficients count as
    zero) or :class:`LaguerrePolyaData`.
    """
    f = _as_series(f, d, lp_series)
    _check_unit(f)
    return MonicPoly([f[k] * falling(d, k) for k in range(d + 1)])


def jensen_poly(f, d):
    """Jensen polynomial ``J_{d,f}(z) = sum gamma_k C(d,k) z^k``."""
    return reverse(appell_poly(f, d))


def hermite(ell):
    """Probabilists' Hermite polynomial ``He_ell`` from its closed form."""
    ell = int(ell)
    if ell < 0:
        raise ValueError("degree must be nonnegative")
    out = [Fraction(0)] * (ell + 1)
    for k in range(ell // 2 + 1):
        num = math.factorial(ell) * (-1) ** k
        den = math.factorial(k) * math.factorial(ell - 2 * k) * 2**k
        out[2 * k] = Fraction(num, den)
    return MonicPoly(out)


def laguerre(ell, n, monic=False):
    """Laguerre polynomial ``L_ell^(n)(x) = sum (-1)^k (ell+n)_{ell-k} / (k!(ell-k)!) x^k``.

    The raw polynomial has leading coefficient ``(-1)^ell / ell!``; pass
    ``monic=True`` for the monic version. ``n`` may be any real above -1.
    """
    ell = int(ell)
    if ell < 0:
        raise ValueError("degree must be nonnegative")
    if not n > -1:
        raise ValueError(f"index n must exceed -1, got {n}")
    asc = []
    for k in range(ell + 1):
        asc.append(falling(ell + n, ell - k) * Fraction((-1) ** k, math.factorial(k) * math.factorial(ell - k)))
    p = Poly(list(reversed(asc)))
    return p.monic() if monic else p


def normalized_appell(f, d):
    """``Â_d = f(D/d)^d z^d``.

    The symbol ``f^d`` is formed by a power recurrence on the truncated
    series, then applied with ``(D/d)^k z^d = (d)_k / d^k z^(d-k)``.
    """
    f = _as_series(f, d, lp_series).truncate(d)
    _check_unit(f)
    return apply_operator_symbol(f.power(d), d, normalized=True)


# --------------------------------------------------------------------------
# Laguerre–Appell


def _check_n(n):
    if not n > -1:
        raise ValueError(f"index n must exceed -1, got {n}")


def laguerre_appell(g, d, n):
    """``L_{d,g}(z) = sum eta_k (n+d)_k C(d,k) z^(d-k)``."""
    _check_n(n)
    g = _as_series(g, d, lpi_series)
    _check_unit(g)
    return MonicPoly([g[k] * falling(d, k) * falling(n + d, k) for k in range(d + 1)])


def laguerre_appell_via_operator(g, d, n):
    """``g(M_n) z^d`` by repeated application of ``M_n``."""
    _check_n(n)
    g = _as_series(g, d, lpi_series)
    _check_unit(g)
    acc = [0] * (d + 1)
    cur = MonicPoly([1] + [0] * d)
    for k in range(d + 1):
        for i, c in enumerate(cur.coeffs):
            acc[k + i] = acc[k + i] + g[k] * c
        if k < d:
            cur = apply_Mn(cur, n)
    return MonicPoly(acc)


def laguerre_jensen(g, d, n):
    """``K_{d,g}(z) = z^d L_{d,g}(1/z)``."""
    return reverse(laguerre_appell(g, d, n))


def normalized_laguerre_appell(g, d, n):
    """``L̂_d = g(M_n / (d(n+d)))^d z^d``."""
    _check_n(n)
    g = _as_series(g, d, lpi_series).truncate(d)
    _check_unit(g)
    return apply_rect_operator_symbol(g.power(d), d, n, normalized=True)


@dataclass(frozen=True)
class MembershipReport:
    """Outcome of the positive-root test on Laguerre–Jensen polynomials."""

    passed: bool
    checked_up_to: int
    first_failure: int | None = None
    reason: str | None = None


def lpi_membership(g, d, n, tol=1e-20):
    """Check that ``K_{k,g}`` has only positive roots for every ``k <= d``.

    Reasons for failure are ``"complex roots"``, ``"nonpositive root"`` and
    ``"solver nonconvergence"``; the last one is not evidence against
    membership.
    """
    from .measures import ComplexRoots, NonConvergence, find_roots

    _check_n(n)
    g = _as_series(g, d, lpi_series)
    _check_unit(g)
    for k in range(1, d + 1):
        K = laguerre_jensen(g, k, n)
        if K.degree == 0:
            continue
        try:
            roots = find_roots(K.monic(), tol=tol).roots
        except ComplexRoots:
            return MembershipReport(False, k, k, "complex roots")
        except NonConvergence:
            return MembershipReport(False, k, k, "solver nonconvergence")
        if any(not r > 0 for r in roots):
            return MembershipReport(False, k, k, "nonpositive root")
    return MembershipReport(True, d)


# --------------------------------------------------------------------------
# Lévy data


@dataclass(frozen=True)
class LevyData:
    """Drift, Gaussian part and jump data of the limiting infinitely divisible law."""

    gamma: Fraction
    sigma2: Fraction
    nu: RadonAtoms
    G_f: RadonAtoms
    gamma_partial_sums: tuple


def levy_data(data):
    """Lévy data of ``mu_f`` for Laguerre–Pólya ``data``.

    With ``f = exp(-c z) ...`` the drift is ``gamma = c - sum 1/(x_j^3 + x_j)``,
    which keeps ``R(0) = -f'(0)``. The partial sums of the drift are returned
    in root order since the infinite sum need not converge absolutely.
    """
    gamma = data.c
    partial = []
    for x in data.roots:
        gamma = gamma - 1 / (x**3 + x)
        partial.append(gamma)
    nu = RadonAtoms(tuple((1 / x, Fraction(1)) for x in data.roots))
    atoms = [(Fraction(0), data.sigma2)] if data.sigma2 > 0 else []
    atoms += [(1 / x, 1 / x**2) for x in data.roots]
    return LevyData(gamma, data.sigma2, nu, RadonAtoms(tuple(atoms)).canonical(), tuple(partial))


def rect_levy_data(data, lam=None, prec=256):
    """Radon measures ``(G_g, G)`` for ``LpiData``.

    ``G_g = sigma2 delta_0 + sum alpha^-2 delta_{alpha^-2}`` and
    ``G = sigma2 delta_0 + sum 1/(alpha^2+1) (delta_{1/alpha} + delta_{-1/alpha}) / 2``.
    ``lam`` is accepted for symmetry with the transform API; neither measure
    depends on it.
    """
    base = [(Fraction(0), data.sigma2)] if data.sigma2 > 0 else []
    gg = list(base) + [(1 / a, 1 / a) for a in data.roots_sq]
    G = list(base)
    for a in data.roots_sq:
        inv = 1 / exact_sqrt(a, prec)
        w = Fraction(1, 2) / (a + 1)
        G += [(inv, w), (-inv, w)]
    return RadonAtoms(tuple(gg)).canonical(), RadonAtoms(tuple(G)).canonical()
