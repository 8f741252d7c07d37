"""Set partitions, moments, finite free cumulants and truncated R-transforms.

Conventions
-----------
``finite_R(p)`` is stored to order ``d - 1``: the coefficient of ``s^(j-1)``
is the ``j``-th finite free cumulant, ``j = 1..d``. Only those coefficients
are additive under the square convolution, the next one already depends on
the truncation of the operator symbol.

``rect_finite_R(p, n)`` carries an extra factor ``s`` and is stored to order
``d``; its ``s^k`` coefficient equals ``rect_cumulant_scaled(p, k, n)``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .poly_core import BigReal, MonicPoly, Poly, apply_Mn_power_normalized, falling, normalized_derivative

__all__ = [
    "Partition",
    "partitions",
    "bell",
    "partition_types",
    "TruncatedSeries",
    "power_sums",
    "moment",
    "ff_cumulant",
    "rect_cumulant_K",
    "rect_cumulant_scaled",
    "to_operator_symbol",
    "apply_operator_symbol",
    "to_rect_operator_symbol",
    "apply_rect_operator_symbol",
    "log_derivative",
    "log_derivative_partitions",
    "finite_R",
    "rect_finite_R",
    "FlowReport",
    "derivative_flow_R_identity_check",
    "mn_flow_R_identity_check",
    "cumulant_flow_check",
]

MAX_PARTITION_ORDER = 14


# --------------------------------------------------------------------------
# set partitions


@dataclass(frozen=True)
class Partition:
    """Set partition of ``{1..j}`` as a tuple of sorted blocks."""

    blocks: tuple

    def __len__(self):
        return len(self.blocks)

    @property
    def size(self):
        return sum(len(b) for b in self.blocks)

    @property
    def block_sizes(self):
        return tuple(sorted((len(b) for b in self.blocks), reverse=True))

    def refines(self, other):
        """True if every block of ``self`` sits inside a block of ``other``."""
        owner = {}
        for i, b in enumerate(other.blocks):
            for x in b:
                owner[x] = i
        return all(len({owner[x] for x in b}) == 1 for b in self.blocks)


def partitions(j):
    """Yield every set partition of ``{1..j}`` exactly once.

    Enumerates restricted growth strings, so the stream can be restarted
    cheaply and never stores more than one partition.
    """
    j = int(j)
    if not 1 <= j <= MAX_PARTITION_ORDER:
        raise ValueError(f"partition order must lie in [1, {MAX_PARTITION_ORDER}], got {j}")
    a = [0] * j
    m = [0] * j  # m[i] = max(a[0..i])
    while True:
        blocks = [[] for _ in range(m[-1] + 1)]
        for i, b in enumerate(a):
            blocks[b].append(i + 1)
        yield Partition(tuple(tuple(b) for b in blocks))
        i = j - 1
        while i > 0 and a[i] == m[i - 1] + 1:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        m[i] = max(m[i - 1], a[i])
        for k in range(i + 1, j):
            a[k] = 0
            m[k] = m[i]


@lru_cache(maxsize=None)
def bell(j):
    """Bell number via the triangle recurrence."""
    row = [1]
    for _ in range(j):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def _integer_partitions(n, largest=None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _integer_partitions(n - k, k):
            yield (k,) + rest


@lru_cache(maxsize=None)
def partition_types(j):
    """Block-size types of set partitions of ``[j]`` with their counts.

    Returns a tuple of ``(sizes, count)`` with ``sizes`` descending and
    ``count = j! / (prod sizes_i! prod mult_s!)``.
    """
    out = []
    for lam in _integer_partitions(j):
        den = 1
        for s in lam:
            den *= math.factorial(s)
        for mult in Counter(lam).values():
            den *= math.factorial(mult)
        out.append((lam, math.factorial(j) // den))
    return tuple(out)


def _mobius_to_top(r):
    """``mu(sigma, 1)`` for a partition with ``r`` blocks."""
    return (-1) ** (r - 1) * math.factorial(r - 1)


# --------------------------------------------------------------------------
# truncated series


def _zero_like(x):
    return BigReal(0, x.prec) if isinstance(x, BigReal) else Fraction(0)


def _scalar(x):
    if isinstance(x, BigReal):
        return x
    return Fraction(x)


class TruncatedSeries:
    """Formal power series in ``s`` kept modulo ``s^(order+1)``.

    Parameters
    ----------
    coeffs : sequence
        Coefficients of ``s^0, s^1, ...``. Missing entries are zero, extra
        entries beyond ``order`` are discarded.
    order : int, optional
        Truncation order; defaults to ``len(coeffs) - 1``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs, order=None):
        coeffs = [_scalar(c) for c in coeffs]
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError("order must be nonnegative")
        zero = _zero_like(coeffs[0]) if coeffs else Fraction(0)
        coeffs = coeffs[: order + 1] + [zero] * (order + 1 - len(coeffs))
        self.coeffs = tuple(coeffs)

    @property
    def order(self):
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"TruncatedSeries({[str(c) for c in self.coeffs]}, order={self.order})"

    def truncate(self, order):
        return TruncatedSeries(self.coeffs, min(order, self.order))

    def _pair(self, other):
        m = min(self.order, other.order)
        return self.coeffs[: m + 1], other.coeffs[: m + 1], m

    def __add__(self, other):
        a, b, m = self._pair(other)
        return TruncatedSeries([x + y for x, y in zip(a, b)], m)

    def __sub__(self, other):
        a, b, m = self._pair(other)
        return TruncatedSeries([x - y for x, y in zip(a, b)], m)

    def __neg__(self):
        return TruncatedSeries([-x for x in self.coeffs])

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        a, b, m = self._pair(other)
        out = []
        for k in range(m + 1):
            acc = a[0] * b[k]
            for i in range(1, k + 1):
                acc = acc + a[i] * b[k - i]
            out.append(acc)
        return TruncatedSeries(out, m)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c):
        return TruncatedSeries([x * c for x in self.coeffs])

    def dilate(self, alpha):
        """Substitute ``s -> alpha s``."""
        out, w = [], 1
        for x in self.coeffs:
            out.append(x * w)
            w = w * alpha
        return TruncatedSeries(out)

    def shift(self):
        """Multiply by ``s``; the order grows by one."""
        return TruncatedSeries([_zero_like(self.coeffs[0])] + list(self.coeffs))

    def derivative(self):
        """Coefficientwise derivative, known modulo ``s^order``."""
        if self.order == 0:
            return TruncatedSeries([_zero_like(self.coeffs[0])], 0)
        return TruncatedSeries([self.coeffs[k] * k for k in range(1, self.order + 1)])

    def reciprocal(self):
        c0 = self.coeffs[0]
        if c0 == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        out = [1 / c0 if not isinstance(c0, BigReal) else BigReal(1, c0.prec) / c0]
        for k in range(1, self.order + 1):
            acc = self.coeffs[1] * out[k - 1]
            for i in range(2, k + 1):
                acc = acc + self.coeffs[i] * out[k - i]
            out.append(-acc / c0)
        return TruncatedSeries(out)

    def __truediv__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(1 / Fraction(other) if not isinstance(other, BigReal) else 1 / other)
        return self * other.reciprocal()

    def exp(self):
        """``exp`` of a series with zero constant term."""
        if self.coeffs[0] != 0:
            raise ValueError("exp needs a zero constant term")
        f = self.coeffs
        one = BigReal(1, f[0].prec) if isinstance(f[0], BigReal) else Fraction(1)
        g = [one]
        for k in range(1, self.order + 1):
            acc = f[1] * g[k - 1]
            for i in range(2, k + 1):
                acc = acc + f[i] * i * g[k - i]
            g.append(acc / k)
        return TruncatedSeries(g)

    def log(self):
        """``log`` of a series with constant term 1."""
        if self.coeffs[0] != 1:
            raise ValueError("log needs constant term 1")
        g = self.coeffs
        f = [_zero_like(g[0])]
        for k in range(1, self.order + 1):
            acc = g[k] * k
            for i in range(1, k):
                acc = acc - f[i] * i * g[k - i]
            f.append(acc / k)
        return TruncatedSeries(f)

    def power(self, alpha):
        """``self ** alpha`` for a series with constant term 1 and any scalar exponent."""
        if self.coeffs[0] != 1:
            raise ValueError("power needs constant term 1")
        g = self.coeffs
        h = [g[0]]
        for k in range(1, self.order + 1):
            acc = _zero_like(g[0])
            for i in range(1, k + 1):
                acc = acc + g[i] * h[k - i] * ((alpha + 1) * i - k)
            h.append(acc / k)
        return TruncatedSeries(h)

    def __call__(self, z):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def to_strings(self):
        from .poly_core import format_scalar

        return [format_scalar(c) for c in self.coeffs]


# --------------------------------------------------------------------------
# moments and cumulants


def power_sums(p, J):
    """Root power sums ``P_1..P_J`` from Newton's identities, no root finding."""
    c = p.coeffs
    d = p.degree
    out = [None]
    for j in range(1, J + 1):
        acc = c[j] * j if j <= d else 0
        for i in range(1, min(j, d + 1)):
            acc = acc + c[i] * out[j - i]
        out.append(-acc)
    return out[1:]


def moment(p, j):
    """``j``-th moment of the empirical root measure, exact in rational mode."""
    if j < 1:
        raise ValueError("moment order must be positive")
    return power_sums(p, j)[-1] / p.degree


@lru_cache(maxsize=None)
def _coarsening_weight(sizes, d):
    """``sum_{rho in P(r)} mu(rho, 1) / prod_B (d)_{|B|}`` over the blocks of ``sizes``.

    ``|B|`` is the total size of the merged blocks. This is the connected
    part of a multilinear generating function, computed by subset recursion.
    """
    r = len(sizes)
    full = (1 << r) - 1
    w = {}
    for mask in range(1, full + 1):
        tot = sum(sizes[i] for i in range(r) if mask >> i & 1)
        w[mask] = Fraction(1, falling(d, tot)) if isinstance(d, int) else 1 / falling(d, tot)
    g = {}
    for mask in range(1, full + 1):
        low = mask & -mask
        rest = mask ^ low
        acc = w[mask]
        sub = rest
        # subsets T of mask containing the lowest bit, T != mask
        while True:
            t = sub | low
            if t != mask:
                acc = acc - g[t] * w[mask ^ t]
            if sub == 0:
                break
            sub = (sub - 1) & rest
        g[mask] = acc
    return g[full]


def ff_cumulant(p, j):
    """Finite free cumulant ``kappa_j^d(p)`` from the moment-cumulant partition sum.

    Partitions are grouped by block-size type. Within a type the inner sum
    over coarsenings only depends on the multiset of sizes and is memoized.
    """
    d = p.degree
    j = int(j)
    if not 1 <= j <= d:
        raise ValueError(f"cumulant order must lie in [1, {d}], got {j}")
    if j > MAX_PARTITION_ORDER:
        raise ValueError("use finite_R for cumulant orders above the partition cap")
    m = [None] + [s / d for s in power_sums(p, j)]
    total = 0
    for sizes, count in partition_types(j):
        mp = 1
        mu0 = 1
        for s in sizes:
            mp = mp * m[s]
            mu0 *= (-1) ** (s - 1) * math.factorial(s - 1)
        total = total + count * d ** len(sizes) * mu0 * mp * _coarsening_weight(sizes, d)
    return total * Fraction((-d) ** (j - 1), math.factorial(j - 1))


def rect_cumulant_K(p, k, n):
    """Unscaled rectangular finite free cumulant ``K_{2k}^{n,d}[p]``."""
    d = p.degree
    k = int(k)
    if not 1 <= k <= d:
        raise ValueError(f"cumulant order must lie in [1, {d}], got {k}")
    if not n > -1:
        raise ValueError(f"index n must exceed -1, got {n}")
    alpha = [None]
    for i in range(1, k + 1):
        alpha.append(p.a(i) * math.factorial(i) / (falling(d, i) * falling(n + d, i)))
    total = 0
    for sizes, count in partition_types(k):
        prod = 1
        for s in sizes:
            prod = prod * alpha[s]
        total = total + prod * count * _mobius_to_top(len(sizes))
    return total * Fraction((-1) ** k, math.factorial(k - 1))


def rect_cumulant_scaled(p, k, n):
    """Scaled cumulant ``-d^(2k-1) (1 + n/d)^k K_{2k}^{n,d}[p]``."""
    d = p.degree
    return -(d ** (2 * k - 1)) * (1 + Fraction(1, 1) * n / d) ** k * rect_cumulant_K(p, k, n)


# --------------------------------------------------------------------------
# operator symbols


def to_operator_symbol(p, normalized=True):
    """Symbol ``P`` with ``P(D/d) x^d = p`` (normalized) or ``P(D) x^d = p``.

    Uses ``D^k x^d = (d)_k x^(d-k)``.
    """
    d = p.degree
    out = []
    for k, c in enumerate(p.coeffs):
        w = Fraction(1, falling(d, k))
        if normalized:
            w *= d**k
        out.append(c * w)
    return TruncatedSeries(out, d)


def apply_operator_symbol(sym, d, normalized=True):
    """Inverse of :func:`to_operator_symbol`: apply the symbol to ``x^d``."""
    out = []
    for k in range(d + 1):
        c = sym[k] if k <= sym.order else 0
        w = Fraction(falling(d, k))
        if normalized:
            w /= d**k
        out.append(c * w)
    return MonicPoly(out) if out[0] == 1 else Poly(out)


def to_rect_operator_symbol(p, n, normalized=True):
    """Symbol ``P`` with ``P(M_n / (d(d+n))) x^d = p`` (or ``P(M_n) x^d = p``).

    Uses ``M_n^k x^d = (d)_k (n+d)_k x^(d-k)``.
    """
    if not n > -1:
        raise ValueError(f"index n must exceed -1, got {n}")
    d = p.degree
    out = []
    for k, c in enumerate(p.coeffs):
        w = 1 / (Fraction(falling(d, k)) * falling(n + d, k))
        if normalized:
            w = w * (d * (d + n)) ** k
        out.append(c * w)
    return TruncatedSeries(out, d)


def apply_rect_operator_symbol(sym, d, n, normalized=True):
    """Inverse of :func:`to_rect_operator_symbol`."""
    if not n > -1:
        raise ValueError(f"index n must exceed -1, got {n}")
    out = []
    for k in range(d + 1):
        c = sym[k] if k <= sym.order else 0
        w = Fraction(falling(d, k)) * falling(n + d, k)
        if normalized:
            w = w / (d * (d + n)) ** k
        out.append(c * w)
    return MonicPoly(out) if out[0] == 1 else Poly(out)


# --------------------------------------------------------------------------
# R-transforms


def log_derivative(f):
    """``f'/f`` modulo ``s^order`` for a series with constant term 1."""
    if f[0] != 1:
        raise ValueError("log_derivative needs constant term 1")
    return f.log().derivative()


def log_derivative_partitions(f):
    """Same as :func:`log_derivative`, through the set-partition formula for log.

    With ``f = 1 + sum a_k s^k / k!`` and ``log f = sum b_k s^k / k!``,
    ``b_k = sum_pi a_pi (-1)^(|pi|-1) (|pi|-1)!``.
    """
    if f[0] != 1:
        raise ValueError("log_derivative needs constant term 1")
    m = f.order
    a = [None] + [f[k] * math.factorial(k) for k in range(1, m + 1)]
    out = []
    for k in range(1, m + 1):
        b = 0
        for sizes, count in partition_types(k):
            prod = 1
            for s in sizes:
                prod = prod * a[s]
            b = b + prod * count * _mobius_to_top(len(sizes))
        out.append(b / math.factorial(k - 1))
    if not out:
        return TruncatedSeries([_zero_like(f[0])], 0)
    return TruncatedSeries(out)


def finite_R(p):
    """Finite free R-transform ``-(1/d) P_d'/P_d``, coefficients ``kappa_1..kappa_d``."""
    d = p.degree
    if d == 0:
        raise ValueError("R-transform needs degree at least 1")
    P = to_operator_symbol(p, normalized=True)
    return log_derivative(P).scale(Fraction(-1, d))


def rect_finite_R(p, n):
    """Rectangular finite R-transform ``-(s/d) P_{d,n}'/P_{d,n}`` to order ``d``."""
    d = p.degree
    if d == 0:
        raise ValueError("R-transform needs degree at least 1")
    P = to_rect_operator_symbol(p, n, normalized=True)
    return log_derivative(P).shift().scale(Fraction(-1, d))


# --------------------------------------------------------------------------
# exact identity checks


@dataclass(frozen=True)
class FlowReport:
    """Outcome of an exact identity check."""

    name: str
    degree: int
    j: int
    n: object
    lhs: tuple
    rhs: tuple
    max_discrepancy: object

    @property
    def exact(self):
        return self.max_discrepancy == 0


def _discrepancy(lhs, rhs):
    return max((abs(x - y) for x, y in zip(lhs, rhs)), default=Fraction(0))


def derivative_flow_R_identity_check(p, j):
    """Compare ``R^{d-j}`` of the normalized ``j``-th derivative with ``R^d_p((d-j)s/d)``."""
    d = p.degree
    if not 0 <= j < d:
        raise ValueError(f"j must lie in [0, {d - 1}], got {j}")
    pj = normalized_derivative(p, d - j)
    lhs = finite_R(pj)
    rhs = finite_R(p).dilate(Fraction(d - j, d)).truncate(lhs.order)
    return FlowReport("derivative_flow_R", d, j, None, lhs.coeffs, rhs.coeffs, _discrepancy(lhs, rhs))


def mn_flow_R_identity_check(p, n, j):
    """Compare the rectangular R-transform along the normalized ``M_n`` flow.

    Checks ``R^{d-j,n}_{p_j}(s) = d/(d-j) R^{d,n}_p(beta s)`` with
    ``beta = (d-j)(n+d-j) / (d(n+d))``.
    """
    d = p.degree
    if not 0 <= j < d:
        raise ValueError(f"j must lie in [0, {d - 1}], got {j}")
    pj = apply_Mn_power_normalized(p, n, j)
    lhs = rect_finite_R(pj, n)
    beta = Fraction(d - j) * (n + d - j) / (d * (n + d))
    rhs = rect_finite_R(p, n).dilate(beta).scale(Fraction(d, d - j)).truncate(lhs.order)
    return FlowReport("mn_flow_R", d, j, n, lhs.coeffs, rhs.coeffs, _discrepancy(lhs, rhs))


def cumulant_flow_check(p, n, j):
    """Behaviour of the rectangular cumulants along the normalized ``M_n`` flow.

    Returns three reports for ``p_j = M_n^j p / ((d)_j (n+d)_j)``:

    ``K_invariance``
        ``K_{2k}^{n,d-j}[p_j] = K_{2k}^{n,d}[p]``.
    ``kappa_scaling``
        ``kappa_{2k}^{n,d-j}[p_j] = ((d-j)/d)^(k-1) ((n+d-j)/(n+d))^k kappa_{2k}^{n,d}[p]``,
        which is what the invariance of ``K`` implies for the scaled cumulants.
    ``kappa_scaling_square_factor``
        the same with the factor ``((d-j)/d)^(2k-1)``; exact only when
        ``n = 0`` or ``j = 0``, reported for comparison.
    """
    d = p.degree
    pj = apply_Mn_power_normalized(p, n, j)
    ks = range(1, d - j + 1)
    lhs_k = tuple(rect_cumulant_K(pj, k, n) for k in ks)
    rhs_k = tuple(rect_cumulant_K(p, k, n) for k in ks)
    r = Fraction(d - j, d)
    rn = (n + d - j) / Fraction(n + d) if not isinstance(n, BigReal) else (n + d - j) / (n + d)
    base = tuple(rect_cumulant_scaled(p, k, n) for k in ks)
    lhs_s = tuple(rect_cumulant_scaled(pj, k, n) for k in ks)
    rhs_s = tuple(r ** (k - 1) * rn**k * b for k, b in zip(ks, base))
    rhs_sq = tuple(r ** (2 * k - 1) * b for k, b in zip(ks, base))
    return (
        FlowReport("K_invariance", d, j, n, lhs_k, rhs_k, _discrepancy(lhs_k, rhs_k)),
        FlowReport("kappa_scaling", d, j, n, lhs_s, rhs_s, _discrepancy(lhs_s, rhs_s)),
        FlowReport("kappa_scaling_square_factor", d, j, n, lhs_s, rhs_sq, _discrepancy(lhs_s, rhs_sq)),
    )
