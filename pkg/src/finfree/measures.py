"""Root extraction, empirical root measures, reference laws and distances."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import flint
import gmpy2

from .appell import RadonAtoms, exact_sqrt
from .poly_core import DEFAULT_PREC, BigReal

__all__ = [
    "NonConvergence",
    "ComplexRoots",
    "UnsupportedCdf",
    "BracketError",
    "PoleError",
    "RootReport",
    "find_roots",
    "aberth_roots",
    "AtomicMeasure",
    "erm",
    "dilate_measure",
    "sqrt_symmetrize",
    "square_pushforward",
    "radon_t2",
    "radon_t",
    "Semicircle",
    "MarchenkoPastur",
    "Cauchy",
    "RectGaussian",
    "FreeIdAtomic",
    "RectIdAtomic",
    "cdf",
    "kolmogorov_distance",
    "cdf_table",
    "r_transform_eval",
    "c_transform_eval",
    "rect_C_numeric",
]

MAX_PREC = 4096


class NonConvergence(RuntimeError):
    """The root iteration did not settle within the iteration and precision budget."""

    def __init__(self, index, precision):
        super().__init__(f"root {index} did not converge at {precision} bits")
        self.index = index
        self.precision = precision


class ComplexRoots(ValueError):
    """Some roots have an imaginary part above the tolerance."""

    def __init__(self, count, report=None):
        super().__init__(f"{count} root(s) with imaginary part above tolerance")
        self.count = count
        self.report = report


class UnsupportedCdf(NotImplementedError):
    pass


class BracketError(ValueError):
    pass


class PoleError(ValueError):
    pass


# --------------------------------------------------------------------------
# roots


@dataclass(frozen=True)
class RootReport:
    """Roots of a polynomial with a residual summary.

    ``roots`` holds the real roots (imaginary part at most ``tol``) sorted
    ascending, with multiplicity, as :class:`BigReal`. ``complex_roots``
    holds every root as ``gmpy2.mpc``.
    """

    roots: tuple
    complex_roots: tuple
    max_imag: float
    iterations: int
    precision: int
    method: str

    def floats(self):
        return [float(r) for r in self.roots]


def _exact_coeffs(p):
    out = []
    for c in p.coeffs:
        if isinstance(c, BigReal):
            num, den = c.value.as_integer_ratio()
            out.append(Fraction(num, den))
        else:
            out.append(Fraction(c))
    return out


def _arb_mid(x, prec):
    man, exp = x.mid().man_exp()
    return gmpy2.mul_2exp(gmpy2.mpfr(int(man), prec), int(exp))


def _flint_roots(p, prec):
    coeffs = _exact_coeffs(p)
    poly = flint.fmpq_poly([flint.fmpq(c.numerator, c.denominator) for c in reversed(coeffs)])
    old = flint.ctx.prec
    flint.ctx.prec = prec
    try:
        found = poly.complex_roots()
        out = []
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            for r, mult in found:
                re = _arb_mid(r.real, prec)
                # an enclosure straddling zero counts as a real root
                im = r.imag
                if abs(float(im.mid())) <= float(im.rad()):
                    z = gmpy2.mpc(re, 0)
                else:
                    z = gmpy2.mpc(re, _arb_mid(im, prec))
                out.extend([z] * mult)
        return out
    finally:
        flint.ctx.prec = old


def _newton_polygon_start(coeffs, rng):
    """Starting points on circles whose radii come from the upper convex hull
    of ``(k, log|a_k|)`` with ascending coefficients."""
    d = len(coeffs) - 1
    pts = []
    for k in range(d + 1):
        c = coeffs[d - k]
        if c != 0:
            c = abs(Fraction(c))
            pts.append((k, math.log(c.numerator) - math.log(c.denominator)))
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) <= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    starts = []
    lead_zero = pts[0][0] if pts else 0
    starts.extend([0j] * lead_zero)
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        m = x2 - x1
        r = math.exp((y1 - y2) / m)
        for i in range(m):
            th = 2 * math.pi * i / m + 2 * math.pi * len(starts) / d + 0.4 + rng.uniform(-0.1, 0.1) / m
            starts.append(r * complex(math.cos(th), math.sin(th)))
    return starts


def aberth_roots(p, prec=DEFAULT_PREC, tol=1e-20, maxit=500, seed=1):
    """Gauss–Seidel Aberth–Ehrlich iteration in multiprecision complex arithmetic.

    Returns ``(roots, iterations)``; raises :class:`NonConvergence` if some
    correction is still above ``tol`` after ``maxit`` sweeps.
    """
    d = p.degree
    coeffs = _exact_coeffs(p)
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        c = [gmpy2.mpfr(gmpy2.mpq(x.numerator, x.denominator)) for x in coeffs]
        dc = [c[k] * (d - k) for k in range(d)]
        starts = _newton_polygon_start(coeffs, random.Random(seed))
        z = [gmpy2.mpc(s) for s in starts]
        active = [i for i in range(d) if z[i] != 0]
        tolf = gmpy2.mpfr(tol)
        for it in range(1, maxit + 1):
            still = []
            for i in active:
                zi = z[i]
                pv, dv = c[0], dc[0]
                for k in range(1, d):
                    pv = pv * zi + c[k]
                    dv = dv * zi + dc[k]
                pv = pv * zi + c[d]
                if pv == 0:
                    continue
                N = pv / dv
                s = gmpy2.mpc(0)
                for j in range(d):
                    if j != i:
                        s += 1 / (zi - z[j])
                w = N / (1 - N * s)
                z[i] = zi - w
                if abs(w) > tolf * (1 + abs(zi)):
                    still.append(i)
            active = still
            if not active:
                return z, it
        raise NonConvergence(active[0], prec)


def find_roots(p, precision_bits=DEFAULT_PREC, tol=1e-20, maxit=500, method="certified", require_real=True):
    """All roots of ``p``; real ones projected to the real axis.

    Parameters
    ----------
    p : Poly
        Nonconstant polynomial with rational or big float coefficients.
    precision_bits : int
        Working precision of the returned roots.
    tol : float
        Roots with ``|Im| <= tol`` are treated as real.
    maxit : int
        Sweep budget for ``method="aberth"``.
    method : {"certified", "aberth"}
        ``certified`` isolates roots with ball arithmetic (python-flint) and
        handles multiplicities; ``aberth`` runs the simultaneous iteration,
        doubling the precision up to 4096 bits on nonconvergence.
    require_real : bool
        Raise :class:`ComplexRoots` when some root is not real.
    """
    if p.degree < 1:
        raise ValueError("find_roots needs a nonconstant polynomial")
    if method == "certified":
        zs = _flint_roots(p, precision_bits)
        iters, prec = 0, precision_bits
    elif method == "aberth":
        prec = precision_bits
        while True:
            try:
                zs, iters = aberth_roots(p, prec, tol, maxit)
                break
            except NonConvergence:
                if prec >= MAX_PREC:
                    raise
                prec *= 2
    else:
        raise ValueError(f"unknown method {method!r}")
    real, imag_max, n_complex = [], 0.0, 0
    for z in zs:
        im = abs(float(z.imag))
        if im <= tol:
            real.append(BigReal(z.real, prec))
            imag_max = max(imag_max, im)
        else:
            n_complex += 1
    worst = max((abs(float(z.imag)) for z in zs), default=0.0)
    report = RootReport(
        tuple(sorted(real, key=lambda r: r.value)),
        tuple(zs),
        worst if n_complex else imag_max,
        iters,
        prec,
        method,
    )
    if n_complex and require_real:
        raise ComplexRoots(n_complex, report)
    return report


# --------------------------------------------------------------------------
# atomic measures


def _key(x):
    return x.value if isinstance(x, BigReal) else x


@dataclass(frozen=True)
class AtomicMeasure:
    """Sorted weighted atoms; equal locations are merged on construction."""

    atoms: tuple

    def __post_init__(self):
        acc = {}
        for loc, w in self.atoms:
            if not w > 0:
                raise ValueError("weights must be positive")
            k = _key(loc)
            acc[k] = (acc[k][0], acc[k][1] + w) if k in acc else (loc, w)
        atoms = tuple(sorted(acc.values(), key=lambda a: _key(a[0])))
        object.__setattr__(self, "atoms", atoms)

    @property
    def total_mass(self):
        return sum((w for _, w in self.atoms), Fraction(0))

    @property
    def locations(self):
        return [a[0] for a in self.atoms]

    @property
    def weights(self):
        return [a[1] for a in self.atoms]

    def moment(self, j):
        return sum((w * x**j for x, w in self.atoms), Fraction(0))

    def __len__(self):
        return len(self.atoms)


def erm(roots):
    """Empirical root measure: weight ``1/d`` per root, multiplicities merged."""
    roots = list(roots.roots if isinstance(roots, RootReport) else roots)
    if not roots:
        raise ValueError("empty root list")
    w = Fraction(1, len(roots))
    return AtomicMeasure(tuple((r, w) for r in roots))


def dilate_measure(mu, alpha):
    """Push forward by ``t -> alpha t``."""
    if alpha == 0:
        raise ValueError("dilation factor must be nonzero")
    return AtomicMeasure(tuple((alpha * x, w) for x, w in mu.atoms))


def sqrt_symmetrize(mu, prec=DEFAULT_PREC):
    """Symmetrized square root: each atom ``(x, w)`` becomes ``(±sqrt x, w/2)``."""
    out = []
    for x, w in mu.atoms:
        if x < 0:
            raise ValueError(f"negative location {x} has no real square root")
        r = exact_sqrt(x, prec)
        out.extend([(r, w / 2), (-r, w / 2)])
    return AtomicMeasure(tuple(out))


def square_pushforward(mu):
    """Push forward by ``t -> t^2``."""
    return AtomicMeasure(tuple((x * x, w) for x, w in mu.atoms))


def radon_t2(mu, d):
    """Reweight ``(x, w) -> (x, d x^2 w)``; atoms of zero mass are dropped."""
    return RadonAtoms(tuple((x, d * x * x * w) for x, w in mu.atoms if x != 0))


def radon_t(mu, d):
    """Reweight ``(x, w) -> (x, d x w)`` for measures on ``[0, inf)``."""
    if any(x < 0 for x, _ in mu.atoms):
        raise ValueError("radon_t needs nonnegative locations")
    return RadonAtoms(tuple((x, d * x * w) for x, w in mu.atoms if x != 0))


# --------------------------------------------------------------------------
# reference laws


@dataclass(frozen=True)
class Semicircle:
    """Semicircle law with mean ``center`` and variance ``variance`` (standard: 0, 1)."""

    center: float = 0.0
    variance: float = 1.0

    def cdf(self, x):
        if self.variance == 0:
            return 1.0 if x >= self.center else 0.0
        y = (x - self.center) / math.sqrt(self.variance)
        if y <= -2:
            return 0.0
        if y >= 2:
            return 1.0
        return 0.5 + y * math.sqrt(4 - y * y) / (4 * math.pi) + math.asin(y / 2) / math.pi

    def r_transform(self, z):
        return self.center + self.variance * z


@dataclass(frozen=True)
class MarchenkoPastur:
    """Free Poisson law with rate ``c >= 1`` pushed forward by ``t -> scale t``.

    With ``scale = 1`` the density is ``sqrt(4c - (x-1-c)^2) / (2 pi x)``.
    """

    rate: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.rate < 1:
            raise UnsupportedCdf("rates below 1 carry an atom at 0 and are not modelled")
        if self.scale == 0:
            raise ValueError("scale must be nonzero")

    def _antiderivative(self, x, a, b):
        s = math.sqrt(max((b - x) * (x - a), 0.0))
        u = max(-1.0, min(1.0, (2 * x - a - b) / (b - a)))
        out = s + (a + b) / 2 * math.asin(u)
        if a > 0:
            v = max(-1.0, min(1.0, ((a + b) * x - 2 * a * b) / (x * (b - a))))
            out -= math.sqrt(a * b) * math.asin(v)
        return out

    def _cdf_unit(self, y):
        c = self.rate
        a, b = (1 - math.sqrt(c)) ** 2, (1 + math.sqrt(c)) ** 2
        if y <= a:
            return 0.0
        if y >= b:
            return 1.0
        val = (self._antiderivative(y, a, b) - self._antiderivative(a, a, b)) / (2 * math.pi)
        return min(1.0, max(0.0, val))

    def cdf(self, x):
        y = x / self.scale
        if self.scale > 0:
            return self._cdf_unit(y)
        return 1.0 - self._cdf_unit(y)

    def density(self, x):
        y = x / self.scale
        c = self.rate
        q = 4 * c - (y - 1 - c) ** 2
        if q <= 0 or y <= 0:
            return 0.0
        return math.sqrt(q) / (2 * math.pi * y) / abs(self.scale)

    def r_transform(self, z):
        return self.rate * self.scale / (1 - self.scale * z)


@dataclass(frozen=True)
class Cauchy:
    """Standard Cauchy law."""

    def cdf(self, x):
        return 0.5 + math.atan(x) / math.pi


@dataclass(frozen=True)
class RectGaussian:
    """Symmetrized square root of ``MP(rate 1/lam)`` pushed forward by ``t -> lam t``.

    ``scale`` dilates the result, so its rectangular R-transform is
    ``scale^2 z``.
    """

    lam: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.lam <= 1:
            raise ValueError("lam must lie in (0, 1]")

    def cdf(self, x):
        y = x / self.scale
        inner = MarchenkoPastur(1 / self.lam, self.lam)
        half = 0.5 * inner.cdf(y * y)
        return 0.5 + half if y >= 0 else 0.5 - half

    def c_transform(self, z):
        return self.scale**2 * z


@dataclass(frozen=True)
class FreeIdAtomic:
    """Freely infinitely divisible law with data ``(gamma, sigma2, nu)``, ``nu`` atomic."""

    gamma: object
    sigma2: object
    nu: object

    def r_transform(self, z):
        return r_transform_eval(self, z)

    def _reduce(self):
        atoms = list(self.nu.atoms)
        g, s2 = float(self.gamma), float(self.sigma2)
        if not atoms:
            return Semicircle(g, s2)
        if len(atoms) == 1 and s2 == 0:
            t, m = float(atoms[0][0]), float(atoms[0][1])
            shift = g - m * t / (1 + t * t)
            return _Shifted(MarchenkoPastur(m, t), shift)
        raise UnsupportedCdf("CDF needs free convolution of several components")

    def cdf(self, x):
        return self._reduce().cdf(x)


@dataclass(frozen=True)
class _Shifted:
    law: object
    shift: float

    def cdf(self, x):
        return self.law.cdf(x - self.shift)


@dataclass(frozen=True)
class RectIdAtomic:
    """Rectangular ``⊞_lam`` infinitely divisible law given by its atomic measure ``G``."""

    lam: object
    G: object

    def c_transform(self, z):
        return c_transform_eval(self, z)

    def cdf(self, x):
        atoms = list(self.G.atoms)
        if len(atoms) == 1 and atoms[0][0] == 0:
            return RectGaussian(float(self.lam), math.sqrt(float(atoms[0][1]))).cdf(x)
        raise UnsupportedCdf("CDF only available for the rectangular Gaussian case")


def cdf(law, x):
    return law.cdf(x)


def kolmogorov_distance(mu, law):
    """Sup-distance between the CDF of ``mu`` and ``law``.

    Both one-sided limits of the empirical CDF are compared at every atom,
    which attains the supremum since the empirical CDF is a step function.
    """
    total = mu.total_mass
    cum = Fraction(0)
    worst = 0.0
    for x, w in mu.atoms:
        F = law.cdf(float(x))
        left = float(cum / total)
        cum += w
        right = float(cum / total)
        worst = max(worst, abs(F - left), abs(F - right))
    return worst


def cdf_table(mu, law=None):
    """Rows ``(location, weight, F_emp, F_ref)`` for CSV emission."""
    rows, cum = [], Fraction(0)
    total = mu.total_mass
    for x, w in mu.atoms:
        cum += w
        ref = law.cdf(float(x)) if law is not None else float("nan")
        rows.append((float(x), float(w), float(cum / total), ref))
    return rows


# --------------------------------------------------------------------------
# transforms


def r_transform_eval(law, z, tol=1e-12):
    """``gamma + sigma2 z + sum m (z+t)/(1-zt) t^2/(t^2+1)`` over the atoms of ``nu``."""
    out = law.gamma + law.sigma2 * z
    for t, m in law.nu.atoms:
        den = 1 - z * t
        if abs(den) < tol:
            raise PoleError(f"z={z} is within {tol} of the pole 1/{t}")
        out = out + m * (z + t) / den * t * t / (t * t + 1)
    return out


def c_transform_eval(law, z, tol=1e-12):
    """``z sum m (t^2+1)/(1 - z t^2)`` over the atoms of ``G``."""
    out = 0
    for t, m in law.G.atoms:
        den = 1 - z * t * t
        if abs(den) < tol:
            raise PoleError(f"z={z} is within {tol} of a pole")
        out = out + m * (t * t + 1) / den
    return z * out


def rect_C_numeric(mu, lam, z, max_doublings=60, iters=200):
    """Rectangular R-transform of a symmetric atomic measure at small negative ``z``.

    ``H(w) = w (lam M(w) + 1)(M(w) + 1)`` with ``M`` the moment series of the
    pushforward of ``mu`` by ``t -> t^2`` is inverted by bisection on an
    interval ``(w_lo, 0)`` on which it is increasing, then
    ``C(z) = U(z / H^-1(z) - 1)``.
    """
    z = float(z)
    lam = float(lam)
    if not z < 0:
        raise BracketError("z must be negative")
    sq = [(float(x) ** 2, float(w)) for x, w in mu.atoms]

    def M(w):
        return sum(m * w * t / (1 - w * t) for t, m in sq)

    def H(w):
        mw = M(w)
        return w * (lam * mw + 1) * (mw + 1)

    # walk outwards from 0 while H stays increasing, until H(lo) < z
    step = max(abs(z) / 4, 1e-12)
    lo, h_prev, w_prev = -step, H(-step), 0.0
    for _ in range(max_doublings):
        if h_prev < z:
            break
        w_next = lo * 2
        h_next = H(w_next)
        if not h_next < h_prev:
            raise BracketError(f"H stops decreasing before reaching {z}")
        w_prev, lo, h_prev = lo, w_next, h_next
    else:
        raise BracketError(f"no bracket for z={z}")
    hi = w_prev
    for _ in range(iters):
        mid = (lo + hi) / 2
        if H(mid) < z:
            lo = mid
        else:
            hi = mid
    w = (lo + hi) / 2
    y = z / w - 1
    return (-lam - 1 + math.sqrt((lam + 1) ** 2 + 4 * lam * y)) / (2 * lam)
