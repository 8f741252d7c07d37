"""Monte Carlo checks of the random matrix descriptions of the convolutions.

Sample means of characteristic polynomial coefficients are compared with
exact targets from :mod:`finfree.convolve` and :mod:`finfree.poly_core`.

Randomness: the seed feeds ``numpy.random.SeedSequence``; batch ``b`` uses
the ``b``-th spawned child. Batches have a fixed size, so results do not
depend on how batches are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .convolve import boxplus, rect_boxplus
from .poly_core import MonicPoly, apply_Mn_power_normalized, normalized_derivative

__all__ = [
    "McReport",
    "haar_orthogonal",
    "haar_batch",
    "charpoly_exact",
    "mc_boxplus",
    "mc_compression",
    "mc_rect_compression",
    "mc_rect_boxplus",
    "BATCH",
]

BATCH = 10_000
ROUNDING_FLOOR = 1e-12


@dataclass
class McReport:
    """Per-coefficient Monte Carlo summary.

    Coefficient lists skip the leading 1 and run over ``c_1..c_d``.
    """

    check: str
    mean: list
    standard_error: list
    variance: list
    target: list
    z_score: list
    samples: int
    seed: int
    params: dict = field(default_factory=dict)

    @property
    def max_abs_z(self):
        return max((abs(z) for z in self.z_score), default=0.0)

    @property
    def zero_variance(self):
        return all(v == 0.0 for v in self.variance)

    def to_json(self):
        return {
            "check": self.check,
            "params": {k: str(v) for k, v in self.params.items()},
            "samples": self.samples,
            "seed": self.seed,
            "mean": self.mean,
            "standard_error": self.standard_error,
            "variance": self.variance,
            "target": self.target,
            "z_score": self.z_score,
            "max_abs_z": self.max_abs_z,
            "zero_variance": self.zero_variance,
        }


def haar_orthogonal(dim, rng):
    """Haar orthogonal matrix from a sign-corrected QR of a Gaussian matrix."""
    return haar_batch(1, dim, rng)[0]


def haar_batch(count, dim, rng):
    g = rng.standard_normal((count, dim, dim))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diagonal(r, axis1=1, axis2=2))
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def _charpoly_from_eigs(eigs):
    """Descending coefficients of ``prod (x - e_i)`` for each row of ``eigs``."""
    count, d = eigs.shape
    c = np.zeros((count, d + 1))
    c[:, 0] = 1.0
    for i in range(d):
        c[:, 1 : i + 2] = c[:, 1 : i + 2] - eigs[:, i : i + 1] * c[:, 0 : i + 1]
    return c


def charpoly_exact(M):
    """Exact characteristic polynomial by the Faddeev–LeVerrier recursion.

    Entries are converted with ``Fraction(float)``, i.e. exactly.
    """
    rows = [[Fraction(x) if not isinstance(x, Fraction) else x for x in row] for row in np.asarray(M, dtype=object)]
    n = len(rows)
    ident = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    def matmul(X, Y):
        return [[sum((X[i][k] * Y[k][j] for k in range(n)), Fraction(0)) for j in range(n)] for i in range(n)]

    coeffs = [Fraction(1)]
    Mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I, c_k = -tr(A M_k)/k
        prev = coeffs[-1]
        Mk = matmul(rows, Mk)
        Mk = [[Mk[i][j] + prev * ident[i][j] for j in range(n)] for i in range(n)]
        AM = matmul(rows, Mk)
        coeffs.append(-sum((AM[i][i] for i in range(n)), Fraction(0)) / k)
    return MonicPoly(coeffs)


def _exact_matrix(M):
    return [[Fraction(float(x)) for x in row] for row in np.asarray(M, dtype=float)]


def _exact_gram(M):
    rows = _exact_matrix(M)
    n = len(rows)
    return [[sum((rows[i][k] * rows[j][k] for k in range(len(rows[0]))), Fraction(0)) for j in range(n)] for i in range(n)]


class _Accumulator:
    """Chan-style pooled mean and centred sum of squares.

    Each batch is centred on its first sample, so a batch of identical
    values yields exactly zero spread.
    """

    def __init__(self, width):
        self.n = 0
        self.mean = np.zeros(width)
        self.m2 = np.zeros(width)

    def add(self, x):
        nb = x.shape[0]
        ref = x[0]
        mb = ref + (x - ref).mean(axis=0)
        m2b = ((x - mb) ** 2).sum(axis=0)
        if self.n == 0:
            self.n, self.mean, self.m2 = nb, mb, m2b
            return
        tot = self.n + nb
        delta = mb - self.mean
        self.mean = self.mean + delta * (nb / tot)
        self.m2 = self.m2 + m2b + delta**2 * (self.n * nb / tot)
        self.n = tot

    @property
    def variance(self):
        return self.m2 / (self.n - 1) if self.n > 1 else np.zeros_like(self.m2)


def _run(check, sampler, target, samples, seed, params):
    coeffs = [float(c) for c in target.coeffs[1:]]
    acc = _Accumulator(len(coeffs))
    batches = -(-int(samples) // BATCH)
    children = np.random.SeedSequence(int(seed)).spawn(batches)
    left = int(samples)
    for child in children:
        size = min(BATCH, left)
        left -= size
        rng = np.random.default_rng(child)
        eigs = sampler(size, rng)
        acc.add(_charpoly_from_eigs(eigs)[:, 1:])
    var = acc.variance
    se = np.sqrt(var / acc.n)
    z = []
    for m, s, t in zip(acc.mean, se, coeffs):
        # coefficients fixed by the construction (e.g. the trace) have a
        # spread at rounding level, so the error gets a rounding floor
        s = max(float(s), ROUNDING_FLOOR * (1 + abs(t)))
        z.append(float((m - t) / s))
    return McReport(
        check,
        [float(x) for x in acc.mean],
        [float(x) for x in se],
        [float(x) for x in var],
        coeffs,
        z,
        acc.n,
        int(seed),
        params,
    )


def _symmetric(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.array_equal(A, A.T):
        raise ValueError("expected a real symmetric square matrix")
    return A


def mc_boxplus(A, B, samples=200_000, seed=42):
    """Compare ``E char(A + O^T B O)`` with ``char(A) ⊞_d char(B)``."""
    A, B = _symmetric(A), _symmetric(B)
    d = A.shape[0]
    if B.shape != A.shape:
        raise ValueError("A and B must have the same shape")
    target = boxplus(charpoly_exact(_exact_matrix(A)), charpoly_exact(_exact_matrix(B)))

    def sampler(size, rng):
        O = haar_batch(size, d, rng)
        M = A[None] + np.transpose(O, (0, 2, 1)) @ B[None] @ O
        return np.linalg.eigvalsh(M)

    return _run("boxplus", sampler, target, samples, seed, {"d": d})


def mc_compression(A, ell, samples=200_000, seed=42):
    """Compare ``E char(O A O^T)`` (``O`` = first ``ell`` rows of a Haar matrix)
    with ``(ell!/d!) D^(d-ell) char(A)``."""
    A = _symmetric(A)
    d = A.shape[0]
    if not 1 <= ell < d:
        raise ValueError("need 1 <= ell < d")
    target = normalized_derivative(charpoly_exact(_exact_matrix(A)), ell)

    def sampler(size, rng):
        O = haar_batch(size, d, rng)[:, :ell, :]
        M = O @ A[None] @ np.transpose(O, (0, 2, 1))
        return np.linalg.eigvalsh(M)

    return _run("compress", sampler, target, samples, seed, {"d": d, "ell": ell})


def _rect_shape(A, n):
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    if A.ndim != 2 or A.shape[1] != d + n:
        raise ValueError(f"expected a d x (d+n) matrix with n={n}")
    return A, d


def mc_rect_compression(A, ell, n, samples=200_000, seed=42):
    """Compare ``E char((U A O)(U A O)^T)`` with ``M_n^(d-ell) char(A A^T)`` normalized.

    ``U`` is ``ell x d`` with orthonormal rows and ``O`` is
    ``(d+n) x (ell+n)`` with orthonormal columns.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be a nonnegative integer")
    A, d = _rect_shape(A, n)
    if not 1 <= ell < d:
        raise ValueError("need 1 <= ell < d")
    p = charpoly_exact(_exact_gram(A))
    target = apply_Mn_power_normalized(p, n, d - ell)

    def sampler(size, rng):
        U = haar_batch(size, d, rng)[:, :ell, :]
        O = haar_batch(size, d + n, rng)[:, :, : ell + n]
        C = U @ A[None] @ O
        return np.linalg.eigvalsh(C @ np.transpose(C, (0, 2, 1)))

    return _run("rect-compress", sampler, target, samples, seed, {"d": d, "ell": ell, "n": n})


def mc_rect_boxplus(A, B, n, samples=200_000, seed=42):
    """Compare ``E char((A + U B O)(A + U B O)^T)`` with ``char(AA^T) ⊞_{d,n} char(BB^T)``."""
    n = int(n)
    if n < 0:
        raise ValueError("n must be a nonnegative integer")
    A, d = _rect_shape(A, n)
    B, d2 = _rect_shape(B, n)
    if d2 != d:
        raise ValueError("A and B must have the same shape")
    target = rect_boxplus(charpoly_exact(_exact_gram(A)), charpoly_exact(_exact_gram(B)), n)

    def sampler(size, rng):
        U = haar_batch(size, d, rng)
        O = haar_batch(size, d + n, rng)
        C = A[None] + U @ B[None] @ O
        return np.linalg.eigvalsh(C @ np.transpose(C, (0, 2, 1)))

    return _run("rect-boxplus", sampler, target, samples, seed, {"d": d, "n": n})
