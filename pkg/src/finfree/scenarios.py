"""Scenario catalog behind ``finfree run``.

Each scenario reads a flat parameter mapping (strings, as they come from a
config file), computes its metrics in degree order and returns a
:class:`Verdict`. Gates are checked against thresholds that live in the
same parameter mapping, so every tolerance can be audited and overridden
from a config file.

Wall-clock runtime is measured but kept out of the verdict body; only the
boolean outcome of a runtime limit enters it. This keeps verdicts
byte-identical across reruns.
"""

from __future__ import annotations

import csv
import json
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import gmpy2
import numpy as np

from .appell import (
    LaguerrePolyaData,
    LpiData,
    appell_poly,
    jensen_poly,
    laguerre,
    laguerre_appell,
    levy_data,
    lp_series,
    lpi_series,
    normalized_appell,
    normalized_laguerre_appell,
    rect_levy_data,
)
from .convolve import (
    boxplus,
    boxplus_via_operators,
    rect_boxplus,
    rect_boxplus_factorial,
    rect_boxplus_via_operators,
)
from .cumulants import (
    TruncatedSeries,
    cumulant_flow_check,
    derivative_flow_R_identity_check,
    finite_R,
    log_derivative,
    mn_flow_R_identity_check,
    moment,
    rect_finite_R,
)
from .matrix_oracle import mc_boxplus, mc_compression, mc_rect_boxplus, mc_rect_compression
from .measures import (
    Cauchy,
    MarchenkoPastur,
    RectIdAtomic,
    Semicircle,
    c_transform_eval,
    cdf_table,
    erm,
    find_roots,
    kolmogorov_distance,
    radon_t,
    radon_t2,
    rect_C_numeric,
    sqrt_symmetrize,
)
from .poly_core import (
    MonicPoly,
    apply_Mn,
    apply_Mn_power_normalized,
    differentiate,
    dilate,
    normalized_derivative,
)

__all__ = ["SCENARIOS", "DEFAULTS", "ScenarioConfig", "Verdict", "run", "write_outputs"]

FLOAT_DIGITS = 12


# --------------------------------------------------------------------------
# configuration and verdicts


DEFAULTS = {
    "exact-suite": {
        "count": "100",
        "max_degree": "12",
        "ns": "0, 1/2, 1, 3",
        "root_range": "5",
        "seed": "0",
        "time_limit": "120",
    },
    "hermite-semicircle": {
        "degrees": "100, 200, 400",
        "precision_bits": "256",
        "ks_max": "0.05",
        "time_limit": "60",
    },
    "cosine-cauchy": {
        "degrees": "100, 500",
        "precision_bits": "256",
        "ks_tol": "1e-10",
        "time_limit": "30",
    },
    "mp-from-f": {
        "degrees": "100, 200, 300",
        "precision_bits": "256",
        "ks_max": "0.06",
        "scale": "2",
        "scale_degrees": "100, 200",
        "time_limit": "120",
    },
    "appell-domain": {
        "max_degree": "200",
        "max_ell": "5",
        "two_root_degrees": "50, 100, 200",
        "two_root_ell": "3",
    },
    "mn-laguerre": {
        "degrees": "100, 200",
        "n": "1",
        "ell": "3",
        "err_max": "0.05",
        "rate_max": "0.6",
    },
    "mn-flow": {
        "count": "20",
        "max_degree": "10",
        "root_range": "6",
        "seed": "0",
        "n_small": "1000",
        "n_large": "2000",
        "gap_ratio_max": "0.55",
        "lag_degrees": "100, 200",
        "lag_n": "1",
        "lag_ell": "3",
        "mp_degrees": "400, 1600",
        "mp_alpha": "1",
        "fract_degree": "40",
        "fract_t": "1/2",
        "fract_n": "1",
        "precision_bits": "256",
    },
    "rect-id": {
        "sigma2": "1",
        "roots_sq": "1, 4",
        "max_degree": "30",
        "ns": "0, 1",
        "transform_degree": "200",
        "z_grid": "-0.05, -0.04, -0.03, -0.02, -0.01",
        "transform_tol": "1e-3",
        "window_degree": "200",
        "window_halfwidth": "0.25",
        "domain_max_degree": "100",
        "domain_max_ell": "5",
        "precision_bits": "256",
    },
    "point-process": {
        "degrees": "200, 400",
        "c": "0",
        "sigma2": "1",
        "roots": "1, -2",
        "window_halfwidth": "0.2",
        "window_tol": "0.02",
        "precision_bits": "256",
    },
    "mc-oracle": {
        "samples": "200000",
        "seed": "42",
        "z_max": "4",
        "time_limit": "300",
    },
    "heavy-tail-explore": {
        "degree": "200",
        "f": "cos",
        "c": "0",
        "sigma2": "0",
        "roots": "",
        "rho": "0",
        "x_min": "-4",
        "x_max": "4",
        "x_count": "17",
        "y": "1",
        "precision_bits": "256",
    },
}

SCENARIOS = tuple(DEFAULTS)


def _split(s):
    return [t.strip() for t in str(s).split(",") if t.strip()]


def _frac_list(s):
    return [Fraction(t) for t in _split(s)]


def _int_list(s):
    return [int(t) for t in _split(s)]


def _float_list(s):
    return [float(t) for t in _split(s)]


@dataclass
class ScenarioConfig:
    """Validated parameters of one scenario run."""

    scenario: str
    params: dict
    out_dir: Path | None = None

    def __post_init__(self):
        if self.scenario not in DEFAULTS:
            raise ValueError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        merged = dict(DEFAULTS[self.scenario])
        for k, v in self.params.items():
            if k not in merged:
                raise ValueError(f"unknown key {k!r} for scenario {self.scenario}")
            merged[k] = str(v)
        self.params = merged
        for k, v in merged.items():
            if k == "degrees" or k.endswith("_degrees"):
                ds = _int_list(v)
                if not ds or any(x < 1 for x in ds) or any(a >= b for a, b in zip(ds, ds[1:])):
                    raise ValueError(f"{k} must be positive and strictly increasing, got {v!r}")

    def int(self, key):
        return int(self.params[key])

    def float(self, key):
        return float(self.params[key])

    def frac(self, key):
        return Fraction(self.params[key])

    def ints(self, key):
        return _int_list(self.params[key])

    def fracs(self, key):
        return _frac_list(self.params[key])

    def floats(self, key):
        return _float_list(self.params[key])


@dataclass
class Verdict:
    """Outcome of a scenario: gates, metrics and emitted tables."""

    scenario: str
    config: dict
    gates: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self):
        return all(g["passed"] for g in self.gates)

    def gate(self, name, value, threshold, relation, passed=None):
        """Record a gate; ``relation`` is a readable comparison such as ``"<="``."""
        if passed is None:
            passed = _compare(value, threshold, relation)
        self.gates.append(
            {"name": name, "value": value, "threshold": threshold, "relation": relation, "passed": bool(passed)}
        )
        return bool(passed)

    def to_json(self):
        body = {
            "scenario": self.scenario,
            "pass": self.passed,
            "config": dict(self.config),
            "gates": self.gates,
            "metrics": self.metrics,
        }
        return _canonical(body)

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


def _compare(value, threshold, relation):
    if relation == "<=":
        return value <= threshold
    if relation == "<":
        return value < threshold
    if relation == "==":
        return value == threshold
    if relation == ">=":
        return value >= threshold
    raise ValueError(f"unknown relation {relation!r}")


def _canonical(x):
    """Make ``x`` JSON-ready with floats at a fixed number of significant digits."""
    if isinstance(x, dict):
        return {str(k): _canonical(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_canonical(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    v = float(x)
    if math.isnan(v) or math.isinf(v):
        return str(v)
    return float(f"{v:.{FLOAT_DIGITS}g}")


def write_outputs(verdict, out_dir):
    """Write the verdict JSON, one CSV per table and a timing sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    vpath = out / f"{verdict.scenario}.verdict.json"
    vpath.write_text(verdict.dumps())
    paths.append(vpath)
    for tag, (header, rows) in sorted(verdict.tables.items()):
        path = out / f"{verdict.scenario}_{tag}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([_csv_cell(v) for v in row])
        paths.append(path)
    tpath = out / f"{verdict.scenario}.timing.json"
    tpath.write_text(json.dumps({"scenario": verdict.scenario, "runtime_s": round(verdict.runtime, 3)}) + "\n")
    paths.append(tpath)
    return paths


def _csv_cell(v):
    if isinstance(v, float):
        return f"{v:.{FLOAT_DIGITS}g}"
    return str(v)


def run(scenario, params=None):
    """Run ``scenario`` with parameter overrides ``params`` and return its verdict."""
    cfg = scenario if isinstance(scenario, ScenarioConfig) else ScenarioConfig(scenario, dict(params or {}))
    v = Verdict(cfg.scenario, dict(cfg.params))
    t0 = time.perf_counter()
    _RUNNERS[cfg.scenario](cfg, v)
    v.runtime = time.perf_counter() - t0
    if "time_limit" in cfg.params:
        limit = cfg.float("time_limit")
        # only the boolean enters the verdict body
        v.gates.append(
            {
                "name": "runtime_within_limit",
                "value": v.runtime < limit,
                "threshold": limit,
                "relation": "seconds",
                "passed": v.runtime < limit,
            }
        )
    return v


# --------------------------------------------------------------------------
# helpers


def _roots(p, prec):
    return find_roots(p, precision_bits=prec).roots


def _ks_table(roots, law):
    mu = erm(roots)
    return mu, kolmogorov_distance(mu, law), cdf_table(mu, law)


CDF_HEADER = ("location", "weight", "F_empirical", "F_reference")


def _strictly_decreasing(xs):
    return all(a > b for a, b in zip(xs, xs[1:]))


def _max_abs(xs, ys):
    return max((abs(x - y) for x, y in zip(xs, ys)), default=Fraction(0))


def _cosine_series(order):
    coeffs = [Fraction(0)] * (order + 1)
    for k in range(0, order + 1, 2):
        coeffs[k] = Fraction((-1) ** (k // 2), math.factorial(k))
    return TruncatedSeries(coeffs, order)


def _random_poly(rng, d, lo, hi):
    return MonicPoly.from_roots([rng.randint(lo, hi) for _ in range(d)])


# --------------------------------------------------------------------------
# exact-suite


def _exact_suite(cfg, v):
    rng = random.Random(cfg.int("seed"))
    count, max_d, rr = cfg.int("count"), cfg.int("max_degree"), cfg.int("root_range")
    ns = cfg.fracs("ns")
    worst = {
        "finite_R_derivative_flow": Fraction(0),
        "rect_R_Mn_flow": Fraction(0),
        "K_invariance_Mn_flow": Fraction(0),
        "scaled_cumulant_Mn_flow": Fraction(0),
        "boxplus_mutual_oracle": Fraction(0),
        "rect_boxplus_mutual_oracle": Fraction(0),
        "rect_boxplus_fractional_vs_integer": Fraction(0),
        "R_additivity": Fraction(0),
        "rect_R_additivity": Fraction(0),
        "appell_recurrence": Fraction(0),
        "laguerre_appell_recurrence": Fraction(0),
    }
    square_factor_exact, square_factor_total = 0, 0
    checks = 0
    degrees = []

    def bump(key, val):
        nonlocal checks
        checks += 1
        if val > worst[key]:
            worst[key] = val

    for _ in range(count):
        d = rng.randint(1, max_d)
        degrees.append(d)
        p = _random_poly(rng, d, -rr, rr)
        q = _random_poly(rng, d, -rr, rr)
        # nonnegative roots for the rectangular side
        pr = _random_poly(rng, d, 0, rr)
        qr = _random_poly(rng, d, 0, rr)
        for j in range(d):
            bump("finite_R_derivative_flow", derivative_flow_R_identity_check(p, j).max_discrepancy)
        bump("boxplus_mutual_oracle", _max_abs(boxplus(p, q).coeffs, boxplus_via_operators(p, q).coeffs))
        r = finite_R(boxplus(p, q))
        bump("R_additivity", _max_abs(r.coeffs, (finite_R(p) + finite_R(q)).coeffs))
        for n in ns:
            for j in range(d):
                bump("rect_R_Mn_flow", mn_flow_R_identity_check(pr, n, j).max_discrepancy)
                k_inv, kappa, kappa_sq = cumulant_flow_check(pr, n, j)
                bump("K_invariance_Mn_flow", k_inv.max_discrepancy)
                bump("scaled_cumulant_Mn_flow", kappa.max_discrepancy)
                square_factor_total += 1
                square_factor_exact += kappa_sq.exact
            rb = rect_boxplus(pr, qr, n)
            bump("rect_boxplus_mutual_oracle", _max_abs(rb.coeffs, rect_boxplus_via_operators(pr, qr, n).coeffs))
            if n.denominator == 1:
                bump("rect_boxplus_fractional_vs_integer", _max_abs(rb.coeffs, rect_boxplus_factorial(pr, qr, n).coeffs))
            rr_sum = rect_finite_R(pr, n) + rect_finite_R(qr, n)
            bump("rect_R_additivity", _max_abs(rect_finite_R(rb, n).coeffs, rr_sum.coeffs))
        # Appell recurrences on random Laguerre–Pólya data
        data = LaguerrePolyaData(
            Fraction(rng.randint(-3, 3)),
            Fraction(rng.randint(0, 2)),
            tuple(rng.choice([x for x in range(-rr, rr + 1) if x]) for _ in range(rng.randint(0, 3))),
        )
        f = lp_series(data, d)
        lhs = differentiate(appell_poly(f, d)).coeffs
        rhs = [d * c for c in appell_poly(f, d - 1).coeffs]
        bump("appell_recurrence", _max_abs(lhs, rhs))
        g = lpi_series(LpiData(Fraction(rng.randint(0, 2)), tuple(Fraction(rng.randint(1, rr)) for _ in range(2))), d)
        for n in ns:
            lhs = apply_Mn(laguerre_appell(g, d, n), n).coeffs
            rhs = [d * (n + d) * c for c in laguerre_appell(g, d - 1, n).coeffs]
            bump("laguerre_appell_recurrence", _max_abs(lhs, rhs))

    for key, val in worst.items():
        v.gate(f"{key}_max_discrepancy", val, 0, "==")
    v.metrics["polynomials"] = count
    v.metrics["identity_checks"] = checks
    v.metrics["degree_max"] = max(degrees)
    v.metrics["degree_histogram"] = {str(d): degrees.count(d) for d in sorted(set(degrees))}
    # the ((d-j)/d)^(2k-1) form of the scaled cumulant flow, reported only
    v.metrics["scaled_cumulant_square_factor_exact_cases"] = square_factor_exact
    v.metrics["scaled_cumulant_square_factor_total_cases"] = square_factor_total


# --------------------------------------------------------------------------
# KS scenarios


def _hermite_semicircle(cfg, v):
    prec = cfg.int("precision_bits")
    gauss = LaguerrePolyaData(0, 1, ())
    ks = []
    for d in cfg.ints("degrees"):
        _, dist, table = _ks_table(_roots(normalized_appell(gauss, d), prec), Semicircle())
        ks.append(dist)
        v.metrics[f"ks_d{d}"] = dist
        v.tables[f"d{d}"] = (CDF_HEADER, table)
    v.gate("ks_at_largest_degree", ks[-1], cfg.float("ks_max"), "<=")
    v.gate("ks_strictly_decreasing", _strictly_decreasing(ks), True, "==")


def _cosine_cauchy(cfg, v):
    prec = cfg.int("precision_bits")
    tol = cfg.float("ks_tol")
    for d in cfg.ints("degrees"):
        p = appell_poly(_cosine_series(d), d)
        roots = _roots(p, prec)
        _, dist, table = _ks_table(roots, Cauchy())
        grid = sorted(1 / math.tan((2 * k + 1) * math.pi / (2 * d)) for k in range(d))
        v.metrics[f"ks_d{d}"] = dist
        v.metrics[f"root_grid_max_error_d{d}"] = max(abs(float(r) - g) / (1 + abs(g)) for r, g in zip(roots, grid))
        v.tables[f"d{d}"] = (CDF_HEADER, table)
        v.gate(f"ks_equals_half_over_d_d{d}", abs(dist - 1 / (2 * d)), tol, "<=")


def _mp_from_f(cfg, v):
    prec = cfg.int("precision_bits")
    ks = []
    for d in cfg.ints("degrees"):
        p = normalized_appell(LaguerrePolyaData(1, 0, (1,)), d)
        _, dist, table = _ks_table(_roots(p, prec), MarchenkoPastur(1))
        ks.append(dist)
        v.metrics[f"ks_d{d}"] = dist
        v.tables[f"d{d}"] = (CDF_HEADER, table)
    v.gate("ks_at_largest_degree", ks[-1], cfg.float("ks_max"), "<=")
    v.gate("ks_strictly_decreasing", _strictly_decreasing(ks), True, "==")
    # f = 1 - a z: rate one, dilated by a
    a = cfg.frac("scale")
    for d in cfg.ints("scale_degrees"):
        p = normalized_appell(LaguerrePolyaData(a, 0, (1 / a,)), d)
        _, dist, table = _ks_table(_roots(p, prec), MarchenkoPastur(1, float(a)))
        v.metrics[f"scale_ks_d{d}"] = dist
        v.tables[f"scale_d{d}"] = (CDF_HEADER, table)


# --------------------------------------------------------------------------
# appell-domain


def _two_root_family(d):
    # roots d and -d/2 plus (d-2)/2 pairs +-x with x^2 = d^2/(d-2)
    if d % 2 or d < 4:
        raise ValueError("the two-root family needs an even degree of at least 4")
    quad = MonicPoly([1, 0, -Fraction(d * d, d - 2)])
    p = MonicPoly.from_roots([d, Fraction(-d, 2)])
    for _ in range((d - 2) // 2):
        p = MonicPoly([c for c in (p * quad).coeffs])
    return p


def _appell_domain(cfg, v):
    max_d, max_ell = cfg.int("max_degree"), cfg.int("max_ell")
    worst, cases = Fraction(0), 0
    for d in range(1, max_d + 1):
        p = MonicPoly([1, -d] + [0] * (d - 1))
        for ell in range(1, min(max_ell, d) + 1):
            target = [1, -ell] + [0] * (ell - 1)
            worst = max(worst, _max_abs(normalized_derivative(p, ell).coeffs, target))
            cases += 1
    v.gate("exact_family_max_coefficient_error", worst, 0, "==")
    v.metrics["exact_family_cases"] = cases
    # the limit (1 - D) x^ell as an Appell polynomial, an independent path
    ell = min(3, max_ell)
    v.metrics["exact_family_limit_is_appell"] = appell_poly(TruncatedSeries([1, -1], 1), ell).coeffs == tuple(
        Fraction(c) for c in [1, -ell] + [0] * (ell - 1)
    )

    ell = cfg.int("two_root_ell")
    data = LaguerrePolyaData(Fraction(1, 2), 1, (1, -2))
    limit = appell_poly(data, ell)
    errors, rows = [], []
    for d in cfg.ints("two_root_degrees"):
        q = normalized_derivative(_two_root_family(d), ell)
        err = float(_max_abs(q.coeffs, limit.coeffs))
        errors.append(err)
        v.metrics[f"two_root_coefficient_error_d{d}"] = err
        rows.append((d, err))
    ds = cfg.ints("two_root_degrees")
    rates = [math.log(errors[i] / errors[i + 1]) / math.log(ds[i + 1] / ds[i]) for i in range(len(ds) - 1) if errors[i + 1] > 0]
    v.metrics["two_root_empirical_order"] = rates
    v.tables["two_root"] = (("degree", "max_coefficient_error"), rows)


# --------------------------------------------------------------------------
# M_n flows


def _p_j(d, n, ell):
    p = MonicPoly.from_roots([1] * d)
    return apply_Mn_power_normalized(p, n, d - ell)


def _mn_laguerre(cfg, v):
    n, ell = cfg.frac("n"), cfg.int("ell")
    target = laguerre(ell, n, monic=True)
    errors = []
    for d in cfg.ints("degrees"):
        q = dilate(_p_j(d, n, ell), d + n).monic()
        err = max(float(abs(a - b) / abs(b)) for a, b in zip(q.coeffs, target.coeffs) if b != 0)
        errors.append(err)
        v.metrics[f"relative_error_d{d}"] = err
    v.gate("relative_error_at_largest_degree", errors[-1], cfg.float("err_max"), "<=")
    ratio = errors[-1] / errors[-2] if len(errors) > 1 and errors[-2] else 0.0
    v.gate("error_ratio_last_two_degrees", ratio, cfg.float("rate_max"), "<=")
    v.metrics["target_monic_laguerre"] = [str(c) for c in target.coeffs]


def _mn_flow(cfg, v):
    prec = cfg.int("precision_bits")
    # rectangular to square degeneration in n
    rng = random.Random(cfg.int("seed"))
    n1, n2 = cfg.int("n_small"), cfg.int("n_large")
    ratios, rows = [], []
    for i in range(cfg.int("count")):
        d = rng.randint(1, cfg.int("max_degree"))
        p = _random_poly(rng, d, 0, cfg.int("root_range"))
        sq = finite_R(p).shift()
        g1 = float(_max_abs(rect_finite_R(p, n1).coeffs, sq.coeffs))
        g2 = float(_max_abs(rect_finite_R(p, n2).coeffs, sq.coeffs))
        ratio = g2 / g1 if g1 else 0.0
        ratios.append(ratio)
        rows.append((i, d, g1, g2, ratio))
    v.tables["rect_to_square"] = (("index", "degree", f"gap_n{n1}", f"gap_n{n2}", "ratio"), rows)
    v.gate("rect_to_square_gap_ratio_max", max(ratios), cfg.float("gap_ratio_max"), "<=")

    # fixed ell and n: R of D_{d+n} p_{j,d} against (n+ell) s
    n, ell = cfg.frac("lag_n"), cfg.int("lag_ell")
    for d in cfg.ints("lag_degrees"):
        R = rect_finite_R(dilate(_p_j(d, n, ell), d + n), n)
        target = [0, n + ell] + [0] * (R.order - 1)
        v.metrics[f"laguerre_regime_R_gap_d{d}"] = float(_max_abs(R.coeffs, target))
    R_lag = rect_finite_R(laguerre(ell, n, monic=True), n)
    v.metrics["laguerre_R_is_linear"] = list(R_lag.coeffs) == [0, n + ell] + [0] * (R_lag.order - 1)

    # ell -> infinity, ell = o(d): n = 0 (MP rate one) and n = alpha ell
    alpha = cfg.frac("mp_alpha")
    for d in cfg.ints("mp_degrees"):
        ell = math.isqrt(d)
        for tag, nn, law in (
            ("mp1", Fraction(0), MarchenkoPastur(1)),
            ("mp_alpha", alpha * ell, MarchenkoPastur(float(1 + alpha), float(1 / (1 + alpha)))),
        ):
            q = dilate(_p_j(d, nn, ell), Fraction(nn + d) / (nn + ell))
            R = rect_finite_R(q, nn)
            head = min(4, R.order)
            target = [0, 1] + [0] * (R.order - 1)
            v.metrics[f"{tag}_R_gap_first{head}_d{d}"] = float(_max_abs(R.coeffs[: head + 1], target[: head + 1]))
            _, dist, table = _ks_table(_roots(q, prec), law)
            v.metrics[f"{tag}_ks_d{d}_ell{ell}"] = dist
            v.tables[f"{tag}_d{d}"] = (CDF_HEADER, table)

    # proportional regime: the finite identity behind the fractional power limit
    d, t, nf = cfg.int("fract_degree"), cfg.frac("fract_t"), cfg.frac("fract_n")
    j = d - int(t * d)
    p = MonicPoly.from_roots([(k % 5) + 1 for k in range(d)])
    rep = mn_flow_R_identity_check(p, nf, j)
    v.metrics["fractional_regime_identity_discrepancy"] = rep.max_discrepancy
    v.metrics["fractional_regime_identity_exact"] = rep.exact


# --------------------------------------------------------------------------
# rect-id


def _neg_s_log_derivative(g, order):
    # -s g'(s)/g(s) to order ``order``
    return log_derivative(g).shift().scale(-1).truncate(order)


def _rect_id(cfg, v):
    prec = cfg.int("precision_bits")
    data = LpiData(cfg.frac("sigma2"), tuple(cfg.fracs("roots_sq")))
    ns = cfg.fracs("ns")
    worst, cases = Fraction(0), 0
    for d in range(1, cfg.int("max_degree") + 1):
        target = _neg_s_log_derivative(lpi_series(data, d + 1), d)
        for n in ns:
            R = rect_finite_R(normalized_laguerre_appell(data, d, n), n)
            worst = max(worst, _max_abs(R.coeffs, target.coeffs))
            cases += 1
    v.gate("rect_R_equals_truncated_series", worst, 0, "==")
    v.metrics["rect_R_cases"] = cases

    d = cfg.int("transform_degree")
    series = _neg_s_log_derivative(lpi_series(data, d + 1), d)
    _, G = rect_levy_data(data, prec=prec)
    law = RectIdAtomic(1, G)
    gaps, rows = [], []
    for z in cfg.floats("z_grid"):
        exact_val = c_transform_eval(law, z)
        trunc = float(series(Fraction(z)))
        gaps.append(abs(float(exact_val) - trunc))
        rows.append((z, float(exact_val), trunc))
    v.gate("c_transform_matches_truncated_series", max(gaps), cfg.float("transform_tol"), "<=")

    # finite-d numerical transform of the symmetrized root measure (n = 0)
    mu = sqrt_symmetrize(erm(_roots(normalized_laguerre_appell(data, d, 0), prec)), prec)
    num = [rect_C_numeric(mu, 1, z) for z, _, _ in rows]
    v.metrics["finite_d_numeric_c_transform_gap"] = max(abs(a - r[1]) for a, r in zip(num, rows))
    v.tables["c_transform"] = (
        ("z", "c_transform", "truncated_series", "finite_d_numeric"),
        [r + (x,) for r, x in zip(rows, num)],
    )

    # d t dmu of L~ = D_{1/(d(n+d))} L_{d,g} against the atoms of G_g, n = 0
    dw, hw = cfg.int("window_degree"), cfg.float("window_halfwidth")
    gg, _ = rect_levy_data(data, prec=prec)
    Lt = dilate(laguerre_appell(data, dw, 0), Fraction(1, dw * dw))
    atoms = radon_t(erm(_roots(Lt, prec)), dw)
    v.metrics["radon_t_total_mass"] = float(atoms.total_mass)
    v.metrics["G_g_total_mass"] = float(gg.total_mass)
    for loc, mass in gg.atoms:
        if loc == 0:
            continue
        x = float(loc)
        v.metrics[f"radon_t_window_{x:g}"] = float(atoms.window_mass(x * (1 - hw), x * (1 + hw)))
        v.metrics[f"G_g_atom_{x:g}"] = float(mass)

    # rectangular domain of attraction: p_d = x^d - d(n+d) x^(d-1)
    worst, cases = Fraction(0), 0
    for n in ns:
        for d in range(1, cfg.int("domain_max_degree") + 1):
            p = MonicPoly([1, -d * (n + d)] + [0] * (d - 1))
            for ell in range(1, min(cfg.int("domain_max_ell"), d) + 1):
                got = apply_Mn_power_normalized(p, n, d - ell)
                target = [1, -ell * (n + ell)] + [0] * (ell - 1)
                worst = max(worst, _max_abs(got.coeffs, target))
                cases += 1
    v.metrics["rect_domain_exact_family_error"] = worst
    v.metrics["rect_domain_exact_family_cases"] = cases


# --------------------------------------------------------------------------
# point-process


def _point_process(cfg, v):
    prec = cfg.int("precision_bits")
    data = LaguerrePolyaData(cfg.frac("c"), cfg.frac("sigma2"), tuple(cfg.fracs("roots")))
    G_f = levy_data(data).G_f
    hw, tol = cfg.float("window_halfwidth"), cfg.float("window_tol")
    degrees = cfg.ints("degrees")
    mass_exact = True
    for d in degrees:
        A = dilate(appell_poly(data, d), Fraction(1, d))
        # exact total mass via Newton identities
        # f = sum gamma_k z^k / k!
        f = lp_series(data, 2)
        g1, g2 = f[1], 2 * f[2]
        expected = g1 * g1 - Fraction(d - 1, d) * g2
        mass = d * moment(A, 2)
        mass_exact = mass_exact and mass == expected
        v.metrics[f"total_mass_exact_d{d}"] = mass
        atoms = radon_t2(erm(_roots(A, prec)), d)
        v.metrics[f"total_mass_from_roots_d{d}"] = float(atoms.total_mass)
        rows = []
        for loc, m in G_f.atoms:
            if loc == 0:
                continue
            x = float(loc)
            got = float(atoms.window_mass(x - hw, x + hw))
            v.metrics[f"window_mass_{x:g}_d{d}"] = got
            rows.append((x, float(m), got))
            if d == degrees[-1]:
                v.gate(f"window_mass_{x:g}", abs(got - float(m)), tol, "<=")
        v.tables[f"windows_d{d}"] = (("atom", "G_f_mass", "window_mass"), rows)
        v.tables[f"atoms_d{d}"] = (("location", "mass"), [(float(x), float(w)) for x, w in atoms.atoms])
    v.gate("total_mass_equals_newton_identity", mass_exact, True, "==")


# --------------------------------------------------------------------------
# mc-oracle


def _mc_oracle(cfg, v):
    samples, seed, zmax = cfg.int("samples"), cfg.int("seed"), cfg.float("z_max")
    rng = np.random.default_rng(seed)
    A5 = np.diag(rng.integers(-3, 6, size=5).astype(float))
    Ar = rng.integers(-2, 3, size=(4, 6)).astype(float)
    Br = rng.integers(-2, 3, size=(4, 6)).astype(float)
    runs = [
        ("boxplus", mc_boxplus(np.diag([1.0, 2, 3, 4]), np.diag([0.0, 0, 1, 1]), samples, seed)),
        ("compress", mc_compression(A5, 2, samples, seed)),
        ("rect_compress", mc_rect_compression(Ar, 2, 2, samples, seed)),
        ("rect_boxplus", mc_rect_boxplus(Ar, Br, 2, samples, seed)),
    ]
    zero = [
        ("boxplus_B_zero", mc_boxplus(np.diag([1.0, 2, 3, 4]), np.zeros((4, 4)), samples, seed)),
        ("compress_A_zero", mc_compression(np.zeros((5, 5)), 2, samples, seed)),
        ("rect_boxplus_B_zero", mc_rect_boxplus(Ar, np.zeros((4, 6)), 2, samples, seed)),
    ]
    rows = []
    for name, rep in runs:
        v.gate(f"{name}_max_abs_z", rep.max_abs_z, zmax, "<=")
        v.metrics[name] = {"mean": rep.mean, "target": rep.target, "z_score": rep.z_score, "standard_error": rep.standard_error}
        for k, (m, t, z) in enumerate(zip(rep.mean, rep.target, rep.z_score), start=1):
            rows.append((name, k, m, t, z))
    for name, rep in zero:
        v.gate(f"{name}_zero_variance", rep.zero_variance, True, "==")
        v.metrics[name] = {"variance": rep.variance, "mean": rep.mean, "target": rep.target}
    v.tables["z_scores"] = (("check", "coefficient", "mean", "target", "z"), rows)


# --------------------------------------------------------------------------
# heavy-tail-explore


def _heavy_tail(cfg, v):
    prec = cfg.int("precision_bits")
    d = cfg.int("degree")
    rho = cfg.float("rho")
    if cfg.params["f"] == "cos":
        f = _cosine_series(d)
    elif cfg.params["f"] == "lp":
        f = lp_series(LaguerrePolyaData(cfg.frac("c"), cfg.frac("sigma2"), tuple(cfg.fracs("roots"))), d)
    else:
        raise ValueError("f must be 'cos' or 'lp'")
    A = appell_poly(f, d)
    J = jensen_poly(f, d)
    dA, dJ = differentiate(A), differentiate(J)
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        scale = gmpy2.mpfr(d) ** gmpy2.mpfr(rho)

        def horner(p, z):
            acc = gmpy2.mpc(0)
            for c in p.coeffs:
                acc = acc * z + gmpy2.mpfr(c.numerator) / c.denominator
            return acc

        xs = np.linspace(cfg.float("x_min"), cfg.float("x_max"), cfg.int("x_count"))
        y = cfg.float("y")
        rows, gap = [], 0.0
        for x in xs:
            z = gmpy2.mpc(float(x), y)
            w = scale / z
            via_jensen = 1 / z - scale / (d * z * z) * horner(dJ, w) / horner(J, w)
            u = z / scale
            direct = horner(dA, u) / horner(A, u) / (d * scale)
            gap = max(gap, float(abs(via_jensen - direct)))
            cauchy = 1 / (complex(x, y) + 1j)
            rows.append(
                (float(x), y, float(via_jensen.real), float(via_jensen.imag), float(direct.real), float(direct.imag), cauchy.real, cauchy.imag)
            )
    v.metrics["jensen_vs_direct_max_gap"] = gap
    if cfg.params["f"] == "cos":
        v.metrics["cauchy_limit_max_gap"] = max(abs(complex(r[2], r[3]) - complex(r[6], r[7])) for r in rows)
    v.tables["cauchy_transform"] = (
        ("x", "y", "re_G_jensen", "im_G_jensen", "re_G_direct", "im_G_direct", "re_cauchy_limit", "im_cauchy_limit"),
        rows,
    )


_RUNNERS = {
    "exact-suite": _exact_suite,
    "hermite-semicircle": _hermite_semicircle,
    "cosine-cauchy": _cosine_cauchy,
    "mp-from-f": _mp_from_f,
    "appell-domain": _appell_domain,
    "mn-laguerre": _mn_laguerre,
    "mn-flow": _mn_flow,
    "rect-id": _rect_id,
    "point-process": _point_process,
    "mc-oracle": _mc_oracle,
    "heavy-tail-explore": _heavy_tail,
}
