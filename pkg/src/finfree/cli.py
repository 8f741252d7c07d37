"""Command line entry point ``finfree``.

Subcommands
-----------
convolve   square or rectangular convolution of two polynomial JSON files
transform  R-transforms and cumulants of a polynomial
appell     Appell and Laguerre–Appell polynomials from Laguerre–Pólya data
measure    roots, KS distance and CDF table of a polynomial's root measure
mc         one Monte Carlo matrix check
run        a named scenario, writing a verdict JSON and CSV tables

Polynomial files use the ``Poly`` JSON layout: ``{"degree", "field",
"coeffs"}`` with descending coefficients stored as strings.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import scenarios
from .appell import (
    LaguerrePolyaData,
    LpiData,
    appell_poly,
    laguerre_appell,
    normalized_appell,
    normalized_laguerre_appell,
)
from .convolve import boxplus, rect_boxplus
from .cumulants import ff_cumulant, finite_R, rect_cumulant_scaled, rect_finite_R
from .matrix_oracle import mc_boxplus, mc_compression, mc_rect_boxplus, mc_rect_compression
from .measures import (
    Cauchy,
    MarchenkoPastur,
    RectGaussian,
    Semicircle,
    cdf_table,
    erm,
    find_roots,
    kolmogorov_distance,
)
from .poly_core import MonicPoly, Poly, format_scalar, parse_scalar

__all__ = ["main", "build_parser", "read_config"]


def read_config(path):
    """Read a flat ``key = value`` file; ``#`` and ``;`` start comments."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    parser.read_string("[config]\n" + Path(path).read_text())
    return dict(parser["config"])


def _load_poly(path):
    return Poly.from_json(json.loads(Path(path).read_text()))


def _emit(obj, out):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _as_monic(p):
    return MonicPoly(p.coeffs) if p.coeffs[0] == 1 else p.monic()


def _field(p, n):
    # a rational n keeps rational polynomials rational
    return parse_scalar(n, p.field, p.precision if p.field == "bigfloat" else None)


# --------------------------------------------------------------------------
# subcommands


def cmd_convolve(args):
    p, q = _as_monic(_load_poly(args.p)), _as_monic(_load_poly(args.q))
    if args.n is None:
        r = boxplus(p, q)
    else:
        r = rect_boxplus(p, q, _field(p, args.n))
    _emit(r.to_json(), args.out)
    return 0


def cmd_transform(args):
    p = _as_monic(_load_poly(args.p))
    n = None if args.n is None else _field(p, args.n)
    if args.what == "R":
        series = finite_R(p) if n is None else rect_finite_R(p, n)
        obj = {"kind": "R" if n is None else "rect_R", "n": args.n, "coeffs": series.to_strings()}
    else:
        if n is None:
            ks = [ff_cumulant(p, j) for j in range(1, p.degree + 1)]
        else:
            ks = [rect_cumulant_scaled(p, k, n) for k in range(1, p.degree + 1)]
        obj = {"kind": "cumulants" if n is None else "rect_cumulants", "n": args.n, "values": [format_scalar(k) for k in ks]}
    _emit(obj, args.out)
    return 0


def cmd_appell(args):
    raw = json.loads(Path(args.data).read_text())
    if args.n is None:
        data = LaguerrePolyaData.from_json(raw)
        p = normalized_appell(data, args.d) if args.normalized else appell_poly(data, args.d)
        included = data.inverse_square_sum()
    else:
        data = LpiData.from_json(raw)
        n = Fraction(args.n)
        p = normalized_laguerre_appell(data, args.d, n) if args.normalized else laguerre_appell(data, args.d, n)
        included = sum((1 / a for a in data.roots_sq), Fraction(0))
    if args.tail_bound is not None:
        tail = Fraction(args.tail_bound)
        report = {
            "included_inverse_square_sum": format_scalar(included),
            "declared_tail_bound": format_scalar(tail),
            "relative_neglected_bound": float(tail / (included + tail)) if included + tail else 0.0,
        }
        sys.stderr.write(json.dumps(report, sort_keys=True) + "\n")
    _emit(p.to_json(), args.out)
    return 0


def _law(text):
    name, _, arg = text.partition(":")
    if name == "semicircle":
        return Semicircle(*(float(x) for x in arg.split(",") if x))
    if name == "mp":
        return MarchenkoPastur(*(float(x) for x in arg.split(",") if x))
    if name == "cauchy":
        return Cauchy()
    if name == "rectgauss":
        return RectGaussian(*(float(x) for x in arg.split(",") if x))
    raise ValueError(f"unknown law {text!r}")


def cmd_measure(args):
    p = _load_poly(args.p)
    report = find_roots(p, precision_bits=args.precision_bits)
    mu = erm(report)
    law = _law(args.law) if args.law else None
    obj = {"degree": p.degree, "roots": [r.to_string() for r in report.roots], "precision_bits": report.precision}
    if law is not None:
        obj["ks"] = kolmogorov_distance(mu, law)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(scenarios.CDF_HEADER)
            w.writerows(cdf_table(mu, law))
    _emit(obj, args.out)
    return 0


def _matrix(path, default):
    if path is None:
        return default
    return np.asarray(json.loads(Path(path).read_text()), dtype=float)


def cmd_mc(args):
    rng = np.random.default_rng(args.seed)
    d, n = args.d, args.n
    if args.check == "boxplus":
        A = _matrix(args.a, np.diag(np.arange(1.0, d + 1)))
        B = _matrix(args.b, np.diag([0.0] * (d - d // 2) + [1.0] * (d // 2)))
        rep = mc_boxplus(A, B, args.samples, args.seed)
    elif args.check == "compress":
        A = _matrix(args.a, np.diag(rng.integers(-3, 6, size=d).astype(float)))
        rep = mc_compression(A, args.ell, args.samples, args.seed)
    elif args.check == "rect-compress":
        A = _matrix(args.a, rng.integers(-2, 3, size=(d, d + n)).astype(float))
        rep = mc_rect_compression(A, args.ell, n, args.samples, args.seed)
    else:
        A = _matrix(args.a, rng.integers(-2, 3, size=(d, d + n)).astype(float))
        B = _matrix(args.b, rng.integers(-2, 3, size=(d, d + n)).astype(float))
        rep = mc_rect_boxplus(A, B, n, args.samples, args.seed)
    _emit(rep.to_json(), args.out)
    return 0


def cmd_run(args):
    params = read_config(args.config) if args.config else {}
    params.pop("scenario", None)
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"--set expects key=value, got {item!r}")
        params[key.strip()] = value.strip()
    if args.d is not None:
        keys = scenarios.DEFAULTS[args.scenario]
        if "degrees" in keys:
            params["degrees"] = args.d
        elif "max_degree" in keys:
            params["max_degree"] = args.d
        elif "degree" in keys:
            params["degree"] = args.d
        else:
            raise ValueError(f"scenario {args.scenario} has no degree parameter")
    verdict = scenarios.run(args.scenario, params)
    scenarios.write_outputs(verdict, args.out)
    sys.stdout.write(verdict.dumps())
    status = "PASS" if verdict.passed else "FAIL"
    sys.stderr.write(f"{args.scenario}: {status} ({verdict.runtime:.1f} s)\n")
    return 0 if verdict.passed else 1


# --------------------------------------------------------------------------
# parser


def build_parser():
    ap = argparse.ArgumentParser(prog="finfree", description="Finite free probability toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("convolve", help="square or rectangular convolution")
    c.add_argument("p")
    c.add_argument("q")
    c.add_argument("--n", default=None, help="rectangular index; omit for the square convolution")
    c.add_argument("--out")
    c.set_defaults(func=cmd_convolve)

    t = sub.add_parser("transform", help="R-transform or cumulants")
    t.add_argument("p")
    t.add_argument("--what", choices=["R", "cumulants"], default="R")
    t.add_argument("--n", default=None, help="rectangular index; omit for the square versions")
    t.add_argument("--out")
    t.set_defaults(func=cmd_transform)

    a = sub.add_parser("appell", help="Appell or Laguerre–Appell polynomial")
    a.add_argument("data", help="JSON file with Laguerre–Pólya data (or LPI data with --n)")
    a.add_argument("--d", type=int, required=True)
    a.add_argument("--n", default=None, help="build the Laguerre–Appell polynomial with this index")
    a.add_argument("--normalized", action="store_true")
    a.add_argument("--tail-bound", default=None, help="declared bound on the neglected inverse-square sum")
    a.add_argument("--out")
    a.set_defaults(func=cmd_appell)

    m = sub.add_parser("measure", help="root measure diagnostics")
    m.add_argument("p")
    m.add_argument("--law", help="semicircle[:center,variance] | mp[:rate,scale] | cauchy | rectgauss[:lam,scale]")
    m.add_argument("--precision-bits", type=int, default=256)
    m.add_argument("--csv")
    m.add_argument("--out")
    m.set_defaults(func=cmd_measure)

    mc = sub.add_parser("mc", help="Monte Carlo matrix check")
    mc.add_argument("--check", choices=["boxplus", "compress", "rect-compress", "rect-boxplus"], required=True)
    mc.add_argument("--d", type=int, default=4)
    mc.add_argument("--n", type=int, default=0)
    mc.add_argument("--ell", type=int, default=2)
    mc.add_argument("--samples", type=int, default=200_000)
    mc.add_argument("--seed", type=int, default=42)
    mc.add_argument("--a", help="JSON matrix for A")
    mc.add_argument("--b", help="JSON matrix for B")
    mc.add_argument("--out")
    mc.set_defaults(func=cmd_mc)

    r = sub.add_parser("run", help="run a named scenario")
    r.add_argument("scenario", choices=scenarios.SCENARIOS)
    r.add_argument("--config", help="flat key = value file")
    r.add_argument("--out", default="finfree-results")
    r.add_argument("--d", default=None, help="degree list (or maximal degree) override")
    r.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    r.set_defaults(func=cmd_run)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"finfree: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
