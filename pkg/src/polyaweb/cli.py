"""Command-line experiment runner.

Every subcommand writes one CSV table (fixed header, floats at 17
significant digits, rationals as ``p/q``) and, when an output path is given,
a JSON summary next to it. The exit code is 0 when every verdict is ``pass``
or ``n-a``, 1 when some verdict fails and 2 on configuration errors.

Flags override values read from ``--config FILE`` (flat ``key = value``
lines, ``#`` comments); unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import coalescence as co
from . import determinant as de
from . import yule as yu
from .errors import ConfigError, PolyaWebError
from .web import ArrowField, LatticePoint, walk

RESULT_COLUMNS = ["estimate", "exact", "se", "tolerance", "tolerance_source", "verdict"]


# ----------------------------------------------------------------- formatting

def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else format(v, ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, float) and math.isnan(v):
        return None
    if isinstance(v, (frozenset, set, tuple, list)):
        return [_jsonable(x) for x in (sorted(v) if isinstance(v, (set, frozenset)) else v)]
    return v


@dataclass
class ResultRow:
    experiment: str
    params: dict
    estimate: object = None
    exact: object = None
    se: object = None
    tolerance: object = None
    tolerance_source: str = "n-a"
    verdict: str = "n-a"


@dataclass
class Report:
    experiment: str
    param_columns: list
    rows: list = field(default_factory=list)
    message: str = ""
    # subcommands with their own table layout set these two
    custom_header: list | None = None
    custom_rows: list | None = None

    def add(self, row: ResultRow):
        self.rows.append(row)

    @property
    def ok(self) -> bool:
        return all(r.verdict in ("pass", "n-a") for r in self.rows)

    def header(self) -> list:
        if self.custom_header is not None:
            return self.custom_header
        return ["experiment"] + self.param_columns + RESULT_COLUMNS

    def table(self) -> list:
        if self.custom_rows is not None:
            return [[fmt(v) for v in r] for r in self.custom_rows]
        out = []
        for r in self.rows:
            out.append([r.experiment] + [fmt(r.params.get(c)) for c in self.param_columns]
                       + [fmt(r.estimate), fmt(r.exact), fmt(r.se), fmt(r.tolerance),
                          r.tolerance_source, r.verdict])
        return out

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        w.writerows(self.table())
        return buf.getvalue()

    def summary(self, seed, params) -> dict:
        return {
            "experiment": self.experiment,
            "seed": seed,
            "params": {k: _jsonable(v) for k, v in params.items()},
            "rows": [dict(zip(self.header(), r)) for r in self.table()],
            "verdicts": [r.verdict for r in self.rows],
            "ok": self.ok,
            "message": self.message,
        }


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


# --------------------------------------------------------------- subcommands

def _mean_se(x):
    x = np.asarray(x, dtype=np.float64)
    se = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else float("nan")
    return float(x.mean()), se


def run_components(p) -> Report:
    rep = Report("components", ["n", "replicas", "horizon", "seed", "kernel"])
    exact = de.expected_components_exact(p["n"])
    base = {k: p[k] for k in rep.param_columns}
    if p["replicas"] > 0:
        c = co.component_counts_mc(p["kernel"], p["n"], p["horizon"], p["replicas"], p["seed"],
                                   p["threads"])
        mean, se = _mean_se(c)
        tol = 4 * se + p["bias"]
        ok = abs(mean - float(exact)) <= tol if p["kernel"] == "polya" else None
        rep.add(ResultRow("components", base, mean, exact if p["kernel"] == "polya" else None,
                          se, tol, "4·SE", "n-a" if ok is None else _verdict(ok)))
    else:
        rep.add(ResultRow("components", base, None, exact, None, None, "exact", "n-a"))
    return rep


def run_regional(p) -> Report:
    rep = Report("regional-components",
                 ["n", "alpha", "beta_n", "replicas", "horizon", "seed", "quantity"])
    n, alpha = p["n"], p["alpha"]
    beta_n = math.ceil(n ** p["beta_exponent"])
    mean_exact, (lo, hi) = de.regional_expected_components(n, alpha, beta_n)
    base = {"n": n, "alpha": alpha, "beta_n": beta_n, "replicas": p["replicas"],
            "horizon": p["horizon"], "seed": p["seed"]}
    scaled = math.sqrt(n) / beta_n * mean_exact
    target = de.regional_asymptotic(alpha)
    rep.add(ResultRow("regional-components", {**base, "quantity": "scaled_exact_mean"},
                      scaled, target, None, 0.05 * target, "relative-5%",
                      _verdict(abs(scaled - target) <= 0.05 * target)))
    if p["replicas"] > 0:
        ind = co.never_meet_indicators_mc("polya", n, p["horizon"], p["replicas"], p["seed"],
                                          p["threads"], j0=lo, j1=hi)
        mean, se = _mean_se(1 + ind.sum(axis=1))
        tol = 4 * se + p["bias"]
        rep.add(ResultRow("regional-components", {**base, "quantity": "mc_mean"}, mean,
                          mean_exact, se, tol, "4·SE", _verdict(abs(mean - mean_exact) <= tol)))
    return rep


def _pair_points(n, k):
    return LatticePoint(k, n - k), LatticePoint(k + 1, n - k - 1)


def run_pair_prob(p) -> Report:
    rep = Report("pair-prob", ["n", "k", "method", "replicas", "horizon", "seed"])
    n, k = p["n"], p["k"]
    exact = de.pair_never_meet_prob(n, k)
    a, b = _pair_points(n, k)
    base = {"n": n, "k": k, "replicas": p["replicas"], "horizon": p["horizon"], "seed": p["seed"]}
    if min(a.k, a.l, b.k, b.l) >= 1:
        quad = de.integrate_ordered_simplex(de.DensityQuery.distinct([a, b]))
        rep.add(ResultRow("pair-prob", {**base, "method": "quadrature"}, quad, exact, None,
                          1e-8, "quadrature-tol", _verdict(abs(quad - float(exact)) <= 1e-8)))
    else:
        rep.add(ResultRow("pair-prob", {**base, "method": "axis"}, float(exact), exact,
                          None, 0.0, "exact", "pass"))
    if p["replicas"] > 0:
        t = co.pair_meeting_mc("polya", a, b, p["horizon"], p["replicas"], p["seed"],
                               p["threads"])
        mean, se = _mean_se(t < 0)
        tol = 4 * se + p["bias"]
        rep.add(ResultRow("pair-prob", {**base, "method": "monte-carlo"}, mean, exact, se, tol,
                          "4·SE", _verdict(abs(mean - float(exact)) <= tol)))
    return rep


def _parse_points(text: str):
    pts = []
    for tok in text.replace(";", " ").split():
        k, l = tok.split(",")
        pts.append(LatticePoint(int(k), int(l)))
    return pts


def _parse_pairs(text: str):
    """``"1,2:2,1 3,0:3,0"`` -> [((1,2),(2,1)), ((3,0),(3,0))]; a lone point is a self-pair."""
    pairs = []
    for tok in text.replace(";", " ").split():
        parts = tok.split(":")
        pts = [LatticePoint(*map(int, q.split(","))) for q in parts]
        if len(pts) == 1:
            pts = pts * 2
        if len(pts) != 2:
            raise ConfigError(f"cannot parse pair {tok!r}")
        pairs.append(tuple(pts))
    return pairs


def run_density(p) -> Report:
    query = de.DensityQuery(_parse_pairs(p["pairs"]))
    n = query.n
    rep = Report("density", ["x1", "x2", "x3"][:n])
    grid = (np.arange(1, p["grid"] + 1) - 0.5) / p["grid"]
    for xs in itertools.combinations(grid, n):
        val = de.joint_density(query, list(xs))
        rep.add(ResultRow("density", {f"x{i + 1}": x for i, x in enumerate(xs)}, val, None,
                          None, 1e-9, "numerical-tol", _verdict(val >= -1e-9)))
    return rep


def _km_cases(norm_max, elapsed_max):
    for norm in range(1, norm_max + 1):
        pts = [LatticePoint(j, norm - j) for j in range(norm + 1)]
        for size in (2, 3):
            for starts in itertools.combinations(pts, size):
                for m in range(elapsed_max + 1):
                    ranges = [range(s.k, s.k + m + 1) for s in starts]
                    for targets in itertools.product(*ranges):
                        if all(a < b for a, b in zip(targets, targets[1:])):
                            yield list(starts), list(targets), norm + m


def run_km(p) -> Report:
    rep = Report("km-check", ["starts", "targets", "N"])
    for starts, targets, N in _km_cases(p["norm_max"], p["elapsed_max"]):
        km = de.km_finite_time_prob(starts, targets, N)
        en = de.landing_prob_enumeration(starts, targets, N)
        rep.add(ResultRow("km-check", {"starts": " ".join(f"{s.k},{s.l}" for s in starts),
                                       "targets": " ".join(map(str, targets)), "N": N},
                          km, en, None, 0, "exact", _verdict(km == en)))
    rep.message = f"{len(rep.rows)} configurations compared"
    return rep


def run_sqrt_pi(p) -> Report:
    rep = Report("sqrt-pi", ["n", "epsilon", "quantity"])
    n, eps = p["n"], p["epsilon"]
    s = de.sqrt_pi_sum_check(n, eps)
    rp = math.sqrt(math.pi)
    rep.add(ResultRow("sqrt-pi", {"n": n, "epsilon": eps, "quantity": "scaled_window_sum"},
                      s, rp, None, 0.005 * rp, "relative-0.5%",
                      _verdict(abs(s - rp) <= 0.005 * rp)))
    ratio = de.expected_components_float(n) / de.asymptotic_components(n)
    rep.add(ResultRow("sqrt-pi", {"n": n, "epsilon": eps, "quantity": "E[C_n]/sqrt(n pi)"},
                      ratio, 1.0, None, "[0.998,1.005]", "interval",
                      _verdict(0.998 <= ratio <= 1.005)))
    return rep


def run_strong_law(p) -> Report:
    rep = Report("strong-law", ["n", "quantity", "replicas", "horizon"])
    levels = sorted(int(x) for x in str(p["levels"]).split(","))
    mc_levels = [int(x) for x in str(p["mc_levels"]).split(",") if x.strip()] if p["mc_levels"] else []
    rows = co.strong_law_trace("polya", levels, p["horizon_factor"], p["replicas"], p["seed"],
                               p["threads"], mc_levels=mc_levels)
    prev = None
    for r in rows:
        hz = int(p["horizon_factor"] * r.n)
        dec = prev is None or r.exact_ratio < prev
        rep.add(ResultRow("strong-law", {"n": r.n, "quantity": "exact_ratio", "replicas": 0,
                                         "horizon": ""}, r.exact_ratio, r.exact,
                          None, None, "exact", _verdict(dec and r.exact_ratio > 1)))
        prev = r.exact_ratio
        if not math.isnan(r.mc_ratio):
            rep.add(ResultRow("strong-law", {"n": r.n, "quantity": "mc_ratio",
                                             "replicas": p["replicas"], "horizon": hz},
                              r.mc_ratio, 1.0, r.mc_se / de.asymptotic_components(r.n), 0.1,
                              "relative-10%", _verdict(abs(r.mc_ratio - 1) <= 0.1)))
    return rep


def run_na(p) -> Report:
    rep = Report("na-check", ["n", "i", "j", "quantity", "replicas", "horizon"])
    n = p["n"]
    diag = co.indicator_covariances("polya", n, p["horizon"], p["replicas"], p["seed"],
                                    p["threads"])
    base = {"n": n, "replicas": p["replicas"], "horizon": p["horizon"]}
    for i in range(n):
        for j in range(n):
            c, se = float(diag.cov[i, j]), float(diag.se[i, j])
            if i == j:
                q = float(de.pair_never_meet_prob(n, i))
                ex = q * (1 - q)
                rep.add(ResultRow("na-check", {**base, "i": i, "j": j, "quantity": "variance"},
                                  c, ex, se, 4 * se + p["bias"], "4·SE",
                                  _verdict(abs(c - ex) <= 4 * se + p["bias"])))
            elif i < j:
                rep.add(ResultRow("na-check", {**base, "i": i, "j": j, "quantity": "covariance"},
                                  c, None, se, 4 * se, "4·SE", _verdict(c <= 4 * se)))
    up, lo = co.na_chernoff_bounds(p["delta"], p["mean"])
    d, mu = p["delta"], p["mean"]
    up_ref = (math.exp(d) / (1 + d) ** (1 + d)) ** mu
    lo_ref = (math.exp(-d) / (1 - d) ** (1 - d)) ** mu
    for name, v, ref in (("chernoff_upper", up, up_ref), ("chernoff_lower", lo, lo_ref)):
        rep.add(ResultRow("na-check", {"n": "", "quantity": name}, v, ref, None, 1e-9,
                          "exact", _verdict(abs(v - ref) <= 1e-9 and 0 < v < 1)))
    return rep


def run_box(p) -> Report:
    rep = Report("box-oracle", ["N", "n", "A", "B"])
    for n, A, B, ok in co.box_oracle_all(p["N"]):
        rep.add(ResultRow("box-oracle", {"N": p["N"], "n": n, "A": " ".join(map(str, sorted(A))),
                                         "B": " ".join(map(str, sorted(B)))},
                          ok, True, None, 0, "exact", _verdict(ok)))
    rep.message = ("all index-set pairs verified: equality holds" if rep.ok
                   else "equality fails for some index-set pair")
    return rep


def run_yule(p) -> Report:
    check = p["check"]
    rep = Report("yule", ["check", "k", "t", "quantity", "replicas", "seed"])
    base = {"check": check, "k": p["k"], "replicas": p["replicas"], "seed": p["seed"]}
    if check == "negbinom":
        r = yu.negbinom_check(p["k"], p["dt"], p["replicas"], p["seed"], p["threads"])
        rep.add(ResultRow("yule", {**base, "t": p["dt"], "quantity": "chi2_pvalue"}, r.p_value,
                          None, None, yu.SIGNIFICANCE, "GOF-critical-value", _verdict(r.passed)))
    elif check in ("martingale", "gamma"):
        grid = [float(x) for x in str(p["t_grid"]).split(",")]
        rows, ks = yu.martingale_and_gamma_check(p["seed"], p["k"], 0.0, grid, p["replicas"],
                                                 p["threads"])
        if check == "martingale":
            for t, mean, se, ok in rows:
                rep.add(ResultRow("yule", {**base, "t": t, "quantity": "mean_U"}, mean, p["k"],
                                  se, 4 * se, "4·SE", _verdict(ok)))
        else:
            rep.add(ResultRow("yule", {**base, "t": ks.detail["t"], "quantity": "ks_pvalue"},
                              ks.p_value, None, None, yu.SIGNIFICANCE, "GOF-critical-value",
                              _verdict(ks.passed)))
    elif check == "branching":
        dev = yu.branching_pgf_check(k=2)
        rep.add(ResultRow("yule", {**base, "k": 2, "t": 2.0, "quantity": "pgf_max_dev"}, dev, 0.0,
                          None, 1e-12, "exact", _verdict(dev <= 1e-12)))
        if p["replicas"] > 0:
            r = yu.branching_mc_check(p["replicas"], p["seed"], threads=p["threads"])
            rep.add(ResultRow("yule", {**base, "k": 2, "t": 2.0, "quantity": "chi2_pvalue"},
                              r.p_value, None, None, yu.SIGNIFICANCE, "GOF-critical-value",
                              _verdict(r.passed)))
    elif check == "pair":
        k = p["k"]
        exact = yu.yule_pair_never_meet_prob(k)
        quad = 1.0 - yu.integrate_yule_pattern([(k, k + 1)])
        rep.add(ResultRow("yule", {**base, "t": "", "quantity": "never_meet_quadrature"}, quad,
                          exact, None, 1e-8, "quadrature-tol",
                          _verdict(abs(quad - float(exact)) <= 1e-8)))
        if p["replicas"] > 0:
            cap = p["sum_cap"]
            tv, st = yu.yule_meeting_mc((k, 0.0), (k + 1, 0.0), p["t_end"], p["replicas"],
                                        p["seed"], sum_cap=cap, threads=p["threads"])
            met = st == 0
            mean, se = _mean_se(met)
            q = yu.urn_meet_prob(k, k + 1, cap)
            tail = (1 - float(exact)) - q
            rep.add(ResultRow("yule", {**base, "t": p["t_end"], "quantity": "meet_prob_mc"}, mean,
                              1 - exact, se, 4 * se + tail, "4·SE",
                              _verdict(abs(mean - q) <= 4 * se)))
    else:
        raise ConfigError(f"unknown yule check {check!r}")
    return rep


def run_poisson(p) -> Report:
    rep = Report("poisson-check", ["k", "s", "t", "n", "quantity", "replicas", "seed"])
    k, s, t, n = p["k"], p["s"], p["t"], p["n"]
    base = {"k": k, "s": s, "t": t, "n": n, "replicas": p["replicas"], "seed": p["seed"]}
    r = yu.poisson_edge_check(k, s, t, n, p["replicas"], p["seed"], p["threads"])
    rep.add(ResultRow("poisson-check", {**base, "quantity": "chi2_pvalue"}, r.p_value, None, None,
                      yu.SIGNIFICANCE, "GOF-critical-value", _verdict(r.passed)))
    # two disjoint boxes on the same row, split at the geometric midpoint
    mid = math.sqrt(s * t)
    J = yu.edge_counts_mc([(k, s, mid), (k, mid + 1.0 / n, t)], n,
                          p["replicas"], p["seed"], threads=p["threads"])
    c = (J - J.mean(axis=0))
    prod = c[:, 0] * c[:, 1]
    cov = float(prod.sum() / (len(prod) - 1))
    se = float(prod.std(ddof=1) / math.sqrt(len(prod)))
    rep.add(ResultRow("poisson-check", {**base, "quantity": "covariance_two_boxes"}, cov, 0.0, se,
                      4 * se, "4·SE", _verdict(abs(cov) <= 4 * se)))
    return rep


def run_log_time(p) -> Report:
    rep = Report("log-time-change", ["k", "a", "b", "n", "quantity", "replicas", "seed"])
    base = {"k": p["k"], "a": p["a"], "b": p["b"], "n": p["n"], "replicas": p["replicas"],
            "seed": p["seed"]}
    r = yu.log_time_change_check(p["seed"], p["k"], (p["a"], p["b"]), p["replicas"], p["n"],
                                 p["threads"])
    rep.add(ResultRow("log-time-change", {**base, "quantity": "ks_pvalue"}, r.p_value, None, None,
                      yu.SIGNIFICANCE, "GOF-critical-value", _verdict(r.passed)))
    rate, se = r.detail["rate"], r.detail["rate_se"]
    rep.add(ResultRow("log-time-change", {**base, "quantity": "gap_rate"}, rate, p["k"], se,
                      4 * se + p["bias"], "4·SE",
                      _verdict(abs(rate - p["k"]) <= 4 * se + p["bias"])))
    return rep


def run_simulate(p) -> Report:
    n = p["n"]
    horizon = p["horizon"] if p["horizon"] else 2 * n
    fld = ArrowField(p["seed"], p["kernel"])
    xs = np.stack([walk(fld, LatticePoint(j, n - j), horizon).xs for j in range(n + 1)])
    # component id: index of the leftmost walker sharing the final position
    final = xs[:, -1]
    comp = np.array([int(np.argmax(final == f)) for f in final])
    rows = []
    for step in range(xs.shape[1]):
        t = n + step
        for w in range(n + 1):
            x = int(xs[w, step])
            rows.append([t, w, x, t - x, int(comp[w])])
    rep = Report("simulate-web", [], custom_header=["time", "walker", "x", "y", "component"],
                 custom_rows=rows)
    rep.message = f"{n + 1} walks, {len(set(comp.tolist()))} components at time {horizon}"
    return rep


# ------------------------------------------------------------------ parsing

COMMON = {
    "seed": (int, 0),
    "threads": (int, 1),
    "out": (str, None),
    "json": (str, None),
    "format": (str, "csv"),
}

SUBCOMMANDS = {
    "simulate-web": (run_simulate, {"n": (int, 50), "horizon": (int, 0), "kernel": (str, "polya")}),
    "components": (run_components, {"n": (int, 3), "replicas": (int, 100000),
                                    "horizon": (int, 10000), "kernel": (str, "polya"),
                                    "bias": (float, 0.01)}),
    "regional-components": (run_regional, {"n": (int, 10000), "alpha": (float, 0.5),
                                           "beta_exponent": (float, 0.6), "replicas": (int, 0),
                                           "horizon": (int, 100000), "bias": (float, 0.01)}),
    "pair-prob": (run_pair_prob, {"n": (int, 3), "k": (int, 1), "replicas": (int, 0),
                                  "horizon": (int, 10000), "bias": (float, 0.01)}),
    "density": (run_density, {"pairs": (str, "1,2 2,1"), "grid": (int, 20)}),
    "km-check": (run_km, {"norm_max": (int, 4), "elapsed_max": (int, 4)}),
    "sqrt-pi": (run_sqrt_pi, {"n": (int, 1000000), "epsilon": (float, 1.0)}),
    "strong-law": (run_strong_law, {"levels": (str, "100,10000,1000000"), "mc_levels": (str, ""),
                                    "replicas": (int, 0), "horizon_factor": (float, 100.0)}),
    "na-check": (run_na, {"n": (int, 4), "replicas": (int, 100000), "horizon": (int, 1000),
                          "delta": (float, 0.5), "mean": (float, 10.0), "bias": (float, 0.01)}),
    "box-oracle": (run_box, {"N": (int, 3)}),
    "yule": (run_yule, {"check": (str, "negbinom"), "k": (int, 1), "dt": (float, math.log(2)),
                        "replicas": (int, 100000), "t_grid": (str, "0,2,4,6,8"),
                        "t_end": (float, 20.0), "sum_cap": (int, 4096)}),
    "poisson-check": (run_poisson, {"k": (int, 1), "s": (float, 1.0), "t": (float, math.e),
                                    "n": (int, 10000), "replicas": (int, 10000)}),
    "log-time-change": (run_log_time, {"k": (int, 1), "a": (float, 1.0), "b": (float, math.e ** 4),
                                       "n": (int, 1000), "replicas": (int, 10000),
                                       "bias": (float, 0.0)}),
}

POSITIVE = {"replicas": 0, "horizon": 0, "n": 1, "threads": 1, "grid": 1, "N": 1,
            "epsilon": 1e-300, "norm_max": 1, "elapsed_max": 0, "sum_cap": 0, "dt": 0,
            "t_end": 0, "mean": 1e-300, "horizon_factor": 1e-300, "bias": 0}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polyaweb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")
    sub.required = True
    for name, (_, spec) in SUBCOMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="flat key=value file")
        for key, (typ, default) in {**COMMON, **spec}.items():
            flags = ["--" + key.replace("_", "-")]
            if "_" in key:
                flags.append("--" + key)
            sp.add_argument(*flags, dest=key, type=typ, default=None,
                            help=f"default: {default}")
    return parser


def read_config(path: str, spec: dict) -> dict:
    out = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in spec:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = spec[key][0](val)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {val!r}") from exc
    return out


def resolve(args) -> tuple[str, dict]:
    func, spec = SUBCOMMANDS[args.command]
    spec = {**COMMON, **spec}
    params = {k: d for k, (_, d) in spec.items()}
    if args.config:
        params.update(read_config(args.config, spec))
    for k in spec:
        v = getattr(args, k)
        if v is not None:
            params[k] = v
    for k, lo in POSITIVE.items():
        if k in params and isinstance(params[k], (int, float)) and params[k] < lo:
            raise ConfigError(f"{k} must be at least {lo}, got {params[k]}")
    if params["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if "kernel" in params and params["kernel"] not in ("polya", "srw"):
        raise ConfigError("kernel must be polya or srw")
    return args.command, params


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        name, params = resolve(args)
        report = SUBCOMMANDS[name][0](params)
    except ConfigError as exc:
        print(f"polyaweb: configuration error: {exc}", file=sys.stderr)
        return 2
    except (PolyaWebError, ValueError, OSError) as exc:
        print(f"polyaweb: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    text = report.csv_text()
    summary = report.summary(params["seed"], params)
    if params["out"]:
        out = Path(params["out"])
        out.write_text(text)
        json_path = Path(params["json"]) if params["json"] else out.with_suffix(".json")
        json_path.write_text(json.dumps(summary, indent=2) + "\n")
    else:
        if params["json"]:
            Path(params["json"]).write_text(json.dumps(summary, indent=2) + "\n")
        sys.stdout.write(text if params["format"] == "csv" else json.dumps(summary, indent=2) + "\n")
    if report.message:
        print(report.message, file=sys.stderr)
    failed = [r for r in report.rows if r.verdict == "fail"]
    if failed:
        print(f"polyaweb: {len(failed)} verdict(s) failed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
