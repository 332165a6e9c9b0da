"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (the verdict lines are
repeated in the terminal summary) or directly with
``python tests/test_acceptance.py``. All tolerances, sample sizes and
runtime budgets are fixed below before any computation runs.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np

from polyaweb import _backend
from polyaweb import coalescence as co
from polyaweb import determinant as de
from polyaweb import geometry
from polyaweb import yule as yu
from polyaweb.cli import _km_cases
from polyaweb.web import ArrowField, trajectory_table

# ---------------------------------------------------------------- pinned setup

SEED = 0
Z = 4.0                      # standard errors allowed for Monte Carlo checks
BIAS = 0.01                  # finite-horizon bias allowance
QUAD_TOL = 1e-8
GOF_ALPHA = 1e-3

C1 = dict(replicas=10**5, horizon=10**4, budget=60.0)
C2 = dict(replicas=10**5, horizon=10**4, budget=60.0)
C3 = dict(n=10**6, eps=1.0, rel_tol=0.005, ratio_lo=0.998, ratio_hi=1.005, budget=30.0)
C4 = dict(levels=(10**2, 10**4, 10**6), n_mc=10**3, replicas=10**3, horizon=10**5,
          rel_tol=0.10, budget=600.0)
C5 = dict(n=10**4, alpha=0.5, beta_exp=0.6, rel_tol=0.05, target=2 / math.sqrt(math.pi),
          budget=10.0)
C6 = dict(norm_max=4, elapsed_max=4, budget=60.0)
C7 = dict(N=3, budget=300.0)
C8 = dict(n=4, replicas=10**5, horizon=10**3, delta=0.5, mean=10.0, quoted_upper=0.1593,
          tol=1e-9)
C9 = dict(n=10**4, replicas=10**4, budget=120.0)
C10 = dict(nb_replicas=10**5, mart_replicas=2 * 10**4, t_grid=(0.0, 2.0, 4.0, 6.0, 8.0),
           ks_levels=(1, 3), pair_replicas=10**5, sum_cap=4096, t_end=20.0, pgf_points=20,
           pgf_tol=1e-12, budget=300.0)
C11 = dict(n_max=12, seeds=100, kernels=("polya", "srw"), budget=120.0)

VERDICTS: list[str] = []


def verdict(tag: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} [{tag}] {detail}"
    VERDICTS.append(line)
    print(line)
    return ok


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def _mean_se(x):
    x = np.asarray(x, dtype=np.float64)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


# ------------------------------------------------------------------ criteria

def test_criterion_01_pair_never_meet():
    with Clock() as clk:
        exact = de.pair_never_meet_prob(3, 1)
        quad = de.integrate_ordered_simplex(de.DensityQuery.distinct([(1, 2), (2, 1)]))
        t = co.pair_meeting_mc("polya", (1, 2), (2, 1), C1["horizon"], C1["replicas"], SEED)
        met, se = _mean_se(t >= 0)
    comp = 1 - float(exact)
    tol = Z * se + BIAS
    ok = (exact == Fraction(2, 3) and abs(quad - float(exact)) <= QUAD_TOL
          and abs(met - comp) <= tol and clk.elapsed < C1["budget"])
    assert verdict("1 pair never-meet", ok,
                   f"exact={exact} quad={quad:.12f} mc_meet={met:.5f} vs {comp:.5f} "
                   f"(tol {tol:.4f}) {clk.elapsed:.1f}s")


def test_criterion_02_expected_components_n3():
    with Clock() as clk:
        terms = [de.pair_never_meet_prob(3, k) for k in range(3)]
        exact = 1 + sum(terms)
        # one run at twice the horizon gives both horizons from the same fields
        h = C2["horizon"]
        seeds = co.replica_seeds(SEED, C2["replicas"])
        t = _backend.kernels.row_meeting_times(seeds, 0, np.zeros((1, 1)), 3, 0, 3, 2 * h)
        mean1, se1 = _mean_se(1 + ((t < 0) | (t > h)).sum(axis=1))
        mean2, _ = _mean_se(1 + (t < 0).sum(axis=1))
    tol = Z * se1 + BIAS
    stable = abs(mean2 - mean1) < tol / 2
    ok = (exact == Fraction(11, 3) and exact == de.expected_components_exact(3)
          and abs(mean1 - float(exact)) <= tol and stable and clk.elapsed < C2["budget"])
    assert verdict("2 E[C_3]", ok,
                   f"exact={exact} mc={mean1:.5f}±{se1:.5f} (tol {tol:.4f}); "
                   f"doubled horizon {mean2:.5f} (shift {abs(mean2 - mean1):.5f} < {tol / 2:.4f}) "
                   f"{clk.elapsed:.1f}s")


def test_criterion_03_sqrt_pi_law():
    with Clock() as clk:
        s = de.sqrt_pi_sum_check(C3["n"], C3["eps"])
        ratio = de.expected_components_float(C3["n"]) / de.asymptotic_components(C3["n"])
    rp = math.sqrt(math.pi)
    ok_sum = abs(s - rp) <= C3["rel_tol"] * rp
    ok_ratio = C3["ratio_lo"] <= ratio <= C3["ratio_hi"]
    ok = ok_sum and ok_ratio and clk.elapsed < C3["budget"]
    assert verdict("3 sqrt(pi) law", ok,
                   f"window sum {s:.6f} vs {rp:.6f} (rel err {abs(s - rp) / rp:.4f}, "
                   f"tol {C3['rel_tol']}) {'ok' if ok_sum else 'out'}; "
                   f"E[C_n]/sqrt(n pi)={ratio:.6f} {'ok' if ok_ratio else 'out'} {clk.elapsed:.1f}s")


def test_criterion_04_strong_law_trend():
    with Clock() as clk:
        ratios = [de.expected_components_float(n) / de.asymptotic_components(n)
                  for n in C4["levels"]]
        c = co.component_counts_mc("polya", C4["n_mc"], C4["horizon"], C4["replicas"], SEED)
        mc = float(c.mean()) / de.asymptotic_components(C4["n_mc"])
    dec = all(a > b > 1 for a, b in zip(ratios, ratios[1:]))
    ok = dec and abs(mc - 1) <= C4["rel_tol"] and clk.elapsed < C4["budget"]
    assert verdict("4 strong-law trend", ok,
                   "exact ratios " + ", ".join(f"{r:.6f}" for r in ratios)
                   + f"; mc ratio at n={C4['n_mc']} {mc:.4f} {clk.elapsed:.1f}s")


def test_criterion_05_regional_law():
    with Clock() as clk:
        n = C5["n"]
        beta_n = math.ceil(n ** C5["beta_exp"])
        mean, (lo, hi) = de.regional_expected_components(n, C5["alpha"], beta_n)
        scaled = math.sqrt(n) / beta_n * mean
    target = C5["target"]
    ok = abs(scaled - target) <= C5["rel_tol"] * target and clk.elapsed < C5["budget"]
    assert verdict("5 regional law", ok,
                   f"sqrt(n)/beta_n * E = {scaled:.6f} vs {target:.6f} "
                   f"(window {lo}..{hi}, beta_n={beta_n}) {clk.elapsed:.2f}s")


def test_supplement_05_regional_window_width():
    # the window holds 2 beta_n walkers, so the per-unit-width density is half the above
    n = C5["n"]
    beta_n = math.ceil(n ** C5["beta_exp"])
    lo, hi = de.regional_window(n, C5["alpha"], beta_n)
    s = de.window_sum(n, lo, hi - 1)
    scaled = math.sqrt(n) / (2 * beta_n) * s
    target = C5["target"]
    ok = abs(scaled - target) <= C5["rel_tol"] * target
    assert verdict("5-supplement width-normalised regional sum", ok,
                   f"sqrt(n)/(2 beta_n) * sum = {scaled:.6f} vs {target:.6f}")


def test_criterion_06_km_determinant():
    with Clock() as clk:
        cases = list(_km_cases(C6["norm_max"], C6["elapsed_max"]))
        bad = [(s, t, N) for s, t, N in cases
               if de.km_finite_time_prob(s, t, N) != de.landing_prob_enumeration(s, t, N)]
        example = de.km_finite_time_prob([(1, 2), (2, 1)], [1, 3], 4)
    ok = not bad and example == Fraction(4, 9) and clk.elapsed < C6["budget"]
    assert verdict("6 KM determinant", ok,
                   f"{len(cases)} configurations, {len(bad)} mismatches; "
                   f"worked example {example} {clk.elapsed:.1f}s")


def test_criterion_07_box_oracle():
    with Clock() as clk:
        rows = co.box_oracle_all(C7["N"])
    failed = [r for r in rows if not r[3]]
    ok = not failed and clk.elapsed < C7["budget"]
    assert verdict("7 box-operation oracle", ok,
                   f"{len(rows)} disjoint (A, B) at N={C7['N']}, {len(failed)} failures "
                   f"{clk.elapsed:.2f}s")


def test_criterion_08_na_diagnostics():
    diag = co.indicator_covariances("polya", C8["n"], C8["horizon"], C8["replicas"], SEED)
    ok_cov = diag.off_diagonal_ok(Z)
    up, lo = co.na_chernoff_bounds(C8["delta"], C8["mean"])
    d, mu = C8["delta"], C8["mean"]
    up_ref = (math.exp(d) / (1 + d) ** (1 + d)) ** mu
    lo_ref = (math.exp(-d) / (1 - d) ** (1 - d)) ** mu
    ok_closed = abs(up - up_ref) <= C8["tol"] and abs(lo - lo_ref) <= C8["tol"]
    ok_quoted = abs(up - C8["quoted_upper"]) <= C8["tol"]
    off = ~np.eye(C8["n"], dtype=bool)
    worst = float(np.max(diag.cov[off] - Z * diag.se[off]))
    ok = ok_cov and ok_closed and ok_quoted
    assert verdict("8 NA diagnostics", ok,
                   f"max(cov - 4SE) off-diagonal {worst:.2e} {'ok' if ok_cov else 'out'}; "
                   f"upper {up:.6f} vs closed form {up_ref:.6f} "
                   f"{'ok' if ok_closed else 'out'}; vs quoted {C8['quoted_upper']} "
                   f"{'ok' if ok_quoted else 'out'}")


def test_criterion_09_poisson_edge():
    with Clock() as clk:
        r = yu.poisson_edge_check(1, 1.0, math.e, C9["n"], C9["replicas"], SEED)
        mid = math.sqrt(math.e)
        J = yu.edge_counts_mc([(1, 1.0, mid), (1, mid + 1.0 / C9["n"], math.e)], C9["n"],
                              C9["replicas"], SEED)
        c = J - J.mean(axis=0)
        prod = c[:, 0] * c[:, 1]
        cov, se = float(prod.sum() / (len(prod) - 1)), float(prod.std(ddof=1) / math.sqrt(len(prod)))
    ok = r.p_value > GOF_ALPHA and abs(cov) <= Z * se and clk.elapsed < C9["budget"]
    assert verdict("9 Poisson edge", ok,
                   f"chi2 p={r.p_value:.3f} (mean {r.detail['empirical_mean']:.4f}); "
                   f"two-box cov {cov:.4f} band ±{Z * se:.4f} {clk.elapsed:.1f}s")


def test_criterion_10_yule_suite():
    parts = []
    with Clock() as clk:
        nb = yu.negbinom_check(1, math.log(2), C10["nb_replicas"], SEED)
        parts.append(("negbinom", nb.p_value > GOF_ALPHA, f"p={nb.p_value:.3f}"))
        for k in C10["ks_levels"]:
            rows, ks = yu.martingale_and_gamma_check(SEED, k, 0.0, C10["t_grid"],
                                                     C10["mart_replicas"])
            parts.append((f"martingale k={k}", all(r[3] for r in rows),
                          " ".join(f"{m:.3f}" for _, m, _, _ in rows)))
            parts.append((f"gamma-ks k={k}", ks.p_value > GOF_ALPHA, f"p={ks.p_value:.3f}"))
        exact = yu.yule_pair_never_meet_prob(1)
        quad = 1.0 - yu.integrate_yule_pattern([(1, 2)])
        parts.append(("pair exact", exact == Fraction(1, 2), str(exact)))
        parts.append(("pair quadrature", abs(quad - 0.5) <= QUAD_TOL, f"{quad:.12f}"))
        _, st = yu.yule_meeting_mc((1, 0.0), (2, 0.0), C10["t_end"], C10["pair_replicas"], SEED,
                                   sum_cap=C10["sum_cap"])
        met, se = _mean_se(st == 0)
        q = yu.urn_meet_prob(1, 2, C10["sum_cap"])
        tail = 0.5 - q
        parts.append(("pair mc", abs(met - q) <= Z * se and 0 <= tail < 1e-3,
                      f"meet {met:.5f} vs {q:.5f}±{Z * se:.5f}, tail {tail:.1e}"))
        dev = yu.branching_pgf_check(k=2, points=C10["pgf_points"])
        parts.append(("branching pgf", dev <= C10["pgf_tol"], f"{dev:.1e}"))
    ok = all(p[1] for p in parts) and clk.elapsed < C10["budget"]
    assert verdict("10 Yule suite", ok,
                   "; ".join(f"{n} {'ok' if g else 'out'} ({d})" for n, g, d in parts)
                   + f" {clk.elapsed:.1f}s")


def test_criterion_11_geometry():
    counts = {"order": 0, "noncrossing": 0, "separation": 0}
    with Clock() as clk:
        for kernel in C11["kernels"]:
            for seed in range(C11["seeds"]):
                f = ArrowField(seed, kernel)
                tab = trajectory_table(f, C11["n_max"])
                counts["order"] += len(geometry.order_preservation_violations(f, C11["n_max"], tab))
                counts["noncrossing"] += len(geometry.noncrossing_violations(f, C11["n_max"], tab))
                counts["separation"] += len(geometry.separation_mismatches(f, C11["n_max"], tab))
    ok = not any(counts.values()) and clk.elapsed < C11["budget"]
    assert verdict("11 geometry suite", ok,
                   f"{C11['seeds']} seeds x {len(C11['kernels'])} kernels, level <= {C11['n_max']}: "
                   + ", ".join(f"{k} violations {v}" for k, v in counts.items())
                   + f" {clk.elapsed:.1f}s")


if __name__ == "__main__":
    import sys

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    failed = 0
    for fn in tests:
        try:
            fn()
        except AssertionError:
            failed += 1
    print(f"{len(tests) - failed}/{len(tests)} passed")
    sys.exit(1 if failed else 0)
