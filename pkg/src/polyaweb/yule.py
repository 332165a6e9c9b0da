"""The Yule web and its bridge to the edge of the Polya web.

Level ``m`` owns a Poisson process of rate ``m`` on the time axis. The
process is laid out in cells ``[c/m, (c+1)/m)``; cell ``c`` holds a
Poisson(1) number of uniform points, all derived from a counter-based hash
of ``(seed, m, c)``. Any window of any stream can therefore be produced on
demand and overlapping windows agree exactly.

A Yule walk at level ``m`` jumps to ``m + 1`` at the first arrival of stream
``m``. Walks share the streams, so two walks at the same level at the same
time move together from then on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import stats

from . import _backend, _pykernels
from .coalescence import MeetingOutcome, parallel_map
from .determinant import pattern_matrix
from .dist import gamma_cdf, gamma_pdf, negbinom_pmf, poisson_pmf
from .errors import NotOrdered, OverlappingBoxes, WindowEmpty, YuleLevelCapExceeded
from .web import KERNELS, ArrowField

__all__ = [
    "ArrivalStream",
    "YuleWalkPath",
    "arrivals",
    "arrival_counts",
    "yule_walk",
    "yule_levels_mc",
    "yule_meeting",
    "yule_meeting_mc",
    "urn_meet_prob",
    "yule_pair_never_meet_prob",
    "yule_joint_density",
    "integrate_yule_pattern",
    "chi_square_gof",
    "negbinom_check",
    "martingale_and_gamma_check",
    "branching_pgf_check",
    "branching_mc_check",
    "polya_edge_jump_count",
    "joint_jump_counts",
    "edge_counts_mc",
    "poisson_edge_check",
    "log_time_change_check",
]

V_MAX = 1 << 16
TAIL_CUTOFF = 60.0
SIGNIFICANCE = 1e-3


def _seed(seed: int) -> int:
    return int(seed) % (1 << 64)


@dataclass(frozen=True)
class ArrivalStream:
    """Arrivals of level ``k`` inside ``[t0, t1)``, sorted."""

    k: int
    window: tuple[float, float]
    times: np.ndarray

    def __len__(self) -> int:
        return int(self.times.shape[0])


def arrivals(seed: int, k: int, window: tuple[float, float]) -> ArrivalStream:
    """Arrival times of stream ``k`` in the half-open window ``[t0, t1)``."""
    t0, t1 = float(window[0]), float(window[1])
    if k < 1:
        raise ValueError("stream level must be at least 1")
    if not t0 < t1:
        raise WindowEmpty(f"window [{t0}, {t1}) is empty")
    kern = _backend.kernels
    seed = _seed(seed)
    c0, c1 = math.floor(t0 * k), math.floor(t1 * k)
    parts = [kern.yule_cell(seed, k, c) for c in range(c0, c1 + 1)]
    times = np.sort(np.concatenate(parts)) if parts else np.empty(0)
    times = times[(times >= t0) & (times < t1)]
    return ArrivalStream(k, (t0, t1), times)


def arrival_counts(seeds: np.ndarray, k: int, window: tuple[float, float]) -> np.ndarray:
    """Number of arrivals of stream ``k`` in ``[t0, t1)`` for each seed (vectorised)."""
    t0, t1 = float(window[0]), float(window[1])
    if not t0 < t1:
        raise WindowEmpty(f"window [{t0}, {t1}) is empty")
    keys = _pykernels._keys(np.asarray(seeds, dtype=np.uint64), _pykernels.YULE_TAG)
    out = np.zeros(keys.shape[0], dtype=np.int64)
    kk = np.full(keys.shape, k, dtype=np.int64)
    for c in range(math.floor(t0 * k), math.floor(t1 * k) + 1):
        cc = np.full(keys.shape, c, dtype=np.int64)
        h = _pykernels._cell_hash(keys, kk, cc)
        cnt = _pykernels._cell_count(h)
        for i in range(int(cnt.max(initial=0))):
            pos = _pykernels._cell_pos(h, i, cc, kk)
            out += (i < cnt) & (pos >= t0) & (pos < t1)
    return out


@dataclass(frozen=True)
class YuleWalkPath:
    """Yule walk from level ``k`` at time ``s``, observed up to ``t_end``."""

    k: int
    s: float
    jump_times: np.ndarray
    t_end: float

    def level_at(self, t: float) -> int:
        if t < self.s:
            raise ValueError(f"walk is born at {self.s}")
        return self.k + int(np.searchsorted(self.jump_times, t, side="right"))

    @property
    def final_level(self) -> int:
        return self.k + len(self.jump_times)


def yule_walk(seed: int, k: int, s: float, t_end: float, vmax: int = V_MAX) -> YuleWalkPath:
    """Jump times of the Yule walk from ``(k, s)`` up to ``t_end``."""
    if k < 1:
        raise ValueError("start level must be at least 1")
    if t_end < s:
        raise ValueError("t_end must not precede the start time")
    kern = _backend.kernels
    seed = _seed(seed)
    jumps = []
    m, t = k, float(s)
    while True:
        t = kern.next_arrival(seed, m, t)
        if t > t_end:
            break
        jumps.append(t)
        m += 1
        if m > vmax:
            raise YuleLevelCapExceeded(f"level exceeded {vmax}")
    return YuleWalkPath(k, float(s), np.asarray(jumps), float(t_end))


def yule_levels_mc(k: int, s: float, times: Sequence[float], replicas: int, seed: int = 0,
                   vmax: int = V_MAX, threads: int = 1, backend=None) -> np.ndarray:
    """Levels ``V_{k,s}(t)`` on a sorted time grid; shape ``replicas x len(times)``."""
    times = np.ascontiguousarray(times, dtype=np.float64)
    if np.any(np.diff(times) < 0) or (times.size and times[0] < s):
        raise ValueError("times must be sorted and not precede s")
    kern = _backend.get_backend(backend)
    seeds = kern.replica_seeds(_seed(seed), int(replicas))
    return parallel_map(lambda sd: kern.yule_levels(sd, k, float(s), times, vmax), seeds, threads)


def yule_meeting(seed: int, start1: tuple[int, float], start2: tuple[int, float], t_end: float,
                 sum_cap: int = 0, vmax: int = V_MAX) -> MeetingOutcome:
    """First time two Yule walks on the shared streams occupy the same level.

    ``sum_cap > 0`` stops the search once the two levels add up to
    ``sum_cap``; that outcome is reported as not met.
    """
    (k1, s1), (k2, s2) = start1, start2
    tv, st = _backend.kernels.yule_pair(np.array([_seed(seed)], dtype=np.uint64), int(k1),
                                        float(s1), int(k2), float(s2), float(t_end),
                                        int(sum_cap), int(vmax))
    if st[0] == 0:
        return MeetingOutcome(True, float(tv[0]), t_end)
    return MeetingOutcome(False, None, t_end)


def yule_meeting_mc(start1, start2, t_end: float, replicas: int, seed: int = 0,
                    sum_cap: int = 0, vmax: int = V_MAX, threads: int = 1, backend=None):
    """Meeting times and status codes (0 met, 1 horizon, 2 level-sum cap) per replica."""
    (k1, s1), (k2, s2) = start1, start2
    kern = _backend.get_backend(backend)
    seeds = kern.replica_seeds(_seed(seed), int(replicas))
    return parallel_map(
        lambda sd: kern.yule_pair(sd, int(k1), float(s1), int(k2), float(s2), float(t_end),
                                  int(sum_cap), int(vmax)), seeds, threads)


def urn_meet_prob(a: int, b: int, sum_cap: int) -> float:
    """Probability that walks at levels ``a < b`` meet before the levels sum to ``sum_cap``.

    Between meetings the pair of levels is an urn: the next jump belongs to
    the lower walk with probability ``a/(a+b)``. The recursion runs over the
    diagonals ``a + b = const``.
    """
    if not 1 <= a < b:
        raise NotOrdered("need 1 <= a < b")
    s0 = a + b
    if sum_cap <= s0:
        return 0.0
    # mass[i] is the probability of the state (i, s - i) on diagonal s
    mass = np.zeros(sum_cap + 1)
    mass[a] = 1.0
    met = 0.0
    for s in range(s0, sum_cap):
        i = np.arange(1, (s + 1) // 2 + 1)
        i = i[2 * i < s]
        m = mass[i]
        p_low = i / s
        hit = 2 * i + 1 == s
        met += float(np.sum(m[hit] * p_low[hit]))
        new = np.zeros_like(mass)
        stay = ~hit
        np.add.at(new, i[stay] + 1, m[stay] * p_low[stay])
        np.add.at(new, i, m * (1 - p_low))
        mass = new
    return met


def yule_pair_never_meet_prob(k: int) -> Fraction:
    """``C(2k, k) / 4^k``: Yule walks from levels ``k`` and ``k + 1`` never meet."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return Fraction(math.comb(2 * k, k), 4 ** k)


def _check_levels(pairs):
    pairs = [(int(l), int(r)) for l, r in pairs]
    if not pairs:
        raise NotOrdered("empty level pattern")
    for l, r in pairs:
        if l < 1 or l > r:
            raise NotOrdered(f"pair ({l}, {r}) is not ordered")
    for (_, r), (l2, _) in zip(pairs, pairs[1:]):
        if r >= l2:
            raise NotOrdered("consecutive level pairs must be strictly increasing")
    return pairs


def _yule_density_grid(pairs, X):
    if all(l == r for l, r in pairs):
        g = np.stack([gamma_pdf(l, X) for l, _ in pairs], axis=-2)
        return np.linalg.det(g) if len(pairs) > 1 else g[..., 0, 0]
    levels = [v for pr in pairs for v in pr]
    G = np.stack([gamma_cdf(v, X) for v in levels], axis=-2)
    g = np.stack([gamma_pdf(v, X) for v in levels], axis=-2)
    return np.linalg.det(pattern_matrix(G, g))


def yule_joint_density(pairs, x) -> float:
    """Joint density of the Yule limits for the merged/separated level pattern ``pairs``.

    Same block pattern as the Polya joint density with Gamma(k, 1) in place
    of Beta.
    """
    pairs = _check_levels(pairs)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (len(pairs),) or np.any(np.diff(x) <= 0) or x[0] <= 0:
        raise NotOrdered("x must satisfy 0 < x_1 < ... < x_n")
    return float(_yule_density_grid(pairs, x[None, :])[0])


def integrate_yule_pattern(pairs, cutoff: float = TAIL_CUTOFF) -> float:
    """Integral of :func:`yule_joint_density` over ``0 < x_1 < ... < x_n < cutoff``."""
    pairs = _check_levels(pairs)
    n = len(pairs)
    if n > 3:
        raise NotOrdered("quadrature supports at most 3 pairs")
    from .determinant import _simplex_rule

    X, W = _simplex_rule(n, 0.0, cutoff)
    return float(np.dot(W, _yule_density_grid(pairs, X)))


# ------------------------------------------------------------ statistical checks

def chi_square_gof(observed: np.ndarray, probs: np.ndarray, min_expected: float = 5.0):
    """Chi-square goodness of fit with adjacent low-expectation bins pooled.

    ``probs`` may sum to less than one; the remainder joins the last bin.
    Returns ``(statistic, dof, p_value)``.
    """
    observed = np.asarray(observed, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64).copy()
    total = observed.sum()
    probs[-1] += max(0.0, 1.0 - probs.sum())
    exp = probs * total
    obs_b, exp_b = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, exp):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_b.append(o_acc)
            exp_b.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if exp_b:
            obs_b[-1] += o_acc
            exp_b[-1] += e_acc
        else:
            obs_b.append(o_acc)
            exp_b.append(e_acc)
    obs_b, exp_b = np.array(obs_b), np.array(exp_b)
    stat = float(np.sum((obs_b - exp_b) ** 2 / exp_b))
    dof = len(exp_b) - 1
    return stat, dof, float(stats.chi2.sf(stat, dof)) if dof > 0 else 1.0


@dataclass
class CheckResult:
    name: str
    statistic: float
    p_value: float
    passed: bool
    detail: dict


def negbinom_check(k: int, dt: float, replicas: int, seed: int = 0, threads: int = 1):
    """Chi-square of ``V_{k,0}(dt)`` against NegBinom(k, e^-dt)."""
    v = yule_levels_mc(k, 0.0, [dt], replicas, seed, threads=threads)[:, 0]
    p = math.exp(-dt)
    top = int(v.max())
    support = np.arange(k, top + 1)
    obs = np.bincount(v - k, minlength=len(support)).astype(float)
    probs = np.array([negbinom_pmf(k, p, int(n)) for n in support])
    stat, dof, pv = chi_square_gof(obs, probs)
    return CheckResult("negbinom", stat, pv, pv > SIGNIFICANCE,
                       {"k": k, "p": p, "dof": dof, "mean": float(v.mean())})


def martingale_and_gamma_check(seed: int, k: int, s: float, t_grid: Sequence[float],
                               replicas: int, threads: int = 1, vmax: int = 1 << 22):
    """Mean of ``U = e^{-(t-s)} V`` per grid time and KS of ``U`` against Gamma(k, 1) at the last time.

    Returns ``(rows, ks)`` where each row is ``(t, mean, se, within_4se)``.
    """
    t_grid = np.sort(np.asarray(t_grid, dtype=np.float64))
    V = yule_levels_mc(k, s, t_grid, replicas, seed, vmax=vmax, threads=threads)
    rows = []
    for i, t in enumerate(t_grid):
        U = math.exp(-(t - s)) * V[:, i]
        mean = float(U.mean())
        se = float(U.std(ddof=1) / math.sqrt(len(U))) if len(U) > 1 else 0.0
        ok = abs(mean - k) <= 4 * se if se > 0 else mean == k
        rows.append((float(t), mean, se, bool(ok)))
    U = math.exp(-(t_grid[-1] - s)) * V[:, -1]
    res = stats.kstest(U, stats.gamma(k).cdf)
    ks = CheckResult("gamma-ks", float(res.statistic), float(res.pvalue),
                     float(res.pvalue) > SIGNIFICANCE, {"k": k, "t": float(t_grid[-1])})
    return rows, ks


def _nb_pgf(k: int, p: float, z):
    z = np.asarray(z, dtype=np.float64)
    return (p * z / (1.0 - (1.0 - p) * z)) ** k


def branching_pgf_check(k: int = 2, s: float = 0.0, r: float = 1.0, t: float = 2.0,
                        points: int = 20):
    """Largest deviation between the two sides of the branching identity in PGF form.

    Left: PGF of ``V_{k,s}(t)``. Right: PGF of ``V_{k,s}(r)`` composed with
    the PGF of ``V_{1,r}(t)``; both are closed-form NegBinom PGFs.
    """
    z = (np.arange(1, points + 1) - 0.5) / points
    left = _nb_pgf(k, math.exp(-(t - s)), z)
    right = _nb_pgf(k, math.exp(-(r - s)), _nb_pgf(1, math.exp(-(t - r)), z))
    return float(np.max(np.abs(left - right)))


def branching_mc_check(replicas: int, seed: int = 0, k: int = 2, s: float = 0.0,
                       r: float = 1.0, t: float = 2.0, top: int = 40, threads: int = 1):
    """Two-sample chi-square: ``V_{k,s}(t)`` versus a sum of independent ``V_{1,r}(t)``.

    The sum has ``V_{k,s}(r)`` terms, each drawn on its own independent
    web. Values above ``top`` are pooled.
    """
    direct = yule_levels_mc(k, s, [r, t], replicas, seed, threads=threads)
    n_r = direct[:, 0]
    kids = yule_levels_mc(1, r, [t], int(n_r.sum()), _seed(seed) ^ 0x5A5A5A5A, threads=threads)
    idx = np.repeat(np.arange(replicas), n_r)
    summed = np.bincount(idx, weights=kids[:, 0], minlength=replicas).astype(np.int64)
    a = np.bincount(np.minimum(direct[:, 1], top + 1), minlength=top + 2)[k:]
    b = np.bincount(np.minimum(summed, top + 1), minlength=top + 2)[k:]
    table = np.vstack([a, b])
    table = table[:, table.sum(axis=0) > 0]
    res = stats.chi2_contingency(table, correction=False)
    return CheckResult("branching-mc", float(res.statistic), float(res.pvalue),
                       float(res.pvalue) > SIGNIFICANCE, {"dof": int(res.dof)})


# ------------------------------------------------------------ Polya edge

def _edge_range(n: int, s: float, t: float) -> tuple[int, int]:
    if not 0 < s <= t:
        raise WindowEmpty(f"need 0 < s <= t, got s={s}, t={t}")
    return math.ceil(n * s), math.floor(n * t)


def polya_edge_jump_count(field: ArrowField, k: int, s: float, t: float, n: int) -> int:
    """``J_n(k, s, t)``: Up arrows at ``(j, k)`` for ``n s <= j <= n t``."""
    if k < 1:
        raise ValueError("row must be at least 1")
    j0, j1 = _edge_range(n, s, t)
    if j1 < j0:
        return 0
    return int(_backend.kernels.edge_up_counts(
        np.array([field.seed], dtype=np.uint64), field.kernel_code, field.table, k, j0, j1)[0])


def _check_boxes(boxes):
    boxes = [(int(k), float(s), float(t)) for k, s, t in boxes]
    for i, (k1, s1, t1) in enumerate(boxes):
        for k2, s2, t2 in boxes[i + 1:]:
            if k1 == k2 and s1 <= t2 and s2 <= t1 and not (s1 == t1 or s2 == t2):
                raise OverlappingBoxes(f"boxes on row {k1} overlap: [{s1}, {t1}] and [{s2}, {t2}]")
    return boxes


def joint_jump_counts(field: ArrowField, boxes, n: int) -> np.ndarray:
    """Vector of ``J_n(k_j, s_j, t_j)`` for pairwise disjoint boxes."""
    boxes = _check_boxes(boxes)
    return np.array([polya_edge_jump_count(field, k, s, t, n) for k, s, t in boxes], dtype=np.int64)


def edge_counts_mc(boxes, n: int, replicas: int, seed: int = 0, kernel: str = "polya",
                   threads: int = 1, backend=None) -> np.ndarray:
    """``replicas x len(boxes)`` matrix of edge jump counts on independent fields."""
    boxes = _check_boxes(boxes)
    kern = _backend.get_backend(backend)
    seeds = kern.replica_seeds(_seed(seed), int(replicas))
    table = np.zeros((1, 1))
    cols = []
    for k, s, t in boxes:
        j0, j1 = _edge_range(n, s, t)
        if j1 < j0:
            cols.append(np.zeros(replicas, dtype=np.int64))
            continue
        cols.append(parallel_map(
            lambda sd: kern.edge_up_counts(sd, KERNELS[kernel], table, k, j0, j1), seeds, threads))
    return np.stack(cols, axis=1)


def poisson_edge_check(k: int, s: float, t: float, n: int, replicas: int, seed: int = 0,
                       threads: int = 1) -> CheckResult:
    """Chi-square of ``J_n(k, s, t)`` against Poisson(k ln(t/s))."""
    j = edge_counts_mc([(k, s, t)], n, replicas, seed, threads=threads)[:, 0]
    mean = k * math.log(t / s)
    top = int(j.max())
    obs = np.bincount(j, minlength=top + 1).astype(float)
    probs = np.array([poisson_pmf(mean, i) for i in range(top + 1)])
    stat, dof, pv = chi_square_gof(obs, probs)
    return CheckResult("poisson-edge", stat, pv, pv > SIGNIFICANCE,
                       {"mean": mean, "empirical_mean": float(j.mean()), "dof": dof})


def log_time_change_check(seed: int, k: int, window: tuple[float, float], replicas: int,
                          n: int = 1000, threads: int = 1) -> CheckResult:
    """Exponential gaps after the change ``r -> ln r`` of an intensity-``k/r`` arrival set.

    The arrival set is the set of ``j / n`` with an Up arrow at ``(j, k)``
    of a Polya field, whose limit intensity is ``k/r``. After the change the
    window becomes ``[ln a, ln b]`` of length ``L``. The first gap from the
    left edge is Exp(k) truncated at ``L``; a KS test is applied to these
    first gaps over the replicas that saw an arrival. The estimated rate is
    the number of arrivals divided by ``replicas * L``.
    """
    a, b = float(window[0]), float(window[1])
    if not 0 < a < b:
        raise WindowEmpty("window must be a non-empty sub-interval of (0, inf)")
    kern = _backend.kernels
    seeds = kern.replica_seeds(_seed(seed), int(replicas))
    j0, j1 = math.ceil(n * a), math.floor(n * b)
    L = math.log(b) - math.log(a)
    table = np.zeros((1, 1))

    def first_and_count(sd):
        first = np.full(sd.shape[0], np.nan)
        count = np.zeros(sd.shape[0], dtype=np.int64)
        for i, s in enumerate(sd):
            pos = kern.edge_up_positions(int(s), 0, table, k, j0, j1)
            count[i] = pos.shape[0]
            if pos.shape[0]:
                first[i] = math.log(pos[0] / n) - math.log(a)
        return first, count

    first, count = parallel_map(first_and_count, seeds, threads)
    gaps = first[~np.isnan(first)]
    rate = float(count.sum()) / (replicas * L)
    rate_se = math.sqrt(max(count.sum(), 1)) / (replicas * L)
    if gaps.size == 0:
        return CheckResult("log-time-change", 0.0, 1.0, True,
                           {"rate": rate, "rate_se": rate_se, "gaps": 0})
    norm = 1.0 - math.exp(-k * L)
    res = stats.kstest(gaps, lambda x: (1.0 - np.exp(-k * np.asarray(x))) / norm)
    return CheckResult("log-time-change", float(res.statistic), float(res.pvalue),
                       float(res.pvalue) > SIGNIFICANCE,
                       {"rate": rate, "rate_se": rate_se, "gaps": int(gaps.size), "k": k})
