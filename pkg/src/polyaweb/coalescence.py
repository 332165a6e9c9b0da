"""Meeting times, component counts and association diagnostics.

Monte Carlo helpers draw one independent arrow field per replica. Replica
seeds are derived from a master seed by a counter-based hash, replicas are
split into contiguous chunks for worker threads, and results are reassembled
in replica order, so every output is independent of the thread count.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _backend
from .determinant import (
    asymptotic_components,
    expected_components_exact,
    pair_never_meet_prob,
    regional_window,
)
from .errors import HorizonBeforeBirth, IndexOutOfRange, TooLarge, WindowEmpty
from .web import KERNELS, ArrowField, LatticePoint, _DUMMY_TABLE

__all__ = [
    "MeetingOutcome",
    "ComponentCount",
    "UnionFind",
    "meeting_time",
    "count_components",
    "regional_components",
    "components_by_trajectories",
    "replica_seeds",
    "parallel_map",
    "pair_meeting_mc",
    "component_counts_mc",
    "never_meet_indicators_mc",
    "na_chernoff_bounds",
    "indicator_covariances",
    "small_web_events",
    "box_equals_intersection_bruteforce",
    "box_oracle_all",
    "strong_law_trace",
]


@dataclass(frozen=True)
class MeetingOutcome:
    """Either ``Met(time)`` or ``NotByHorizon(horizon)``."""

    met: bool
    time: int | None
    horizon: int

    @classmethod
    def Met(cls, time: int, horizon: int) -> "MeetingOutcome":
        return cls(True, int(time), int(horizon))

    @classmethod
    def NotByHorizon(cls, horizon: int) -> "MeetingOutcome":
        return cls(False, None, int(horizon))

    def __repr__(self) -> str:
        return f"Met({self.time})" if self.met else f"NotByHorizon({self.horizon})"


@dataclass(frozen=True)
class ComponentCount:
    """Number of coalescence classes among walks started on one level.

    ``undecided_pairs`` counts adjacent pairs that had not met by the
    horizon; they are treated as never meeting.
    """

    n: int
    count: int
    undecided_pairs: int


class UnionFind:
    """Disjoint sets over ``0 .. size-1`` with path halving and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size
        self.components = size

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.components -= 1
        return True


def _pt(p) -> LatticePoint:
    return p if isinstance(p, LatticePoint) else LatticePoint(*p)


def _seed_arr(field: ArrowField) -> np.ndarray:
    return np.array([field.seed], dtype=np.uint64)


def meeting_time(field: ArrowField, lam1, lam2, horizon: int) -> MeetingOutcome:
    """First universal time at which the walks from ``lam1`` and ``lam2`` coincide."""
    lam1, lam2 = _pt(lam1), _pt(lam2)
    if horizon < max(lam1.norm, lam2.norm):
        raise HorizonBeforeBirth(f"horizon {horizon} precedes the later birth time")
    t = _backend.kernels.pair_meeting_times(
        _seed_arr(field), field.kernel_code, field.table,
        lam1.k, lam1.l, lam2.k, lam2.l, horizon)[0]
    return MeetingOutcome.Met(t, horizon) if t >= 0 else MeetingOutcome.NotByHorizon(horizon)


def _row(field: ArrowField, n: int, j0: int, j1: int, horizon: int) -> np.ndarray:
    if horizon < n:
        raise HorizonBeforeBirth(f"horizon {horizon} precedes level {n}")
    return _backend.kernels.row_meeting_times(
        _seed_arr(field), field.kernel_code, field.table, n, j0, j1, horizon)[0]


def count_components(field: ArrowField, n: int, horizon: int) -> ComponentCount:
    """Components among the walks from ``(j, n - j)``, ``j = 0 .. n``, by time ``horizon``."""
    if n < 1:
        raise IndexOutOfRange("level must be at least 1")
    unmet = int(np.count_nonzero(_row(field, n, 0, n, horizon) < 0))
    return ComponentCount(n, 1 + unmet, unmet)


def regional_components(field: ArrowField, n: int, alpha: float, beta_n: float,
                        horizon: int) -> ComponentCount:
    """Components among the walks started in the window ``|j - alpha n| <= beta_n``."""
    if beta_n < 1:
        raise WindowEmpty("beta_n must be at least 1")
    lo, hi = regional_window(n, alpha, beta_n)
    unmet = int(np.count_nonzero(_row(field, n, lo, hi, horizon) < 0))
    return ComponentCount(n, 1 + unmet, unmet)


def components_by_trajectories(field: ArrowField, n: int, horizon: int) -> tuple[int, int]:
    """Independent component count from full trajectories.

    Returns ``(union-find classes, distinct positions at the horizon)``;
    walks are united whenever they share a point at a common time.
    """
    from .web import walk

    paths = [walk(field, LatticePoint(j, n - j), horizon).xs for j in range(n + 1)]
    uf = UnionFind(n + 1)
    xs = np.stack(paths)
    for t in range(xs.shape[1]):
        col = xs[:, t]
        for a, b in zip(range(n), range(1, n + 1)):
            if col[a] == col[b]:
                uf.union(a, b)
        first = {}
        for i, x in enumerate(col):
            if x in first:
                uf.union(first[x], i)
            else:
                first[x] = i
    return uf.components, len(set(xs[:, -1].tolist()))


# ---------------------------------------------------------------- Monte Carlo

def replica_seeds(seed: int, replicas: int) -> np.ndarray:
    return _backend.kernels.replica_seeds(int(seed) % (1 << 64), int(replicas))


def parallel_map(fn: Callable[[np.ndarray], np.ndarray], seeds: np.ndarray,
                 threads: int = 1):
    """Apply ``fn`` to contiguous seed chunks and concatenate in replica order."""
    threads = max(1, int(threads))
    if threads == 1 or seeds.shape[0] < 2 * threads:
        return fn(seeds)
    chunks = np.array_split(seeds, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(fn, chunks))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(p) for p in zip(*parts))
    return np.concatenate(parts)


def _kernel_args(kernel: str, table):
    if kernel == "custom":
        return KERNELS[kernel], np.ascontiguousarray(table, dtype=np.float64)
    return KERNELS[kernel], _DUMMY_TABLE


def pair_meeting_mc(kernel: str, lam1, lam2, horizon: int, replicas: int, seed: int = 0,
                    threads: int = 1, table=None, backend=None) -> np.ndarray:
    """Meeting times (``-1`` for not met) of two walks over ``replicas`` fields."""
    lam1, lam2 = _pt(lam1), _pt(lam2)
    if horizon < max(lam1.norm, lam2.norm):
        raise HorizonBeforeBirth(f"horizon {horizon} precedes the later birth time")
    code, tab = _kernel_args(kernel, table)
    kern = _backend.get_backend(backend)
    seeds = kern.replica_seeds(int(seed) % (1 << 64), int(replicas))
    return parallel_map(
        lambda s: kern.pair_meeting_times(s, code, tab, lam1.k, lam1.l, lam2.k, lam2.l, horizon),
        seeds, threads)


def never_meet_indicators_mc(kernel: str, n: int, horizon: int, replicas: int, seed: int = 0,
                             threads: int = 1, j0: int = 0, j1: int | None = None,
                             table=None, backend=None) -> np.ndarray:
    """Boolean ``replicas x (j1 - j0)`` array: adjacent pair not met by the horizon."""
    if horizon < n:
        raise HorizonBeforeBirth(f"horizon {horizon} precedes level {n}")
    j1 = n if j1 is None else j1
    code, tab = _kernel_args(kernel, table)
    kern = _backend.get_backend(backend)
    seeds = kern.replica_seeds(int(seed) % (1 << 64), int(replicas))
    times = parallel_map(
        lambda s: kern.row_meeting_times(s, code, tab, n, j0, j1, horizon), seeds, threads)
    return times < 0


def component_counts_mc(kernel: str, n: int, horizon: int, replicas: int, seed: int = 0,
                        threads: int = 1, table=None, backend=None) -> np.ndarray:
    """Component count of level ``n`` for each replica field."""
    ind = never_meet_indicators_mc(kernel, n, horizon, replicas, seed, threads,
                                   table=table, backend=backend)
    return 1 + ind.sum(axis=1)


def na_chernoff_bounds(delta: float, mean: float) -> tuple[float, float]:
    """Chernoff bounds for sums of negatively associated indicators.

    Returns ``(upper, lower)`` with
    ``upper = (e^d / (1+d)^(1+d))^mean`` bounding ``P(X >= (1+d) mean)`` and
    ``lower = (e^-d / (1-d)^(1-d))^mean`` bounding ``P(X <= (1-d) mean)``.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if mean <= 0:
        raise ValueError("mean must be positive")
    up = math.exp(mean * (delta - (1 + delta) * math.log1p(delta)))
    lo = math.exp(mean * (-delta - (1 - delta) * math.log1p(-delta)))
    return up, lo


@dataclass
class CovarianceDiagnostic:
    cov: np.ndarray
    se: np.ndarray
    means: np.ndarray
    replicas: int

    def off_diagonal_ok(self, z: float = 4.0) -> bool:
        n = self.cov.shape[0]
        off = ~np.eye(n, dtype=bool)
        return bool(np.all(self.cov[off] <= z * self.se[off]))


def indicator_covariances(kernel: str, n: int, horizon: int, replicas: int, seed: int = 0,
                          threads: int = 1, table=None) -> CovarianceDiagnostic:
    """Empirical covariance matrix of the adjacent-pair never-meet indicators.

    ``se[i, j]`` is the standard error of the covariance estimator, the
    sample deviation of the centred products divided by ``sqrt(replicas)``.
    """
    if replicas < 2:
        raise ValueError("need at least two replicas")
    ind = never_meet_indicators_mc(kernel, n, horizon, replicas, seed, threads,
                                   table=table).astype(np.float64)
    means = ind.mean(axis=0)
    c = ind - means
    prod = c[:, :, None] * c[:, None, :]
    cov = prod.sum(axis=0) / (replicas - 1)
    se = prod.std(axis=0, ddof=1) / math.sqrt(replicas)
    return CovarianceDiagnostic(cov, se, means, replicas)


# ------------------------------------------------------- box-operation oracle

def small_web_events(N: int):
    """Enumerate every arrow configuration on ``{k + l <= N}``.

    Returns ``(points, unmet)`` where ``unmet[n][j]`` is a boolean array over
    the ``2**|points|`` configurations (bit ``i`` set means Right at
    ``points[i]``) marking the event that the adjacent pair
    ``((j-1, n-j+1), (j, n-j))`` at level ``n`` has not met by time ``N``.
    """
    if N > 3:
        raise TooLarge(f"exhaustive enumeration is limited to N <= 3, got {N}")
    # point (k, t - k) has bit index t (t + 1) / 2 + k
    points = [(k, t - k) for t in range(N + 1) for k in range(t + 1)]
    omegas = np.arange(1 << len(points), dtype=np.int64)
    unmet = {}
    for n in range(1, N + 1):
        xs = np.tile(np.arange(n + 1, dtype=np.int64), (omegas.shape[0], 1))
        for t in range(n, N):
            xs = xs + ((omegas[:, None] >> (t * (t + 1) // 2 + xs)) & 1)
        unmet[n] = {j: xs[:, j - 1] != xs[:, j] for j in range(1, n + 1)}
    return points, unmet


def _witness_table(event: np.ndarray, nbits: int) -> np.ndarray:
    # W[K, w]: every configuration agreeing with w on K lies in the event
    size = 1 << nbits
    omegas = np.arange(size, dtype=np.int64)
    out = np.empty((size, size), dtype=bool)
    ev = event.astype(np.int8)
    for K in range(size):
        keys = omegas & K
        m = np.ones(size, dtype=np.int8)
        np.minimum.at(m, keys, ev)
        out[K] = m[keys].astype(bool)
    return out


def box_equals_intersection_bruteforce(N: int, n: int, A: Iterable[int], B: Iterable[int],
                                       _cache: dict | None = None) -> bool:
    """Check ``I_A(N) & I_B(N) == I_A(N) [box] I_B(N)`` by exhaustive enumeration.

    ``I_A`` is the event that every adjacent pair with index in ``A`` has
    not met; the box event holds at ``w`` when disjoint witness sets
    ``K, L`` force ``I_A`` and ``I_B``. Since witnessing is monotone in the
    witness set, it suffices to take ``L`` as the complement of ``K``.
    """
    A, B = frozenset(A), frozenset(B)
    if A & B:
        raise ValueError("A and B must be disjoint")
    if not 1 <= n <= N:
        raise IndexOutOfRange(f"level {n} outside 1..{N}")
    if not A | B <= set(range(1, n + 1)):
        raise IndexOutOfRange(f"indices must lie in 1..{n}")
    cache = {} if _cache is None else _cache
    if ("events", N) not in cache:
        cache[("events", N)] = small_web_events(N)
    points, unmet = cache[("events", N)]
    nb = len(points)
    full = (1 << nb) - 1

    def event(S):
        ev = np.ones(1 << nb, dtype=bool)
        for j in S:
            ev &= unmet[n][j]
        return ev

    def witness(S):
        key = ("W", N, n, S)
        if key not in cache:
            cache[key] = _witness_table(event(S), nb)
        return cache[key]

    inter = event(A) & event(B)
    WA, WB = witness(A), witness(B)
    comp = full ^ np.arange(1 << nb)
    box = np.any(WA & WB[comp], axis=0)
    return bool(np.array_equal(inter, box))


def box_oracle_all(N: int = 3) -> list[tuple[int, frozenset, frozenset, bool]]:
    """Run the box oracle for every level ``n <= N`` and every disjoint ``A, B``."""
    cache: dict = {}
    rows = []
    for n in range(1, N + 1):
        for labels in itertools.product((0, 1, 2), repeat=n):
            A = frozenset(j + 1 for j, c in enumerate(labels) if c == 1)
            B = frozenset(j + 1 for j, c in enumerate(labels) if c == 2)
            rows.append((n, A, B, box_equals_intersection_bruteforce(N, n, A, B, cache)))
    return rows


# ------------------------------------------------------------------ strong law

@dataclass(frozen=True)
class StrongLawRow:
    n: int
    mc_mean: float
    mc_se: float
    exact: object
    exact_ratio: float
    mc_ratio: float


def strong_law_trace(kernel: str, levels: Sequence[int], horizon_rule=100, replicas: int = 0,
                     seed: int = 0, threads: int = 1, mc_levels: Sequence[int] | None = None):
    """Exact and simulated ``E[C_n] / sqrt(n pi)`` along increasing levels.

    ``horizon_rule`` is either a multiplier (horizon = rule * n) or a
    callable ``n -> horizon``. Monte Carlo runs only for ``mc_levels``
    (default: all levels when ``replicas > 0``).
    """
    levels = list(levels)
    if levels != sorted(levels):
        raise ValueError("levels must be sorted ascending")
    hz = horizon_rule if callable(horizon_rule) else (lambda n: int(horizon_rule * n))
    mc_levels = set(levels if mc_levels is None else mc_levels) if replicas > 0 else set()
    rows = []
    for n in levels:
        ex = expected_components_exact(n)
        asym = asymptotic_components(n)
        if n in mc_levels:
            c = component_counts_mc(kernel, n, hz(n), replicas, seed, threads)
            mean, se = float(c.mean()), float(c.std(ddof=1) / math.sqrt(len(c)))
        else:
            mean = se = float("nan")
        rows.append(StrongLawRow(n, mean, se, ex, float(ex) / asym, mean / asym))
    return rows


def diagonal_reference(n: int) -> np.ndarray:
    """Exact never-meet probabilities of the adjacent pairs at level ``n``."""
    return np.array([float(pair_never_meet_prob(n, k)) for k in range(n)])
