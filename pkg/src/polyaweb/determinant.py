"""Determinant formulas for coalescing Polya walks.

Contents
--------
* the finite-time Karlin-McGregor determinant in exact rationals, with an
  independent exhaustive-enumeration oracle;
* the ``2n x 2n`` joint density of the limiting x-fractions for a pattern of
  merged and separated walks, and its ordered-simplex integral;
* the closed-form pair never-meet probabilities and the component-count
  sums built from them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .dist import beta_binomial_pmf, beta_cdf, beta_pdf
from .errors import (
    AlphaOutOfRange,
    DegenerateBetaPoint,
    IndexOutOfRange,
    InfeasibleTarget,
    NotOrdered,
    TargetsNotIncreasing,
    UnsupportedOrder,
    WindowEmpty,
)
from .web import LatticePoint

__all__ = [
    "DensityQuery",
    "det_exact",
    "km_matrix",
    "km_finite_time_prob",
    "landing_prob_enumeration",
    "pattern_matrix",
    "joint_density",
    "integrate_ordered_simplex",
    "pattern_queries",
    "pattern_probabilities",
    "pair_never_meet_prob",
    "pair_terms",
    "expected_components_exact",
    "expected_components_float",
    "asymptotic_components",
    "regional_asymptotic",
    "regional_window",
    "regional_expected_components",
    "window_sum",
    "sqrt_pi_sum_check",
]

GL_NODES = 64
EXACT_LIMIT = 1000


def _pt(p) -> LatticePoint:
    return p if isinstance(p, LatticePoint) else LatticePoint(*p)


# ------------------------------------------------------------------ exact KM

def det_exact(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant of a square matrix of rationals by fraction-exact elimination."""
    a = [[Fraction(v) for v in row] for row in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            if a[r][c] != 0:
                f = a[r][c] / a[c][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def _check_starts(starts) -> list[LatticePoint]:
    starts = [_pt(s) for s in starts]
    if not starts:
        raise ValueError("need at least one start point")
    if len({s.norm for s in starts}) != 1:
        raise NotOrdered("start points must share the same universal time")
    if any(a.k >= b.k for a, b in zip(starts, starts[1:])):
        raise NotOrdered("start points must be strictly ordered left to right")
    return starts


def km_matrix(starts, targets, N: int) -> list[list[Fraction]]:
    """Matrix ``P(X_i(N) = targets[j])`` of single-walk marginals."""
    starts = _check_starts(starts)
    m = N - starts[0].norm
    if m < 0:
        raise ValueError(f"N = {N} precedes the start time {starts[0].norm}")
    return [[beta_binomial_pmf(s, m, kj - s.k) for kj in targets] for s in starts]


def km_finite_time_prob(starts, targets, N: int) -> Fraction:
    """Probability that coalescing Polya walks from ``starts`` sit at ``targets`` at time ``N``.

    Evaluated as the Karlin-McGregor determinant of single-walk marginals.

    Parameters
    ----------
    starts : sequence of LatticePoint
        Equal-norm points, strictly ordered by x-coordinate.
    targets : sequence of int
        Strictly increasing x-coordinates at time ``N``.
    N : int
        Observation time.

    Returns
    -------
    Fraction
    """
    starts = _check_starts(starts)
    targets = [int(t) for t in targets]
    if len(targets) != len(starts):
        raise ValueError("need exactly one target per start")
    if any(a >= b for a, b in zip(targets, targets[1:])):
        raise TargetsNotIncreasing(f"targets {targets} are not strictly increasing")
    m = N - starts[0].norm
    for s, kj in zip(starts, targets):
        if not s.k <= kj <= s.k + max(m, 0):
            raise InfeasibleTarget(f"target x={kj} unreachable from {s} in {m} steps")
    return det_exact(km_matrix(starts, targets, N))


def landing_prob_enumeration(starts, targets, N: int) -> Fraction:
    """Exact landing probability by enumerating the arrows the walks read.

    At each time the occupied points are distinct lattice points whose
    arrows are independent and never read again, so summing over every
    joint assignment of those arrows, step by step, is exhaustive over the
    reachable cone. Walks on the same point move together.
    """
    starts = _check_starts(starts)
    t0 = starts[0].norm
    states = {tuple(s.k for s in starts): Fraction(1)}
    for t in range(t0, N):
        nxt: dict[tuple[int, ...], Fraction] = {}
        for xs, pr in states.items():
            occ = sorted(set(xs))
            probs = []
            for x in occ:
                if x == 0 and t == 0:
                    raise ValueError("Polya kernel is undefined at (0, 0)")
                probs.append(Fraction(x, t))
            for bits in itertools.product((0, 1), repeat=len(occ)):
                w = pr
                for b, p in zip(bits, probs):
                    w *= p if b else 1 - p
                if w == 0:
                    continue
                move = dict(zip(occ, bits))
                key = tuple(x + move[x] for x in xs)
                nxt[key] = nxt.get(key, Fraction(0)) + w
        states = nxt
    return states.get(tuple(int(t) for t in targets), Fraction(0))


# ---------------------------------------------------------- joint density

@dataclass(frozen=True)
class DensityQuery:
    """Pattern ``l_1 >= r_1 > l_2 >= r_2 > ...`` of equal-norm start points.

    Each pair ``(l_i, r_i)`` stands for the event that all walks from
    ``l_i`` up to ``r_i`` share one limit, strictly below the next pair's.
    """

    pairs: tuple

    def __init__(self, pairs):
        norm_pairs = tuple((_pt(l), _pt(r)) for l, r in pairs)
        object.__setattr__(self, "pairs", norm_pairs)
        pts = [p for pr in norm_pairs for p in pr]
        if not pts:
            raise NotOrdered("empty density query")
        if len({p.norm for p in pts}) != 1:
            raise NotOrdered("all points of a density query must share one universal time")
        for l, r in norm_pairs:
            if l.k > r.k:
                raise NotOrdered(f"pair ({l}, {r}) is not ordered")
        for (_, r), (l2, _) in zip(norm_pairs, norm_pairs[1:]):
            if r.k >= l2.k:
                raise NotOrdered(f"consecutive pairs must be strictly ordered, got {r} and {l2}")

    @classmethod
    def distinct(cls, points) -> "DensityQuery":
        return cls([(p, p) for p in points])

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def points(self) -> list[LatticePoint]:
        return [p for pr in self.pairs for p in pr]

    @property
    def all_distinct(self) -> bool:
        return all(l == r for l, r in self.pairs)


def pattern_matrix(F: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Assemble the ``2n x 2n`` pattern matrix from distribution values.

    ``F[..., i, j]`` and ``f[..., i, j]`` are the distribution function and
    density of row point ``i`` (ordered ``l_1, r_1, ..., l_n, r_n``) at
    ``x_j``. Column ``2j`` holds ``1 - F`` for rows ``i <= 2j`` (0-based) and
    ``-F`` below; column ``2j + 1`` holds ``f``.
    """
    F = np.asarray(F, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    rows, n = F.shape[-2], F.shape[-1]
    if rows != 2 * n:
        raise ValueError("need 2n rows for n columns")
    out = np.empty(F.shape[:-2] + (rows, rows))
    i = np.arange(rows)[:, None]
    j = np.arange(n)[None, :]
    upper = i <= 2 * j
    out[..., 0::2] = np.where(upper, 1.0 - F, -F)
    out[..., 1::2] = f
    return out


def _check_query(query: DensityQuery):
    for p in query.points:
        if p.k == 0 or p.l == 0:
            raise DegenerateBetaPoint(f"{p} lies on an axis; its limit has no density")


def _density_grid(query: DensityQuery, X: np.ndarray) -> np.ndarray:
    # X: (M, n) ordered points; returns the density at each row of X
    n = query.n
    if query.all_distinct:
        f = np.stack([beta_pdf(l, X) for l, _ in query.pairs], axis=-2)
        return np.linalg.det(f) if n > 1 else f[..., 0, 0]
    pts = query.points
    F = np.stack([beta_cdf(p, X) for p in pts], axis=-2)
    f = np.stack([beta_pdf(p, X) for p in pts], axis=-2)
    return np.linalg.det(pattern_matrix(F, f))


def joint_density(query, x) -> float:
    """Joint density of the pattern ``query`` at ordered limits ``x``.

    For an all-distinct query this is ``det[f_{l_i}(x_j)]``; otherwise the
    ``2n x 2n`` determinant built by :func:`pattern_matrix`.
    """
    if not isinstance(query, DensityQuery):
        query = DensityQuery(query)
    _check_query(query)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (query.n,):
        raise NotOrdered(f"need {query.n} coordinates, got shape {x.shape}")
    if np.any(np.diff(x) <= 0) or x[0] <= 0 or x[-1] >= 1:
        raise NotOrdered("x must satisfy 0 < x_1 < ... < x_n < 1")
    return float(_density_grid(query, x[None, :])[0])


def _simplex_rule(n: int, lo: float = 0.0, hi: float = 1.0):
    """Nodes and weights on ``{lo < x_1 < ... < x_n < hi}`` by the nested map."""
    g, w = leggauss(GL_NODES)
    u = 0.5 * (g + 1.0)
    wu = 0.5 * w
    U = np.stack(np.meshgrid(*([u] * n), indexing="ij"), axis=-1).reshape(-1, n)
    W = np.prod(np.stack(np.meshgrid(*([wu] * n), indexing="ij"), axis=-1).reshape(-1, n), axis=1)
    X = np.empty_like(U)
    prev = np.full(U.shape[0], lo)
    for i in range(n):
        span = hi - prev
        X[:, i] = prev + span * U[:, i]
        W = W * span
        prev = X[:, i]
    return X, W


def _box_rule(boxes):
    g, w = leggauss(GL_NODES)
    axes, wts = [], []
    for a, b in boxes:
        axes.append(0.5 * (b - a) * g + 0.5 * (a + b))
        wts.append(0.5 * (b - a) * w)
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(boxes))
    W = np.prod(np.stack(np.meshgrid(*wts, indexing="ij"), axis=-1).reshape(-1, len(boxes)), axis=1)
    return X, W


def integrate_ordered_simplex(query, boxes=None) -> float:
    """Probability of the pattern ``query``: its density integrated over the ordered simplex.

    Parameters
    ----------
    query : DensityQuery or sequence of pairs
    boxes : sequence of (a, b), optional
        Restrict coordinate ``j`` to ``[a_j, b_j]``; boxes must be ordered
        and disjoint, which keeps the product of boxes inside the simplex.

    Notes
    -----
    Gauss-Legendre with 64 nodes per axis. The integrands are polynomials
    of modest degree, so the rule is exact up to rounding for start points
    with ``k + l <= 32``.
    """
    if not isinstance(query, DensityQuery):
        query = DensityQuery(query)
    if query.n > 3:
        raise UnsupportedOrder(f"quadrature supports at most 3 pairs, got {query.n}")
    _check_query(query)
    if boxes is None:
        X, W = _simplex_rule(query.n)
    else:
        boxes = [(float(a), float(b)) for a, b in boxes]
        if len(boxes) != query.n:
            raise ValueError("need one box per pair")
        if any(not 0 <= a < b <= 1 for a, b in boxes) or any(
            b1 > a2 for (_, b1), (a2, _) in zip(boxes, boxes[1:])
        ):
            raise NotOrdered("boxes must be ordered, disjoint sub-intervals of [0, 1]")
        X, W = _box_rule(boxes)
    return float(np.dot(W, _density_grid(query, X)))


def pattern_queries(points) -> list[DensityQuery]:
    """All merged/separated patterns of consecutive equal-norm points.

    A pattern splits the ordered points into contiguous blocks of walks
    sharing a limit; block ``[p_i .. p_j]`` becomes the pair ``(p_i, p_j)``.
    """
    pts = [_pt(p) for p in points]
    out = []
    for cuts in itertools.product((False, True), repeat=len(pts) - 1):
        pairs, first = [], 0
        for i, cut in enumerate(cuts, start=1):
            if cut:
                pairs.append((pts[first], pts[i - 1]))
                first = i
        pairs.append((pts[first], pts[-1]))
        out.append(DensityQuery(pairs))
    return out


def pattern_probabilities(points) -> dict:
    return {q.pairs: integrate_ordered_simplex(q) for q in pattern_queries(points)}


# ---------------------------------------------------- closed-form pair sums

def pair_never_meet_prob(n: int, k: int) -> Fraction:
    """``C(n-1, k)^2 / C(2(n-1), 2k)`` for the pair ``((k, n-k), (k+1, n-k-1))``."""
    if n < 1 or not 0 <= k <= n - 1:
        raise IndexOutOfRange(f"pair index k={k} outside 0..{n - 1} at level {n}")
    return Fraction(math.comb(n - 1, k) ** 2, math.comb(2 * (n - 1), 2 * k))


def pair_terms(n: int) -> np.ndarray:
    """Floating never-meet probabilities ``t(n, k)`` for ``k = 0 .. n-1``.

    Built from the exact term ratio
    ``t(k+1)/t(k) = (m-k)(2k+1) / ((k+1)(2m-2k-1))``, ``m = n - 1``, with the
    logarithms accumulated in extended precision; ``t(0) = 1``.
    """
    if n < 1:
        raise IndexOutOfRange("level must be at least 1")
    m = n - 1
    if m == 0:
        return np.ones(1)
    half = m // 2
    k = np.arange(half, dtype=np.float64)
    ratio = ((m - k) * (2 * k + 1)) / ((k + 1) * (2 * m - 2 * k - 1))
    logs = np.concatenate([[0.0], np.cumsum(np.log(ratio).astype(np.longdouble))])
    left = np.exp(logs).astype(np.float64)
    # symmetry t(k) = t(m - k)
    out = np.empty(m + 1)
    out[: half + 1] = left
    out[m - half:] = left[::-1]
    return out


def expected_components_exact(n: int, exact: bool | None = None):
    """``E[C_n] = 1 + sum_k t(n, k)``.

    Exact :class:`Fraction` for ``n <= 1000`` (or when ``exact=True``),
    a float otherwise.
    """
    if n < 1:
        raise IndexOutOfRange("level must be at least 1")
    if exact is None:
        exact = n <= EXACT_LIMIT
    if exact:
        return 1 + sum((pair_never_meet_prob(n, k) for k in range(n)), Fraction(0))
    return expected_components_float(n)


def expected_components_float(n: int) -> float:
    return 1.0 + math.fsum(pair_terms(n))


def asymptotic_components(n: int) -> float:
    """Leading order ``sqrt(n pi)`` of ``E[C_n]``."""
    if n < 1:
        raise IndexOutOfRange("level must be at least 1")
    return math.sqrt(n * math.pi)


def regional_asymptotic(alpha: float) -> float:
    """The stated regional limit ``1 / sqrt(pi alpha (1 - alpha))``."""
    if not 0 < alpha < 1:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha}")
    return 1.0 / math.sqrt(math.pi * alpha * (1.0 - alpha))


def regional_window(n: int, alpha: float, beta_n: float) -> tuple[int, int]:
    """Walker indices ``j`` with ``alpha n - beta_n <= j <= alpha n + beta_n``, clipped to ``[0, n]``."""
    if not 0 < alpha < 1:
        raise AlphaOutOfRange(f"alpha must lie in (0, 1), got {alpha}")
    lo = max(0, math.ceil(alpha * n - beta_n))
    hi = min(n, math.floor(alpha * n + beta_n))
    if lo > hi:
        raise WindowEmpty(f"no index in [{alpha * n - beta_n}, {alpha * n + beta_n}]")
    return lo, hi


def window_sum(n: int, k1: int, k2: int) -> float:
    """``sum_{k=k1}^{k2} t(n, k)`` in floating point."""
    if k1 > k2:
        raise WindowEmpty(f"empty index window [{k1}, {k2}]")
    if k1 < 0 or k2 > n - 1:
        raise IndexOutOfRange(f"window [{k1}, {k2}] outside 0..{n - 1}")
    return math.fsum(pair_terms(n)[k1:k2 + 1])


def regional_expected_components(n: int, alpha: float, beta_n: float):
    """Exact-formula mean of the regional component count.

    ``1 + sum`` of the never-meet probabilities of the adjacent pairs inside
    the window, matching what :func:`coalescence.regional_components` counts.
    Returns ``(mean, (j_lo, j_hi))``.
    """
    lo, hi = regional_window(n, alpha, beta_n)
    if hi == lo:
        return 1.0, (lo, hi)
    return 1.0 + window_sum(n, lo, hi - 1), (lo, hi)


def sqrt_pi_sum_check(n: int, epsilon: float) -> float:
    """``n^(-1/2) sum_{k=n1}^{n2} t(n, k)`` with ``n1 = ceil(eps sqrt n)``, ``n2 = n - n1``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    n1 = math.ceil(epsilon * math.sqrt(n))
    n2 = n - n1
    if n1 > n2:
        raise WindowEmpty(f"window [{n1}, {n2}] is empty")
    return window_sum(n, n1, min(n2, n - 1)) / math.sqrt(n)
