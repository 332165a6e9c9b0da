"""Distributions attached to the Polya web and the Yule web.

Finite combinatorial probabilities are exact :class:`fractions.Fraction`
values. Real-valued densities and distribution functions are evaluated
through log-Gamma and the regularised incomplete Beta/Gamma functions of
:mod:`scipy.special`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special

from .errors import DegenerateDensity, PolyaOriginUndefined, SupportError

__all__ = [
    "RationalProb",
    "BetaParams",
    "psi",
    "beta_pdf",
    "beta_cdf",
    "beta_binomial_pmf",
    "rising",
    "gamma_pdf",
    "gamma_cdf",
    "negbinom_pmf",
    "poisson_pmf",
]

RationalProb = Fraction


def _kl(lam) -> tuple[int, int]:
    return (lam.k, lam.l) if hasattr(lam, "k") else (int(lam[0]), int(lam[1]))


@dataclass(frozen=True)
class BetaParams:
    """Integer Beta parameters; ``a = 0`` or ``b = 0`` is a point mass.

    The limit of the x-fraction of a Polya walk started at ``(k, l)`` is
    ``BetaParams(k, l)``.
    """

    a: int
    b: int

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.a + self.b < 1:
            raise ValueError(f"invalid Beta parameters ({self.a}, {self.b})")

    @classmethod
    def of(cls, lam) -> "BetaParams":
        return cls(*_kl(lam))

    @property
    def degenerate(self) -> bool:
        return self.a == 0 or self.b == 0

    @property
    def mean(self) -> float:
        return self.a / (self.a + self.b)


def _params(p) -> BetaParams:
    return p if isinstance(p, BetaParams) else BetaParams.of(p)


def psi(lam) -> Fraction:
    """Exact ratio ``k/(k+l)`` of the first coordinate."""
    k, l = _kl(lam)
    if k == 0 and l == 0:
        raise PolyaOriginUndefined("psi is undefined at (0, 0)")
    return Fraction(k, k + l)


def beta_pdf(p, x):
    """Beta(a, b) density; vectorised in ``x``, zero outside ``(0, 1)``.

    Raises
    ------
    DegenerateDensity
        If ``a = 0`` or ``b = 0``.
    """
    p = _params(p)
    if p.degenerate:
        raise DegenerateDensity(f"Beta({p.a}, {p.b}) is a point mass")
    x = np.asarray(x, dtype=np.float64)
    inside = (x > 0) & (x < 1)
    xs = np.where(inside, x, 0.5)
    logf = (p.a - 1) * np.log(xs) + (p.b - 1) * np.log1p(-xs) - special.betaln(p.a, p.b)
    out = np.where(inside, np.exp(logf), 0.0)
    # closed endpoints carry the limit value when it is finite
    if p.a == 1:
        out = np.where(x == 0, p.b, out)
    if p.b == 1:
        out = np.where(x == 1, p.a, out)
    return out if out.ndim else float(out)


def beta_cdf(p, x):
    """Beta(a, b) distribution function, step functions for point masses."""
    p = _params(p)
    x = np.asarray(x, dtype=np.float64)
    if p.a == 0:
        out = np.where(x >= 0, 1.0, 0.0)
    elif p.b == 0:
        out = np.where(x >= 1, 1.0, 0.0)
    else:
        out = special.betainc(p.a, p.b, np.clip(x, 0.0, 1.0))
    return out if out.ndim else float(out)


def rising(a: int, j: int) -> int:
    """Rising factorial ``a (a+1) ... (a+j-1)``."""
    out = 1
    for i in range(j):
        out *= a + i
    return out


def beta_binomial_pmf(lam, steps: int, j: int) -> Fraction:
    """Exact probability that a Polya walk from ``lam`` makes ``j`` Right steps in ``steps``.

    Equals ``C(m, j) a^(j) b^(m-j) / (a+b)^(m)`` with rising factorials,
    i.e. ``C(m, j) B(a+j, b+m-j) / B(a, b)`` whenever both parameters are positive.
    """
    a, b = _kl(lam)
    if a + b < 1:
        raise PolyaOriginUndefined("the walk from (0, 0) is undefined")
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if not 0 <= j <= steps:
        return Fraction(0)
    return Fraction(math.comb(steps, j) * rising(a, j) * rising(b, steps - j),
                    rising(a + b, steps))


def gamma_pdf(k: int, x):
    """Gamma(k, 1) density ``x^(k-1) e^(-x) / (k-1)!`` (zero for ``x < 0``)."""
    if k < 1:
        raise ValueError("Gamma shape must be a positive integer")
    x = np.asarray(x, dtype=np.float64)
    pos = x > 0
    xs = np.where(pos, x, 1.0)
    out = np.where(pos, np.exp((k - 1) * np.log(xs) - xs - special.gammaln(k)), 0.0)
    if k == 1:
        out = np.where(x == 0, 1.0, out)
    return out if out.ndim else float(out)


def gamma_cdf(k: int, x):
    if k < 1:
        raise ValueError("Gamma shape must be a positive integer")
    x = np.asarray(x, dtype=np.float64)
    out = special.gammainc(k, np.maximum(x, 0.0))
    return out if out.ndim else float(out)


def negbinom_pmf(k: int, p: float, n: int) -> float:
    """``P(V = n) = C(n-1, k-1) p^k (1-p)^(n-k)`` on ``n >= k``.

    This is the law of a Yule walk from level ``k`` after time ``t - s`` with
    ``p = exp(-(t - s))``.
    """
    if k < 1 or not 0 < p <= 1:
        raise ValueError("need k >= 1 and 0 < p <= 1")
    if n < k:
        raise SupportError(f"NegBinom({k}, p) is supported on n >= {k}, got {n}")
    if p == 1.0:
        return 1.0 if n == k else 0.0
    logv = (special.gammaln(n) - special.gammaln(k) - special.gammaln(n - k + 1)
            + k * math.log(p) + (n - k) * math.log1p(-p))
    return float(math.exp(logv))


def poisson_pmf(mean: float, j: int) -> float:
    if mean < 0 or j < 0:
        raise ValueError("need mean >= 0 and j >= 0")
    if mean == 0:
        return 1.0 if j == 0 else 0.0
    return float(math.exp(j * math.log(mean) - mean - special.gammaln(j + 1)))
