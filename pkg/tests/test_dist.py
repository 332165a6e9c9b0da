import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from polyaweb import dist
from polyaweb.errors import DegenerateDensity, PolyaOriginUndefined, SupportError
from polyaweb.web import ArrowField, walk
from polyaweb.yule import chi_square_gof


def test_psi_exact():
    assert dist.psi((1, 2)) == Fraction(1, 3)
    assert dist.psi((0, 5)) == 0
    with pytest.raises(PolyaOriginUndefined):
        dist.psi((0, 0))


@pytest.mark.parametrize("a,b", [(1, 1), (1, 2), (2, 1), (3, 5), (7, 2)])
def test_beta_against_scipy(a, b):
    x = np.linspace(0.01, 0.99, 41)
    assert np.allclose(dist.beta_pdf((a, b), x), stats.beta(a, b).pdf(x), rtol=1e-12)
    assert np.allclose(dist.beta_cdf((a, b), x), stats.beta(a, b).cdf(x), rtol=1e-12, atol=1e-15)


def test_beta_endpoints_and_degenerate():
    assert dist.beta_pdf((1, 2), 0.0) == 2.0
    assert dist.beta_pdf((2, 1), 1.0) == 2.0
    assert dist.beta_pdf((2, 2), 1.5) == 0.0
    with pytest.raises(DegenerateDensity):
        dist.beta_pdf((0, 3), 0.5)
    assert dist.beta_cdf((0, 3), 0.0) == 1.0
    assert dist.beta_cdf((3, 0), 0.99) == 0.0
    assert dist.beta_cdf((3, 0), 1.0) == 1.0


@pytest.mark.parametrize("lam,m", [((1, 1), 6), ((1, 2), 9), ((4, 3), 12)])
def test_beta_binomial_against_scipy(lam, m):
    ref = stats.betabinom(m, *lam)
    probs = [dist.beta_binomial_pmf(lam, m, j) for j in range(m + 1)]
    assert sum(probs) == 1
    assert all(isinstance(p, Fraction) for p in probs)
    assert np.allclose([float(p) for p in probs], ref.pmf(np.arange(m + 1)), rtol=1e-12)
    assert dist.beta_binomial_pmf(lam, m, m + 1) == 0


def test_beta_binomial_on_axis():
    assert dist.beta_binomial_pmf((3, 0), 5, 5) == 1
    assert dist.beta_binomial_pmf((0, 2), 4, 0) == 1


def test_polya_walk_right_counts_follow_beta_binomial():
    lam, m, reps = (1, 2), 8, 4000
    counts = np.zeros(m + 1)
    for seed in range(reps):
        xs = walk(ArrowField(seed), lam, lam[0] + lam[1] + m).xs
        counts[xs[-1] - lam[0]] += 1
    probs = np.array([float(dist.beta_binomial_pmf(lam, m, j)) for j in range(m + 1)])
    _, _, p_value = chi_square_gof(counts, probs)
    assert p_value > 1e-3


def test_gamma_and_negbinom_against_scipy():
    x = np.linspace(0, 12, 50)
    for k in (1, 2, 5):
        assert np.allclose(dist.gamma_pdf(k, x), stats.gamma(k).pdf(x), rtol=1e-12)
        assert np.allclose(dist.gamma_cdf(k, x), stats.gamma(k).cdf(x), rtol=1e-12)
        for p in (0.5, 0.1):
            for n in range(k, k + 30):
                assert math.isclose(dist.negbinom_pmf(k, p, n), stats.nbinom(k, p).pmf(n - k),
                                    rel_tol=1e-11)
    with pytest.raises(SupportError):
        dist.negbinom_pmf(3, 0.5, 2)


def test_poisson_pmf():
    for j in range(15):
        assert math.isclose(dist.poisson_pmf(1.0, j), stats.poisson(1.0).pmf(j), rel_tol=1e-12)
