import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from polyaweb import yule
from polyaweb.coalescence import replica_seeds
from polyaweb.errors import EmptyWindow, NotOrdered, OverlappingBoxes, YuleLevelCapExceeded
from polyaweb.web import ArrowField


def test_arrivals_overlap_and_purity():
    a = yule.arrivals(3, 2, (0.0, 5.0)).times
    b = yule.arrivals(3, 2, (1.5, 3.0)).times
    assert np.array_equal(b, a[(a >= 1.5) & (a < 3.0)])
    assert np.all(np.diff(a) > 0)
    assert np.array_equal(a, yule.arrivals(3, 2, (0.0, 5.0)).times)
    with pytest.raises(EmptyWindow):
        yule.arrivals(3, 2, (1.0, 1.0))


def test_arrival_counts_vectorised():
    seeds = replica_seeds(4, 25)
    counts = yule.arrival_counts(seeds, 3, (0.2, 2.9))
    assert np.array_equal(counts, [len(yule.arrivals(int(s), 3, (0.2, 2.9))) for s in seeds])


def test_stream_rate_is_poisson():
    seeds = replica_seeds(8, 5000)
    c = yule.arrival_counts(seeds, 3, (0.0, 2.0))
    top = int(c.max())
    obs = np.bincount(c, minlength=top + 1)
    probs = stats.poisson(6.0).pmf(np.arange(top + 1))
    assert yule.chi_square_gof(obs, probs)[2] > 1e-3


def test_yule_walk_consistency():
    w = yule.yule_walk(5, 2, 0.5, 3.0)
    assert w.level_at(0.5) == 2
    assert w.level_at(3.0) == w.final_level
    lv = yule.yule_levels_mc(2, 0.5, [1.0, 2.0, 3.0], 1, seed=0)
    seed = int(replica_seeds(0, 1)[0])
    w = yule.yule_walk(seed, 2, 0.5, 3.0)
    assert list(lv[0]) == [w.level_at(1.0), w.level_at(2.0), w.level_at(3.0)]
    with pytest.raises(YuleLevelCapExceeded):
        yule.yule_walk(1, 1, 0.0, 12.0, vmax=50)


def test_yule_meeting_matches_walks():
    for seed in range(50):
        out = yule.yule_meeting(seed, (1, 0.0), (2, 0.0), 3.0)
        w1 = yule.yule_walk(seed, 1, 0.0, 3.0)
        w2 = yule.yule_walk(seed, 2, 0.0, 3.0)
        grid = np.union1d(w1.jump_times, w2.jump_times)
        same = [t for t in grid if w1.level_at(t) == w2.level_at(t)]
        assert out.met == bool(same)
        if out.met:
            assert out.time == same[0]


def test_urn_dp_against_closed_form():
    for k in (1, 2, 3):
        q = yule.urn_meet_prob(k, k + 1, 20000)
        never = float(yule.yule_pair_never_meet_prob(k))
        # the tail of the meeting time decays like cap^(-1/2)
        assert 0 < (1 - never) - q < 5 / math.sqrt(20000)
    with pytest.raises(NotOrdered):
        yule.urn_meet_prob(3, 2, 100)


def test_yule_pattern_quadrature():
    assert yule.yule_pair_never_meet_prob(1) == Fraction(1, 2)
    for k in (1, 2, 3):
        val = yule.integrate_yule_pattern([(k, k), (k + 1, k + 1)])
        assert math.isclose(val, float(yule.yule_pair_never_meet_prob(k)), abs_tol=1e-10)
    merged = yule.integrate_yule_pattern([(1, 2)])
    assert math.isclose(merged, 0.5, abs_tol=1e-10)
    assert math.isclose(yule.yule_joint_density([(1, 1), (2, 2)], [1.0, 2.0]), math.exp(-3),
                        rel_tol=1e-12)


def test_branching_pgf_identity():
    assert yule.branching_pgf_check(k=2, s=0.0, r=1.0, t=2.0, points=20) < 1e-12
    assert yule.branching_pgf_check(k=3, s=0.5, r=0.7, t=2.5, points=20) < 1e-12


def test_negbinom_marginal_small():
    res = yule.negbinom_check(2, math.log(2), 4000, seed=2)
    assert res.passed


def test_edge_counts_and_boxes():
    f = ArrowField(6)
    j = yule.joint_jump_counts(f, [(1, 1.0, 2.0), (2, 1.0, 2.0), (1, 2.5, 3.0)], 200)
    assert j.shape == (3,)
    ref = sum(not f.is_right(x, 1) for x in range(200, 401))
    assert j[0] == ref
    with pytest.raises(OverlappingBoxes):
        yule.joint_jump_counts(f, [(1, 1.0, 2.0), (1, 1.5, 3.0)], 200)


def test_edge_mc_backends_agree():
    a = yule.edge_counts_mc([(1, 1.0, math.e)], 300, 50, seed=1, backend="python")
    b = yule.edge_counts_mc([(1, 1.0, math.e)], 300, 50, seed=1)
    assert np.array_equal(a, b)
