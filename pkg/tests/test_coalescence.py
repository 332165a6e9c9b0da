import math
from fractions import Fraction

import numpy as np
import pytest

from polyaweb import coalescence as co
from polyaweb.determinant import expected_components_exact, pair_never_meet_prob
from polyaweb.errors import HorizonBeforeBirth, TooLarge
from polyaweb.web import ArrowField, walk


def _first_meeting(field, a, b, horizon):
    pa, pb = walk(field, a, horizon), walk(field, b, horizon)
    for n in range(max(sum(a), sum(b)), horizon + 1):
        if pa.at(n) == pb.at(n):
            return n
    return None


@pytest.mark.parametrize("kernel", ["polya", "srw"])
def test_meeting_time_matches_trajectories(kernel):
    for seed in range(40):
        f = ArrowField(seed, kernel)
        for a, b in [((1, 2), (2, 1)), ((1, 4), (3, 2)), ((2, 1), (1, 3))]:
            out = co.meeting_time(f, a, b, 80)
            ref = _first_meeting(f, a, b, 80)
            assert out.met == (ref is not None)
            if out.met:
                assert out.time == ref


def test_meeting_outcome_forms():
    assert co.MeetingOutcome.Met(5, 10).met
    nb = co.MeetingOutcome.NotByHorizon(10)
    assert not nb.met and nb.horizon == 10
    with pytest.raises(HorizonBeforeBirth):
        co.meeting_time(ArrowField(0), (3, 3), (4, 2), 5)


@pytest.mark.parametrize("kernel", ["polya", "srw"])
def test_components_two_ways(kernel):
    for seed in range(15):
        f = ArrowField(seed, kernel)
        cc = co.count_components(f, 12, 150)
        classes, distinct = co.components_by_trajectories(f, 12, 150)
        assert cc.count == classes == distinct
        assert cc.undecided_pairs == cc.count - 1


def test_union_find():
    uf = co.UnionFind(6)
    assert uf.union(0, 1) and uf.union(4, 5) and uf.union(1, 2)
    assert not uf.union(0, 2)
    assert uf.components == 3
    assert uf.find(2) == uf.find(0)


def test_threads_do_not_change_results():
    a = co.never_meet_indicators_mc("polya", 10, 500, 300, seed=4, threads=1)
    b = co.never_meet_indicators_mc("polya", 10, 500, 300, seed=4, threads=3)
    assert np.array_equal(a, b)


def test_backends_agree_on_mc():
    a = co.pair_meeting_mc("polya", (1, 2), (2, 1), 300, 100, seed=2, backend="python")
    b = co.pair_meeting_mc("polya", (1, 2), (2, 1), 300, 100, seed=2)
    assert np.array_equal(a, b)


def test_adjacent_pair_frequencies():
    n, reps = 5, 20000
    ind = co.never_meet_indicators_mc("polya", n, 4000, reps, seed=1)
    ref = np.array([float(pair_never_meet_prob(n, k)) for k in range(n)])
    se = np.sqrt(ref * (1 - ref) / reps)
    # finite horizon leaves a small bias toward "not met"
    assert np.all(np.abs(ind.mean(axis=0) - ref) < 4 * se + 0.01)
    assert ind[:, 0].all() and ind[:, -1].all()


def test_expected_components_small_levels():
    assert expected_components_exact(1) == 2
    assert expected_components_exact(2) == 3
    assert expected_components_exact(3) == Fraction(11, 3)


def test_chernoff_closed_form():
    up, lo = co.na_chernoff_bounds(0.5, 10.0)
    assert math.isclose(up, (math.e ** 0.5 / 1.5 ** 1.5) ** 10, rel_tol=1e-12)
    assert math.isclose(lo, (math.e ** -0.5 / 0.5 ** 0.5) ** 10, rel_tol=1e-12)
    with pytest.raises(ValueError):
        co.na_chernoff_bounds(1.5, 10.0)


def test_covariance_diagnostic_shape():
    d = co.indicator_covariances("polya", 4, 2000, 4000, seed=3)
    assert d.cov.shape == (4, 4)
    assert np.allclose(d.cov, d.cov.T)
    # the edge pairs never meet, so their indicators are constant
    assert d.cov[0, 0] == 0 and d.cov[-1, -1] == 0


def test_small_web_events_match_simulation():
    points, unmet = co.small_web_events(3)
    assert len(points) == 10
    # a configuration with every arrow Right keeps all walks apart
    assert all(unmet[n][j][(1 << 10) - 1] for n in unmet for j in unmet[n])
    with pytest.raises(TooLarge):
        co.small_web_events(4)


def test_box_oracle_level_two():
    rows = co.box_oracle_all(2)
    assert rows and all(ok for *_, ok in rows)


def test_strong_law_trace_rows():
    rows = co.strong_law_trace("polya", [50, 200], horizon_rule=50, replicas=200, seed=1)
    assert [r.n for r in rows] == [50, 200]
    assert rows[0].exact_ratio > rows[1].exact_ratio > 1
    assert all(abs(r.mc_ratio - r.exact_ratio) < 0.1 for r in rows)
