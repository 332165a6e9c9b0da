import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyaweb import geometry
from polyaweb.errors import HorizonBeforeBirth, KernelDomainError, PolyaOriginUndefined
from polyaweb.web import (Arrow, ArrowField, DualPoint, DualStep, LatticePoint, arrow_at,
                          dual_arrow_at, dual_exit, dual_walk, level_points, precedes,
                          strictly_precedes, trajectory_table, walk)


def test_lattice_point_basics():
    p = LatticePoint(2, 3)
    assert p.norm == 5
    assert p + Arrow.RIGHT == LatticePoint(3, 3)
    assert p + Arrow.UP == LatticePoint(2, 4)
    with pytest.raises(ValueError):
        LatticePoint(-1, 0)
    d = DualPoint.of(1, 2)
    assert d.coords == (1.5, 2.5)
    assert d.norm == 4


def test_precedes_mixed_lattices():
    assert precedes(LatticePoint(1, 2), LatticePoint(2, 1))
    assert not precedes(LatticePoint(2, 1), LatticePoint(1, 2))
    assert precedes(LatticePoint(1, 1), LatticePoint(1, 1))
    assert not strictly_precedes(LatticePoint(1, 1), LatticePoint(1, 1))
    assert precedes(LatticePoint(1, 3), DualPoint.of(1, 2))
    assert precedes((0.5, 3.5), (2, 2))


def test_axis_arrows_and_origin():
    f = ArrowField(5)
    for j in range(1, 30):
        assert arrow_at(f, (j, 0)) is Arrow.RIGHT
        assert arrow_at(f, (0, j)) is Arrow.UP
    with pytest.raises(PolyaOriginUndefined):
        arrow_at(f, (0, 0))
    with pytest.raises(PolyaOriginUndefined):
        walk(f, (0, 0), 3)
    assert len(walk(f, (0, 0), 0)) == 1


def test_walk_determinism_and_interleaving():
    f1, f2 = ArrowField(123), ArrowField(123)
    a = walk(f1, (1, 2), 200).xs
    walk(f1, (4, 4), 100)
    arrow_at(f1, (17, 3))
    b = walk(f1, (1, 2), 200).xs
    assert np.array_equal(a, b)
    assert np.array_equal(a, walk(f2, (1, 2), 200).xs)
    assert not np.array_equal(a, walk(ArrowField(124), (1, 2), 200).xs)


def test_walk_matches_arrows():
    f = ArrowField(9)
    path = walk(f, (1, 1), 60)
    for p, q in zip(path.positions[:-1], path.positions[1:]):
        assert p + arrow_at(f, p) == q
    assert path.end_time == 60
    with pytest.raises(HorizonBeforeBirth):
        walk(f, (3, 3), 5)


def test_region_matches_pointwise():
    f = ArrowField(77, "srw")
    R = f.region(15)
    for k in range(16):
        for l in range(16 - k):
            assert R[k, l] == f.is_right(k, l)


def test_custom_kernel_domain():
    f = ArrowField(1, "custom", table=np.full((5, 5), 0.5))
    with pytest.raises(KernelDomainError):
        walk(f, (1, 1), 20)
    with pytest.raises(ValueError):
        ArrowField(1, "unknown")


def test_dual_semantics():
    f = ArrowField(4)
    d = DualPoint.of(3, 2)
    step = dual_arrow_at(f, d)
    assert step is arrow_at(f, (3, 2)).negated()
    path = dual_walk(f, d)
    for p, q in zip(path.positions[:-1], path.positions[1:]):
        v = dual_arrow_at(f, p).vector
        assert (p.base.k + v[0], p.base.l + v[1]) == (q.base.k, q.base.l)
    # under the Polya kernel every dual reaches (1/2, 1/2)
    assert path.at(1).base == LatticePoint(0, 0)
    assert dual_exit(f, d) == "corner"
    assert isinstance(step, DualStep)


def test_srw_dual_exits_through_an_axis():
    f = ArrowField(2, "srw")
    exits = {dual_exit(f, DualPoint.of(k, 8 - k)) for k in range(9)}
    assert exits <= {"x", "y"}


def test_level_points():
    pts = level_points(5, 1, 3)
    assert [p.k for p in pts] == [1, 2, 3]
    assert all(p.norm == 5 for p in pts)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), k=st.integers(1, 20), l=st.integers(1, 20),
       dk=st.integers(0, 10), dl=st.integers(0, 10), horizon=st.integers(50, 64))
def test_order_preservation_property(seed, k, l, dk, dl, horizon):
    f = ArrowField(seed)
    a, b = LatticePoint(k, l + dl), LatticePoint(k + dk, l)
    pa, pb = walk(f, a, horizon), walk(f, b, horizon)
    for n in range(max(a.norm, b.norm), horizon + 1):
        assert precedes(pa.at(n), pb.at(n))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), k=st.integers(1, 10))
def test_absorption_property(seed, k):
    f = ArrowField(seed)
    pa, pb = walk(f, (k, k + 1), 64), walk(f, (k + 1, k), 64)
    met = False
    for n in range(2 * k + 1, 65):
        same = pa.at(n) == pb.at(n)
        assert same or not met
        met = met or same


@pytest.mark.parametrize("kernel", ["polya", "srw"])
def test_exhaustive_geometry_small(kernel):
    for seed in range(10):
        f = ArrowField(seed, kernel)
        tab = trajectory_table(f, 10)
        assert geometry.order_preservation_violations(f, 10, tab) == []
        assert geometry.absorption_violations(f, 10, tab) == []
        assert geometry.noncrossing_violations(f, 10, tab) == []
        assert geometry.separation_mismatches(f, 10, tab) == []


def test_checkers_detect_planted_errors():
    f = ArrowField(0)
    starts, P, duals, D, exits = trajectory_table(f, 8)
    P2 = P.copy()
    i = starts.index(LatticePoint(1, 2))
    P2[i, 8] = 2 * 8  # jump to the far right at the last time
    tab = (starts, P2, duals, D, exits)
    assert geometry.order_preservation_violations(f, 8, tab)
    assert geometry.separation_mismatches(f, 8, tab) or geometry.noncrossing_violations(f, 8, tab)
