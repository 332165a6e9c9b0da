"""The compiled kernels and the numpy fallback must agree bit for bit."""

import numpy as np
import pytest

from polyaweb import _backend, _pykernels

pytestmark = pytest.mark.skipif("compiled" not in _backend.available_backends(),
                                reason="compiled extension not built")

C = _backend.get_backend("compiled") if "compiled" in _backend.available_backends() else None
PY = _pykernels
DUMMY = np.zeros((1, 1))
TABLE = np.random.default_rng(3).uniform(0.2, 0.8, size=(300, 300))
KERNELS = [(0, DUMMY), (1, DUMMY), (2, TABLE)]


def test_backend_selection():
    assert _backend.BACKEND in ("compiled", "python")
    assert _backend.get_backend("python") is _pykernels
    with pytest.raises(ValueError):
        _backend.get_backend("fortran")


def test_hash_streams():
    for seed in (0, 1, 2**63 + 5, 2**64 - 1):
        for tag in (PY.ARROW_TAG, PY.YULE_TAG, PY.REPLICA_TAG):
            assert C.stream_key(seed, tag) == PY.stream_key(seed, tag)
        assert np.array_equal(C.replica_seeds(seed, 50), PY.replica_seeds(seed, 50))
    ks = np.arange(0, 400, dtype=np.int64)
    ls = (ks * 7919) % 401
    assert np.array_equal(C.arrow_uniforms(11, ks, ls), PY.arrow_uniforms(11, ks, ls))


@pytest.mark.parametrize("kernel,table", KERNELS)
def test_walks_and_meetings(kernel, table):
    for seed in range(5):
        assert np.array_equal(C.walk_xs(seed, kernel, table, 1, 2, 250),
                              PY.walk_xs(seed, kernel, table, 1, 2, 250))
    seeds = PY.replica_seeds(7, 40)
    a = C.row_meeting_times(seeds, kernel, table, 6, 0, 6, 250)
    b = PY.row_meeting_times(seeds, kernel, table, 6, 0, 6, 250)
    assert np.array_equal(a, b)
    a = C.pair_meeting_times(seeds, kernel, table, 1, 3, 3, 1, 250)
    b = PY.pair_meeting_times(seeds, kernel, table, 1, 3, 3, 1, 250)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("kernel,table", KERNELS)
def test_edge_counts(kernel, table):
    seeds = PY.replica_seeds(9, 30)
    assert np.array_equal(C.edge_up_counts(seeds, kernel, table, 2, 10, 200),
                          PY.edge_up_counts(seeds, kernel, table, 2, 10, 200))
    assert np.array_equal(np.asarray(C.edge_up_positions(4, kernel, table, 1, 5, 250)),
                          np.asarray(PY.edge_up_positions(4, kernel, table, 1, 5, 250)))


def test_yule_kernels():
    for m in (1, 2, 5):
        for t in (0.0, 0.3, 2.7):
            assert C.next_arrival(3, m, t) == PY.next_arrival(3, m, t)
        for c in range(20):
            assert np.array_equal(np.asarray(C.yule_cell(3, m, c)), np.asarray(PY.yule_cell(3, m, c)))
    seeds = PY.replica_seeds(5, 60)
    times = np.array([0.5, 1.0, 2.0, 3.0])
    assert np.array_equal(C.yule_levels(seeds, 2, 0.0, times, 1 << 16),
                          PY.yule_levels(seeds, 2, 0.0, times, 1 << 16))
    ta, sa = C.yule_pair(seeds, 1, 0.0, 2, 0.0, 4.0, 512, 1 << 16)
    tb, sb = PY.yule_pair(seeds, 1, 0.0, 2, 0.0, 4.0, 512, 1 << 16)
    assert np.array_equal(sa, sb)
    assert np.array_equal(ta, tb, equal_nan=True)
