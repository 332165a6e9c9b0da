"""Compare the compiled kernels with the numpy fallback.

Each case runs on both backends with identical inputs, checks that the
outputs agree exactly and reports the wall time and speed-up.

Usage: python benchmarks/bench_kernels.py [--scale 1.0]
"""

import argparse
import time

import numpy as np

from polyaweb import _backend, _pykernels

DUMMY = np.zeros((1, 1))


def cases(scale):
    r = max(2, int(200 * scale))
    seeds = _pykernels.replica_seeds(0, r)
    times = np.array([1.0, 2.0, 4.0])
    return {
        "walk_xs (horizon 10^5)": lambda k: k.walk_xs(1, 0, DUMMY, 1, 2, int(1e5 * scale)),
        f"row_meeting_times ({r} x n=100, horizon 10^4)":
            lambda k: k.row_meeting_times(seeds, 0, DUMMY, 100, 0, 100, 10**4),
        f"pair_meeting_times ({r * 10} pairs, horizon 10^4)":
            lambda k: k.pair_meeting_times(_pykernels.replica_seeds(1, r * 10), 0, DUMMY,
                                           1, 2, 2, 1, 10**4),
        f"edge_up_counts ({r} x 10^4 sites)":
            lambda k: k.edge_up_counts(seeds, 0, DUMMY, 1, 10**4, 2 * 10**4),
        f"yule_levels ({r * 10} walks, t=4)":
            lambda k: k.yule_levels(_pykernels.replica_seeds(2, r * 10), 2, 0.0, times, 1 << 16),
    }


def timed(fn, kern):
    t0 = time.perf_counter()
    out = fn(kern)
    return time.perf_counter() - t0, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b), equal_nan=np.asarray(a).dtype.kind == "f")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0, help="problem size multiplier")
    args = ap.parse_args()
    if "compiled" not in _backend.available_backends():
        raise SystemExit("compiled extension not built; run pip install -e . --no-build-isolation")
    comp, py = _backend.get_backend("compiled"), _backend.get_backend("python")
    print(f"{'kernel':<48} {'compiled s':>11} {'python s':>10} {'speed-up':>9}  equal")
    for name, fn in cases(args.scale).items():
        tc, a = timed(fn, comp)
        tp, b = timed(fn, py)
        print(f"{name:<48} {tc:>11.4f} {tp:>10.4f} {tp / max(tc, 1e-9):>9.1f}  {same(a, b)}")


if __name__ == "__main__":
    main()
