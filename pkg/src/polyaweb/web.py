"""Arrow field on the quadrant, primal and dual coalescing walks.

The field is lazy: the arrow at ``(k, l)`` is derived from a counter-based
hash of ``(seed, k, l)``, so an :class:`ArrowField` stores nothing but its
seed and kernel, and any query order gives the same arrows.

Dual points live on the shifted lattice ``N x N + (1/2, 1/2)``. They are
stored by their integer base point; comparisons between primal and dual
points are carried out in doubled integer coordinates.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend, _pykernels
from .errors import HorizonBeforeBirth, KernelDomainError, PolyaOriginUndefined

__all__ = [
    "LatticePoint",
    "DualPoint",
    "Arrow",
    "DualStep",
    "ArrowField",
    "WalkPath",
    "arrow_at",
    "walk",
    "dual_arrow_at",
    "dual_walk",
    "precedes",
    "strictly_precedes",
    "KERNELS",
    "dual_exit",
    "trajectory_table",
    "level_points",
]

KERNELS = {"polya": 0, "srw": 1, "custom": 2}
_DUMMY_TABLE = np.zeros((1, 1), dtype=np.float64)


@dataclass(frozen=True, order=True)
class LatticePoint:
    """Point ``(k, l)`` of the quadrant; ``norm`` is its universal birth time."""

    k: int
    l: int

    def __post_init__(self):
        if self.k < 0 or self.l < 0:
            raise ValueError(f"lattice point must be in the quadrant, got ({self.k}, {self.l})")

    @property
    def norm(self) -> int:
        return self.k + self.l

    def doubled(self) -> tuple[int, int]:
        return (2 * self.k, 2 * self.l)

    def __add__(self, step) -> "LatticePoint":
        dx, dy = step.vector if isinstance(step, (Arrow, DualStep)) else step
        return LatticePoint(self.k + dx, self.l + dy)

    def __iter__(self):
        yield self.k
        yield self.l

    def __repr__(self) -> str:
        return f"({self.k}, {self.l})"


@dataclass(frozen=True, order=True)
class DualPoint:
    """Dual lattice point ``base + (1/2, 1/2)``."""

    base: LatticePoint

    @classmethod
    def of(cls, k: int, l: int) -> "DualPoint":
        return cls(LatticePoint(k, l))

    @property
    def norm(self) -> int:
        return self.base.k + self.base.l + 1

    @property
    def coords(self) -> tuple[float, float]:
        return (self.base.k + 0.5, self.base.l + 0.5)

    def doubled(self) -> tuple[int, int]:
        return (2 * self.base.k + 1, 2 * self.base.l + 1)

    def __repr__(self) -> str:
        return f"({self.base.k}+1/2, {self.base.l}+1/2)"


class Arrow(enum.Enum):
    RIGHT = (1, 0)
    UP = (0, 1)

    @property
    def vector(self) -> tuple[int, int]:
        return self.value

    def negated(self) -> "DualStep":
        return DualStep.LEFT if self is Arrow.RIGHT else DualStep.DOWN


class DualStep(enum.Enum):
    """Step of a dual walk, the negation of the primal arrow at its base."""

    LEFT = (-1, 0)
    DOWN = (0, -1)

    @property
    def vector(self) -> tuple[int, int]:
        return self.value


class ArrowField:
    """Seeded field of independent Right/Up arrows on the quadrant.

    Parameters
    ----------
    seed : int
        Any integer; it is reduced modulo ``2**64``.
    kernel : {"polya", "srw", "custom"}
        ``"polya"`` steps right with probability ``k/(k+l)``, ``"srw"`` with
        probability 1/2, ``"custom"`` with ``table[k, l]``.
    table : array_like, optional
        Right-step probabilities for the custom kernel.

    Notes
    -----
    The arrow at ``(k, l)`` is Right iff ``u(seed, k, l) < p(k, l)`` where
    ``u`` is built from the splitmix64 finaliser::

        key = mix64(seed + 0x41 * 0x9E3779B97F4A7C15)
        h   = mix64(mix64(key ^ k * 0xD1B54A32D192ED03) ^ l * 0xABC98388FB8FAC03)
        u   = (h >> 11) * 2**-53

    all arithmetic modulo ``2**64``.
    """

    __slots__ = ("seed", "kernel", "kernel_code", "table", "_key")

    def __init__(self, seed: int = 0, kernel: str = "polya", table=None):
        if kernel not in KERNELS:
            raise ValueError(f"unknown kernel {kernel!r}; expected one of {sorted(KERNELS)}")
        self.seed = int(seed) % (1 << 64)
        self.kernel = kernel
        self.kernel_code = KERNELS[kernel]
        if kernel == "custom":
            if table is None:
                raise ValueError("the custom kernel needs a probability table")
            tab = np.ascontiguousarray(table, dtype=np.float64)
            if tab.ndim != 2 or np.any((tab < 0) | (tab > 1)):
                raise ValueError("custom table must be a 2-d array of probabilities")
            self.table = tab
        else:
            self.table = _DUMMY_TABLE
        self._key = _pykernels.stream_key(self.seed, _pykernels.ARROW_TAG)

    def __repr__(self) -> str:
        return f"ArrowField(seed={self.seed}, kernel={self.kernel!r})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ArrowField)
            and self.seed == other.seed
            and self.kernel == other.kernel
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self) -> int:
        return hash((self.seed, self.kernel))

    def prob_right(self, k: int, l: int) -> float:
        if self.kernel_code == 0:
            if k == 0 and l == 0:
                raise PolyaOriginUndefined("Polya kernel is undefined at (0, 0)")
            return k / (k + l)
        if self.kernel_code == 1:
            return 0.5
        if k >= self.table.shape[0] or l >= self.table.shape[1]:
            raise KernelDomainError(f"custom kernel table does not cover ({k}, {l})")
        return float(self.table[k, l])

    def uniform(self, k: int, l: int) -> float:
        h = _pykernels.mix64_int(self._key ^ ((k * _pykernels.C1) & _pykernels.MASK))
        h = _pykernels.mix64_int(h ^ ((l * _pykernels.C2) & _pykernels.MASK))
        return (h >> 11) * _pykernels.TWO_M53

    def is_right(self, k: int, l: int) -> bool:
        p = self.prob_right(k, l)
        # the axis shortcuts of the Polya kernel hold for any uniform
        return self.uniform(k, l) < p

    def arrow(self, k: int, l: int) -> Arrow:
        return Arrow.RIGHT if self.is_right(k, l) else Arrow.UP

    def region(self, n_max: int) -> np.ndarray:
        """Boolean array ``R[k, l]`` (Right) for all points with ``k + l <= n_max``.

        Entries outside the triangle are False. The origin is False under the
        Polya kernel.
        """
        ks, ls = np.meshgrid(np.arange(n_max + 1), np.arange(n_max + 1), indexing="ij")
        mask = ks + ls <= n_max
        if self.kernel_code == 0:
            mask &= (ks + ls) > 0
        kk = ks[mask].astype(np.int64)
        ll = ls[mask].astype(np.int64)
        u = _pykernels.arrow_uniforms(self.seed, kk, ll)
        if self.kernel_code == 0:
            p = kk / (kk + ll)
        elif self.kernel_code == 1:
            p = np.full(kk.shape, 0.5)
        else:
            if kk.max(initial=0) >= self.table.shape[0] or ll.max(initial=0) >= self.table.shape[1]:
                raise KernelDomainError("custom kernel table does not cover the region")
            p = self.table[kk, ll]
        out = np.zeros(ks.shape, dtype=bool)
        out[mask] = u < p
        return out


@dataclass(frozen=True)
class WalkPath:
    """Trajectory of a primal (upward) or dual (downward) walk.

    ``xs[i]`` is the x-coordinate (of the base, for dual walks) at universal
    time ``times[i]``; the y-coordinate follows from the time.
    """

    start: object
    xs: np.ndarray
    dual: bool = False

    @property
    def start_time(self) -> int:
        return self.start.norm

    def __len__(self) -> int:
        return int(self.xs.shape[0])

    @property
    def times(self) -> np.ndarray:
        step = -1 if self.dual else 1
        return self.start_time + step * np.arange(len(self), dtype=np.int64)

    @property
    def end_time(self) -> int:
        return int(self.times[-1])

    @property
    def positions(self) -> list:
        return [self.at(int(t)) for t in self.times]

    def at(self, n: int):
        """Point occupied at universal time ``n``."""
        if self.dual:
            i = self.start_time - n
            if not 0 <= i < len(self):
                raise IndexError(f"dual walk is not defined at time {n}")
            x = int(self.xs[i])
            return DualPoint(LatticePoint(x, n - 1 - x))
        i = n - self.start_time
        if not 0 <= i < len(self):
            raise IndexError(f"walk is not defined at time {n}")
        x = int(self.xs[i])
        return LatticePoint(x, n - x)


def _as_point(p) -> LatticePoint:
    return p if isinstance(p, LatticePoint) else LatticePoint(*p)


def arrow_at(field: ArrowField, lam) -> Arrow:
    """Arrow of ``field`` at lattice point ``lam``.

    Raises
    ------
    PolyaOriginUndefined
        For the Polya kernel at the origin.
    """
    lam = _as_point(lam)
    return field.arrow(lam.k, lam.l)


def walk(field: ArrowField, lam, horizon: int) -> WalkPath:
    """Primal walk from ``lam`` followed up to universal time ``horizon``."""
    lam = _as_point(lam)
    if horizon < lam.norm:
        raise HorizonBeforeBirth(f"horizon {horizon} precedes birth time {lam.norm}")
    if lam.norm == 0 and field.kernel_code == 0 and horizon > 0:
        raise PolyaOriginUndefined("Polya kernel is undefined at (0, 0)")
    xs = _backend.kernels.walk_xs(field.seed, field.kernel_code, field.table,
                                  lam.k, lam.l, horizon)
    return WalkPath(lam, np.asarray(xs, dtype=np.int64))


def dual_arrow_at(field: ArrowField, d: DualPoint) -> DualStep:
    """Step of the dual walk at ``d``: the negated primal arrow at ``d.base``."""
    return field.arrow(d.base.k, d.base.l).negated()


def dual_walk(field: ArrowField, d: DualPoint) -> WalkPath:
    """Dual walk from ``d`` run down until its next step would leave the quadrant.

    The returned path ends at the last dual point inside the quadrant; the
    exit point is not stored.
    """
    k, l = d.base.k, d.base.l
    xs = [k]
    # from (1/2, 1/2) either step leaves the quadrant
    while k + l > 0:
        if field.is_right(k, l):
            if k == 0:
                break
            k -= 1
        else:
            if l == 0:
                break
            l -= 1
        xs.append(k)
    return WalkPath(d, np.asarray(xs, dtype=np.int64), dual=True)


def dual_exit(field: ArrowField, d: DualPoint) -> str:
    """Axis through which the dual walk from ``d`` leaves: ``"y"`` or ``"x"``.

    ``"y"`` means a left step was attempted at base x-coordinate 0. A walk
    ending at ``(1/2, 1/2)`` under the Polya kernel, where the arrow is
    undefined, returns ``"corner"``.
    """
    path = dual_walk(field, d)
    last = path.at(path.end_time).base
    if last.k == 0 and last.l == 0 and field.kernel_code == 0:
        return "corner"
    return "y" if field.is_right(last.k, last.l) else "x"


def trajectory_table(field: ArrowField, n_max: int):
    """All primal and dual walks born at times ``<= n_max``, in doubled x-coordinates.

    Returns ``(starts, P, duals, D, exits)``. ``P[i, n]`` is twice the
    x-coordinate of the walk from ``starts[i]`` at time ``n`` and ``-1``
    before its birth. ``D[d, n]`` is twice the x-coordinate of the dual walk
    from ``duals[d]`` at time ``n`` and ``-1`` where that walk is undefined.
    ``exits[d]`` is the axis reported by :func:`dual_exit`.

    At a common time, ``p`` precedes ``q`` exactly when its x-coordinate is
    not larger, so cross-lattice comparisons reduce to comparing these
    integers.
    """
    starts = [LatticePoint(k, t - k) for t in range(n_max + 1) for k in range(t + 1)]
    P = np.full((len(starts), n_max + 1), -1, dtype=np.int64)
    for i, s in enumerate(starts):
        if s.norm == 0 and field.kernel_code == 0:
            P[i, 0] = 0
            continue
        P[i, s.norm:] = 2 * walk(field, s, n_max).xs
    duals = [DualPoint(LatticePoint(k, t - 1 - k)) for t in range(1, n_max + 1) for k in range(t)]
    D = np.full((len(duals), n_max + 1), -1, dtype=np.int64)
    exits = []
    for d_i, d in enumerate(duals):
        path = dual_walk(field, d)
        D[d_i, path.times] = 2 * path.xs + 1
        exits.append(dual_exit(field, d))
    return starts, P, duals, D, exits


def _doubled(p) -> tuple[int, int]:
    if isinstance(p, (LatticePoint, DualPoint)):
        return p.doubled()
    x, y = p
    return (round(2 * x), round(2 * y))


def precedes(p1, p2) -> bool:
    """Partial order: ``p1`` is weakly above-left of ``p2`` (x1 <= x2, y1 >= y2).

    Accepts :class:`LatticePoint`, :class:`DualPoint` or coordinate pairs
    (half-integers allowed).
    """
    a, b = _doubled(p1), _doubled(p2)
    return a[0] <= b[0] and a[1] >= b[1]


def strictly_precedes(p1, p2) -> bool:
    a, b = _doubled(p1), _doubled(p2)
    return a[0] <= b[0] and a[1] >= b[1] and a != b


def level_points(n: int, j0: int = 0, j1: int | None = None) -> Sequence[LatticePoint]:
    """Points ``(j, n - j)`` for ``j0 <= j <= j1`` on the level-``n`` diagonal."""
    j1 = n if j1 is None else j1
    return [LatticePoint(j, n - j) for j in range(j0, j1 + 1)]
