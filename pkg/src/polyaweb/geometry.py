"""Exhaustive checks of the order structure of the primal and dual webs.

Each function takes one arrow field, builds every primal and dual walk born
at times ``<= n_max`` and returns the list of violations found (empty when
the property holds). All comparisons are made at common times, where
"precedes" reduces to comparing doubled x-coordinates.
"""

from __future__ import annotations

import numpy as np

from .web import ArrowField, trajectory_table


def _defined(P):
    # the Polya walk from the origin has no first step and is left out
    return P[:, -1] >= 0


def _comparable_pairs(starts, P):
    ks = np.array([s.k for s in starts])
    ls = np.array([s.l for s in starts])
    ok = _defined(P)
    i, j = np.nonzero((ks[:, None] <= ks[None, :]) & (ls[:, None] >= ls[None, :])
                      & ok[:, None] & ok[None, :])
    keep = i != j
    return i[keep], j[keep]


def order_preservation_violations(field: ArrowField, n_max: int, table=None):
    """Pairs ``l1 >= l2`` whose walks swap order at some common time ``<= n_max``."""
    starts, P, _, _, _ = table or trajectory_table(field, n_max)
    i, j = _comparable_pairs(starts, P)
    born = np.maximum(np.array([s.norm for s in starts])[i], np.array([s.norm for s in starts])[j])
    t = np.arange(n_max + 1)
    live = t[None, :] >= born[:, None]
    bad = live & (P[i] > P[j])
    rows = np.nonzero(bad.any(axis=1))[0]
    return [(starts[i[r]], starts[j[r]]) for r in rows]


def absorption_violations(field: ArrowField, n_max: int, table=None):
    """Pairs that meet and later separate."""
    starts, P, _, _, _ = table or trajectory_table(field, n_max)
    norms = np.array([s.norm for s in starts])
    out = []
    idx = np.nonzero(_defined(P))[0]
    for a in idx:
        for b in idx[a + 1:]:
            t0 = max(norms[a], norms[b])
            eq = P[a, t0:] == P[b, t0:]
            if eq.any():
                first = int(np.argmax(eq))
                if not eq[first:].all():
                    out.append((starts[a], starts[b]))
    return out


def noncrossing_violations(field: ArrowField, n_max: int, table=None):
    """Dual/primal pairs that change sides while both are defined.

    For each primal walk from ``lam`` and each dual walk born at ``N >= |lam|``,
    the side at time ``N`` must persist at every time in ``[|lam|, N]`` where
    the dual is defined. A dual that leaves the quadrant after ``|lam|`` must
    leave through the axis on its own side: the y-axis for a dual on the
    left, the x-axis for one on the right.
    """
    starts, P, duals, D, exits = table or trajectory_table(field, n_max)
    bad = []
    t = np.arange(n_max + 1)
    pn = np.array([s.norm for s in starts])
    for d_i, d in enumerate(duals):
        N = d.norm
        defined = D[d_i] >= 0
        end = int(t[defined].min())
        cand = np.nonzero((pn <= N) & _defined(P))[0]
        left = D[d_i, N] < P[cand, N]
        for c, is_left in zip(cand, left):
            window = defined & (t >= pn[c]) & (t <= N)
            side = D[d_i, window] < P[c, window]
            if not np.all(side == is_left):
                bad.append((starts[c], d, "crossed"))
                continue
            if end > pn[c] and exits[d_i] != ("y" if is_left else "x"):
                bad.append((starts[c], d, "exit " + exits[d_i]))
    return bad


def separation_mismatches(field: ArrowField, n_max: int, table=None):
    """Cases where "not met by N" and "separated by a dual born at N" disagree.

    For comparable starts ``l1 >= l2`` and each ``N`` up to ``n_max``, the walks
    are apart at ``N`` exactly when some dual walk born at ``N`` lies strictly
    between them at every time from ``max(|l1|, |l2|)`` to ``N``.
    """
    starts, P, duals, D, _ = table or trajectory_table(field, n_max)
    i, j = _comparable_pairs(starts, P)
    norms = np.array([s.norm for s in starts])
    dn = np.array([d.norm for d in duals])
    t = np.arange(n_max + 1)
    out = []
    for N in range(1, n_max + 1):
        sel = np.maximum(norms[i], norms[j]) <= N
        ii, jj = i[sel], j[sel]
        if ii.size == 0:
            continue
        apart = P[ii, N] < P[jj, N]
        dd = np.nonzero(dn == N)[0]
        born = np.maximum(norms[ii], norms[jj])
        window = (t[None, :] >= born[:, None]) & (t[None, :] <= N)
        Dd = D[dd]
        between = (P[ii][:, None, :] < Dd[None, :, :]) & (Dd[None, :, :] < P[jj][:, None, :])
        between &= Dd[None, :, :] >= 0
        ok = np.all(between | ~window[:, None, :], axis=2).any(axis=1)
        for r in np.nonzero(ok != apart)[0]:
            out.append((starts[ii[r]], starts[jj[r]], N))
    return out
