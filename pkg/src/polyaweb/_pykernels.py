"""Pure numpy fallback for the compiled kernels in ``_ckernels``.

Every function here returns bit-identical output to its compiled twin. The
loops are vectorised over replicas (and over walkers where possible), which
keeps the fallback usable for moderate sizes.
"""

import numpy as np

from .errors import KernelDomainError, PolyaOriginUndefined, YuleLevelCapExceeded

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
C1 = 0xD1B54A32D192ED03
C2 = 0xABC98388FB8FAC03
C3 = 0x8CB92BA72F3D8DD7
M1 = 0xBF58476D1CE4E5B9
M2 = 0x94D049BB133111EB
TWO_M53 = 2.0 ** -53
POISSON_MAX = 30

ARROW_TAG = 0x41
YULE_TAG = 0x59
REPLICA_TAG = 0x52

_U = np.uint64
_C1, _C2, _C3, _M1, _M2 = _U(C1), _U(C2), _U(C3), _U(M1), _U(M2)
_S11, _S27, _S30, _S31 = _U(11), _U(27), _U(30), _U(31)


def _poisson_cdf():
    p = 0.36787944117144233
    cdf = p
    out = [cdf]
    for k in range(1, POISSON_MAX):
        p = p / float(k)
        cdf = cdf + p
        out.append(cdf)
    return np.array(out)


_POISSON_CDF = _poisson_cdf()


def mix64_int(z):
    z &= MASK
    z = ((z ^ (z >> 30)) * M1) & MASK
    z = ((z ^ (z >> 27)) * M2) & MASK
    return z ^ (z >> 31)


def mix64(z):
    """Vectorised splitmix64 finaliser on ``uint64`` arrays."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _to_unit(h):
    return (h >> _S11).astype(np.float64) * TWO_M53


def _keys(seeds, tag):
    seeds = np.asarray(seeds, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(seeds + _U((tag * GOLDEN) & MASK))


def stream_key(seed, tag):
    return mix64_int((seed + tag * GOLDEN) & MASK)


def replica_seeds(seed, count):
    key = _U(stream_key(seed, REPLICA_TAG))
    idx = np.arange(count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(key ^ (idx * _C1))


def _arrow_u(keys, ks, ls):
    with np.errstate(over="ignore"):
        h = mix64(keys ^ (ks.astype(np.uint64) * _C1))
        h = mix64(h ^ (ls.astype(np.uint64) * _C2))
    return _to_unit(h)


def _is_right(keys, kernel, table, ks, ls):
    ks = np.asarray(ks, dtype=np.int64)
    ls = np.asarray(ls, dtype=np.int64)
    if kernel == 0:
        if np.any((ks == 0) & (ls == 0)):
            raise PolyaOriginUndefined("Polya kernel is undefined at (0, 0)")
        with np.errstate(invalid="ignore", divide="ignore"):
            p = ks.astype(np.float64) / (ks + ls).astype(np.float64)
    elif kernel == 1:
        p = np.full(ks.shape, 0.5)
    else:
        tab = np.asarray(table)
        if np.any(ks >= tab.shape[0]) or np.any(ls >= tab.shape[1]):
            raise KernelDomainError("custom kernel table does not cover a visited point")
        p = tab[ks, ls]
    return (_arrow_u(keys, ks, ls) < p).astype(np.int64)


def arrow_uniforms(seed, ks, ls):
    key = _U(stream_key(seed, ARROW_TAG))
    return _arrow_u(key, np.asarray(ks), np.asarray(ls))


def walk_xs(seed, kernel, table, k, l, horizon):
    """x-coordinates of the walk from (k, l) at times k+l, ..., horizon."""
    key = np.array([stream_key(seed, ARROW_TAG)], dtype=np.uint64)
    t0 = k + l
    out = np.empty(horizon - t0 + 1, dtype=np.int64)
    x = k
    out[0] = x
    for i in range(1, out.shape[0]):
        t = t0 + i - 1
        x += int(_is_right(key, kernel, table, np.array([x]), np.array([t - x]))[0])
        out[i] = x
    return out


def row_meeting_times(seeds, kernel, table, n, j0, j1, horizon):
    # adjacent walkers coalesce at their first common position, which is the
    # same instant the compiled group-merge loop records
    seeds = np.asarray(seeds, dtype=np.uint64)
    nrep, npts = seeds.shape[0], j1 - j0 + 1
    out = np.full((nrep, max(npts - 1, 0)), -1, dtype=np.int64)
    if npts < 2:
        return out
    keys = _keys(seeds, ARROW_TAG)[:, None]
    x = np.broadcast_to(np.arange(j0, j1 + 1, dtype=np.int64), (nrep, npts)).copy()
    t = n
    open_ = np.ones(out.shape, dtype=bool)
    while t < horizon and open_.any():
        # only rows with an unmet pair need stepping
        rows = np.flatnonzero(open_.any(axis=1))
        xr = x[rows]
        xr += _is_right(np.broadcast_to(keys[rows], xr.shape), kernel, table, xr, t - xr)
        x[rows] = xr
        t += 1
        hit = (xr[:, 1:] == xr[:, :-1]) & open_[rows]
        sub = out[rows]
        sub[hit] = t
        out[rows] = sub
        o = open_[rows]
        o[hit] = False
        open_[rows] = o
    return out


def pair_meeting_times(seeds, kernel, table, k1, l1, k2, l2, horizon):
    seeds = np.asarray(seeds, dtype=np.uint64)
    nrep = seeds.shape[0]
    keys = _keys(seeds, ARROW_TAG)
    x1 = np.full(nrep, k1, dtype=np.int64)
    x2 = np.full(nrep, k2, dtype=np.int64)
    n1, n2 = k1 + l1, k2 + l2
    for t in range(min(n1, n2), max(n1, n2)):
        if n1 < n2:
            x1 += _is_right(keys, kernel, table, x1, t - x1)
        else:
            x2 += _is_right(keys, kernel, table, x2, t - x2)
    t = max(n1, n2)
    out = np.full(nrep, -1, dtype=np.int64)
    act = np.ones(nrep, dtype=bool)
    while True:
        met = act & (x1 == x2)
        out[met] = t
        act &= ~met
        if t >= horizon or not act.any():
            break
        idx = np.flatnonzero(act)
        x1[idx] += _is_right(keys[idx], kernel, table, x1[idx], t - x1[idx])
        x2[idx] += _is_right(keys[idx], kernel, table, x2[idx], t - x2[idx])
        t += 1
    return out


def edge_up_counts(seeds, kernel, table, row, j0, j1):
    seeds = np.asarray(seeds, dtype=np.uint64)
    out = np.zeros(seeds.shape[0], dtype=np.int64)
    if j1 < j0:
        return out
    keys = _keys(seeds, ARROW_TAG)
    js = np.arange(j0, j1 + 1, dtype=np.int64)
    ls = np.full(js.shape, row, dtype=np.int64)
    # chunk over replicas to bound memory
    step = max(1, 4_000_000 // js.shape[0])
    for a in range(0, seeds.shape[0], step):
        kk = keys[a:a + step, None]
        r = _is_right(np.broadcast_to(kk, (kk.shape[0], js.shape[0])), kernel, table,
                      np.broadcast_to(js, (kk.shape[0], js.shape[0])),
                      np.broadcast_to(ls, (kk.shape[0], js.shape[0])))
        out[a:a + step] = js.shape[0] - r.sum(axis=1)
    return out


def edge_up_positions(seed, kernel, table, row, j0, j1):
    if j1 < j0:
        return np.empty(0, dtype=np.int64)
    key = _U(stream_key(seed, ARROW_TAG))
    js = np.arange(j0, j1 + 1, dtype=np.int64)
    r = _is_right(key, kernel, table, js, np.full(js.shape, row, dtype=np.int64))
    return js[r == 0]


# ---------------------------------------------------------------- Yule streams

def _cell_hash(keys, m, c):
    with np.errstate(over="ignore"):
        h = mix64(keys ^ (np.asarray(m).astype(np.uint64) * _C1))
        return mix64(h ^ (np.asarray(c).astype(np.uint64) * _C2))


def _cell_count(h):
    return np.searchsorted(_POISSON_CDF, _to_unit(h), side="right")


def _cell_pos(h, i, c, m):
    with np.errstate(over="ignore"):
        u = _to_unit(mix64(h ^ (_U(i + 1) * _C3)))
    return (c.astype(np.float64) + u) / m.astype(np.float64)


def _next_arrival(keys, m, t):
    """First arrival strictly after ``t`` on level ``m``, per replica."""
    keys = np.atleast_1d(np.asarray(keys, dtype=np.uint64))
    m = np.broadcast_to(np.asarray(m, dtype=np.int64), keys.shape).copy()
    t = np.broadcast_to(np.asarray(t, dtype=np.float64), keys.shape).copy()
    c = np.floor(t * m.astype(np.float64)).astype(np.int64)
    out = np.full(keys.shape, np.inf)
    pend = np.arange(keys.shape[0])
    while pend.size:
        kp, mp, cp, tp = keys[pend], m[pend], c[pend], t[pend]
        h = _cell_hash(kp, mp, cp)
        cnt = _cell_count(h)
        best = np.full(pend.shape, np.inf)
        for i in range(int(cnt.max()) if cnt.size else 0):
            pos = _cell_pos(h, i, cp, mp)
            ok = (i < cnt) & (pos > tp) & (pos < best)
            best[ok] = pos[ok]
        done = best < np.inf
        out[pend[done]] = best[done]
        c[pend[~done]] += 1
        pend = pend[~done]
    return out


def next_arrival(seed, m, t):
    key = np.array([stream_key(seed, YULE_TAG)], dtype=np.uint64)
    return float(_next_arrival(key, m, t)[0])


def yule_cell(seed, m, c):
    """Arrival times of level ``m`` inside cell ``[c/m, (c+1)/m)``, unsorted."""
    key = np.array([stream_key(seed, YULE_TAG)], dtype=np.uint64)
    mm = np.array([m], dtype=np.int64)
    cc = np.array([c], dtype=np.int64)
    h = _cell_hash(key, mm, cc)
    cnt = int(_cell_count(h)[0])
    return np.array([_cell_pos(h, i, cc, mm)[0] for i in range(cnt)], dtype=np.float64)


def yule_levels(seeds, k, s, times, vmax):
    seeds = np.asarray(seeds, dtype=np.uint64)
    times = np.asarray(times, dtype=np.float64)
    keys = _keys(seeds, YULE_TAG)
    nrep = keys.shape[0]
    out = np.empty((nrep, times.shape[0]), dtype=np.int64)
    m = np.full(nrep, k, dtype=np.int64)
    nxt = _next_arrival(keys, m, np.full(nrep, s)) if nrep else np.empty(0)
    for i, ti in enumerate(times):
        while True:
            idx = np.flatnonzero(nxt <= ti)
            if idx.size == 0:
                break
            m[idx] += 1
            if np.any(m[idx] > vmax):
                raise YuleLevelCapExceeded("Yule walk exceeded the maximal level")
            nxt[idx] = _next_arrival(keys[idx], m[idx], nxt[idx])
        out[:, i] = m
    return out


def yule_pair(seeds, k1, s1, k2, s2, t_end, sum_cap, vmax):
    """Meeting of two Yule walks on shared streams; see the compiled twin."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    keys = _keys(seeds, YULE_TAG)
    nrep = keys.shape[0]
    if s1 > s2:
        k1, s1, k2, s2 = k2, s2, k1, s1
    tout = np.full(nrep, np.nan)
    sout = np.ones(nrep, dtype=np.int8)
    if nrep == 0:
        return tout, sout
    m1 = np.full(nrep, k1, dtype=np.int64)
    m2 = np.full(nrep, k2, dtype=np.int64)
    tb = s2
    # bring the earlier-born walk up to the later birth time
    t = np.full(nrep, s1)
    idx = np.arange(nrep)
    while idx.size:
        tmp = _next_arrival(keys[idx], m1[idx], t[idx])
        go = tmp <= tb
        idx, tmp = idx[go], tmp[go]
        m1[idx] += 1
        t[idx] = tmp
        if np.any(m1[idx] > vmax):
            raise YuleLevelCapExceeded("Yule walk exceeded the maximal level")
    if tb > t_end:
        return tout, sout
    t[:] = tb
    a1 = _next_arrival(keys, m1, t)
    a2 = _next_arrival(keys, m2, t)
    act = np.ones(nrep, dtype=bool)
    while act.any():
        met = act & (m1 == m2)
        tout[met] = t[met]
        sout[met] = 0
        act &= ~met
        capped = act & (sum_cap > 0) & (m1 + m2 >= sum_cap)
        sout[capped] = 2
        act &= ~capped
        first = act & (a1 <= a2)
        second = act & ~(a1 <= a2)
        stop = (first & (a1 > t_end)) | (second & (a2 > t_end))
        act &= ~stop
        first &= ~stop
        second &= ~stop
        i1 = np.flatnonzero(first)
        t[i1] = a1[i1]
        m1[i1] += 1
        r1 = i1[m1[i1] != m2[i1]]
        if r1.size:
            a1[r1] = _next_arrival(keys[r1], m1[r1], t[r1])
        i2 = np.flatnonzero(second)
        t[i2] = a2[i2]
        m2[i2] += 1
        r2 = i2[m1[i2] != m2[i2]]
        if r2.size:
            a2[r2] = _next_arrival(keys[r2], m2[r2], t[r2])
        # the compiled loop checks the cap only on walks that did not just meet
        chk = np.concatenate([r1, r2])
        if chk.size and (np.any(m1[chk] > vmax) or np.any(m2[chk] > vmax)):
            raise YuleLevelCapExceeded("Yule walk exceeded the maximal level")
    return tout, sout
