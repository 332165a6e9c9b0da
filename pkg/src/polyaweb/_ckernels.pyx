# cython: language_level=3
"""Compiled hot loops. Every function mirrors one in ``_pykernels`` bit for bit.

Status codes returned from the ``nogil`` sections are translated into the
package exceptions by the thin ``def`` wrappers.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, exp, INFINITY, NAN
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

from .errors import KernelDomainError, PolyaOriginUndefined, YuleLevelCapExceeded

cnp.import_array()

cdef extern from *:
    """
    #define PW_GOLDEN 0x9E3779B97F4A7C15ULL
    #define PW_C1 0xD1B54A32D192ED03ULL
    #define PW_C2 0xABC98388FB8FAC03ULL
    #define PW_C3 0x8CB92BA72F3D8DD7ULL
    #define PW_M1 0xBF58476D1CE4E5B9ULL
    #define PW_M2 0x94D049BB133111EBULL
    """
    const uint64_t GOLDEN "PW_GOLDEN"
    const uint64_t C1 "PW_C1"
    const uint64_t C2 "PW_C2"
    const uint64_t C3 "PW_C3"
    const uint64_t M1 "PW_M1"
    const uint64_t M2 "PW_M2"

cdef enum:
    ERR_NONE = 0
    ERR_ORIGIN = 1
    ERR_TABLE = 2
    ERR_VMAX = 3
    POISSON_MAX = 30
    C_ARROW_TAG = 0x41
    C_YULE_TAG = 0x59
    C_REPLICA_TAG = 0x52

cdef double TWO_M53 = 1.1102230246251565e-16

ARROW_TAG = C_ARROW_TAG
YULE_TAG = C_YULE_TAG
REPLICA_TAG = C_REPLICA_TAG


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


cdef inline uint64_t _stream_key(uint64_t seed, uint64_t tag) noexcept nogil:
    return mix64(seed + tag * GOLDEN)


cdef inline double _to_unit(uint64_t h) noexcept nogil:
    return <double>(h >> 11) * TWO_M53


cdef inline double _arrow_uniform(uint64_t key, int64_t k, int64_t l) noexcept nogil:
    cdef uint64_t h = mix64(key ^ (<uint64_t>k * C1))
    h = mix64(h ^ (<uint64_t>l * C2))
    return _to_unit(h)


cdef inline int _is_right(uint64_t key, int kernel, double[:, ::1] table,
                          int64_t k, int64_t l, int* err) noexcept nogil:
    cdef double p
    if kernel == 0:
        if k == 0:
            if l == 0:
                err[0] = ERR_ORIGIN
            return 0
        if l == 0:
            return 1
        p = <double>k / <double>(k + l)
    elif kernel == 1:
        p = 0.5
    else:
        if k >= table.shape[0] or l >= table.shape[1]:
            err[0] = ERR_TABLE
            return 0
        p = table[k, l]
    return 1 if _arrow_uniform(key, k, l) < p else 0


cdef _raise(int err):
    if err == ERR_ORIGIN:
        raise PolyaOriginUndefined("Polya kernel is undefined at (0, 0)")
    if err == ERR_TABLE:
        raise KernelDomainError("custom kernel table does not cover a visited point")
    if err == ERR_VMAX:
        raise YuleLevelCapExceeded("Yule walk exceeded the maximal level")


def stream_key(uint64_t seed, uint64_t tag):
    return _stream_key(seed, tag)


def replica_seeds(uint64_t seed, int64_t count):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.empty(count, dtype=np.uint64)
    cdef uint64_t key = _stream_key(seed, C_REPLICA_TAG)
    cdef int64_t i
    for i in range(count):
        out[i] = mix64(key ^ (<uint64_t>i * C1))
    return out


def arrow_uniforms(uint64_t seed, const int64_t[::1] ks, const int64_t[::1] ls):
    cdef Py_ssize_t i, n = ks.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef uint64_t key = _stream_key(seed, C_ARROW_TAG)
    for i in range(n):
        out[i] = _arrow_uniform(key, ks[i], ls[i])
    return out


def walk_xs(uint64_t seed, int kernel, double[:, ::1] table,
            int64_t k, int64_t l, int64_t horizon):
    """x-coordinates of the walk from (k, l) at times k+l, ..., horizon."""
    cdef int64_t t0 = k + l
    cdef int64_t length = horizon - t0 + 1
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(length, dtype=np.int64)
    cdef int64_t[::1] xs = out
    cdef uint64_t key = _stream_key(seed, C_ARROW_TAG)
    cdef int err = ERR_NONE
    cdef int64_t i, x = k, t = t0
    with nogil:
        xs[0] = x
        for i in range(1, length):
            x = x + _is_right(key, kernel, table, x, t - x, &err)
            if err:
                break
            t += 1
            xs[i] = x
    _raise(err)
    return out


cdef int _row_meetings(uint64_t key, int kernel, double[:, ::1] table,
                       int64_t n, int64_t j0, int64_t npts, int64_t horizon,
                       int64_t* gx, int64_t* gstart, int64_t[::1] out) noexcept nogil:
    # walkers (j, n - j), j = j0 .. j0 + npts - 1; out[i] = meeting time of
    # the adjacent pair (j0 + i, j0 + i + 1), -1 if not met by the horizon
    cdef int64_t ng = npts, g, w, t = n
    cdef int err = ERR_NONE
    for g in range(npts):
        gx[g] = j0 + g
        gstart[g] = g
    for g in range(npts - 1):
        out[g] = -1
    while t < horizon and ng > 1:
        for g in range(ng):
            gx[g] = gx[g] + _is_right(key, kernel, table, gx[g], t - gx[g], &err)
        if err:
            return err
        t += 1
        w = 0
        for g in range(1, ng):
            if gx[g] == gx[w]:
                out[gstart[g] - 1] = t
            else:
                w += 1
                gx[w] = gx[g]
                gstart[w] = gstart[g]
        ng = w + 1
    return ERR_NONE


def row_meeting_times(const uint64_t[::1] seeds, int kernel, double[:, ::1] table,
                      int64_t n, int64_t j0, int64_t j1, int64_t horizon):
    cdef Py_ssize_t r, nrep = seeds.shape[0]
    cdef int64_t npts = j1 - j0 + 1
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.empty((nrep, max(npts - 1, 0)), dtype=np.int64)
    cdef int64_t[:, ::1] ov = out
    cdef int64_t* gx = <int64_t*>malloc(npts * sizeof(int64_t))
    cdef int64_t* gstart = <int64_t*>malloc(npts * sizeof(int64_t))
    cdef int err = ERR_NONE
    try:
        with nogil:
            for r in range(nrep):
                err = _row_meetings(_stream_key(seeds[r], C_ARROW_TAG), kernel, table,
                                    n, j0, npts, horizon, gx, gstart, ov[r])
                if err:
                    break
    finally:
        free(gx)
        free(gstart)
    _raise(err)
    return out


def pair_meeting_times(const uint64_t[::1] seeds, int kernel, double[:, ::1] table,
                       int64_t k1, int64_t l1, int64_t k2, int64_t l2, int64_t horizon):
    cdef Py_ssize_t r, nrep = seeds.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(nrep, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef int64_t n1 = k1 + l1, n2 = k2 + l2
    cdef int64_t t, x1, x2, tb
    cdef uint64_t key
    cdef int err = ERR_NONE
    with nogil:
        for r in range(nrep):
            key = _stream_key(seeds[r], C_ARROW_TAG)
            x1 = k1
            x2 = k2
            # bring the earlier-born walk up to the later birth time
            if n1 < n2:
                t = n1
                while t < n2:
                    x1 = x1 + _is_right(key, kernel, table, x1, t - x1, &err)
                    t += 1
                tb = n2
            else:
                t = n2
                while t < n1:
                    x2 = x2 + _is_right(key, kernel, table, x2, t - x2, &err)
                    t += 1
                tb = n1
            if err:
                break
            t = tb
            ov[r] = -1
            while True:
                if x1 == x2:
                    ov[r] = t
                    break
                if t >= horizon:
                    break
                x1 = x1 + _is_right(key, kernel, table, x1, t - x1, &err)
                x2 = x2 + _is_right(key, kernel, table, x2, t - x2, &err)
                if err:
                    break
                t += 1
            if err:
                break
    _raise(err)
    return out


def edge_up_counts(const uint64_t[::1] seeds, int kernel, double[:, ::1] table,
                   int64_t row, int64_t j0, int64_t j1):
    cdef Py_ssize_t r, nrep = seeds.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.zeros(nrep, dtype=np.int64)
    cdef int64_t[::1] ov = out
    cdef int64_t j, c
    cdef uint64_t key
    cdef int err = ERR_NONE
    with nogil:
        for r in range(nrep):
            key = _stream_key(seeds[r], C_ARROW_TAG)
            c = 0
            for j in range(j0, j1 + 1):
                c += 1 - _is_right(key, kernel, table, j, row, &err)
            ov[r] = c
            if err:
                break
    _raise(err)
    return out


def edge_up_positions(uint64_t seed, int kernel, double[:, ::1] table,
                      int64_t row, int64_t j0, int64_t j1):
    cdef int64_t length = max(j1 - j0 + 1, 0)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] buf = np.empty(length, dtype=np.int64)
    cdef int64_t[::1] bv = buf
    cdef int64_t j, c = 0
    cdef uint64_t key = _stream_key(seed, C_ARROW_TAG)
    cdef int err = ERR_NONE
    with nogil:
        for j in range(j0, j1 + 1):
            if not _is_right(key, kernel, table, j, row, &err):
                bv[c] = j
                c += 1
    _raise(err)
    return buf[:c].copy()


# ---------------------------------------------------------------- Yule streams

cdef inline int64_t _poisson1(double u) noexcept nogil:
    cdef int64_t k = 0
    cdef double p = 0.36787944117144233
    cdef double cdf = p
    while u >= cdf and k < POISSON_MAX:
        k += 1
        p = p / <double>k
        cdf = cdf + p
    return k


cdef inline double _next_arrival(uint64_t key, int64_t m, double t) noexcept nogil:
    # cells of width 1/m, each holding Poisson(1) uniform points
    cdef int64_t c = <int64_t>floor(t * <double>m)
    cdef int64_t cnt, i
    cdef uint64_t h
    cdef double best, pos
    while True:
        h = mix64(key ^ (<uint64_t>m * C1))
        h = mix64(h ^ (<uint64_t>c * C2))
        cnt = _poisson1(_to_unit(h))
        best = INFINITY
        for i in range(cnt):
            pos = (<double>c + _to_unit(mix64(h ^ (<uint64_t>(i + 1) * C3)))) / <double>m
            if pos > t and pos < best:
                best = pos
        if best < INFINITY:
            return best
        c += 1


def next_arrival(uint64_t seed, int64_t m, double t):
    return _next_arrival(_stream_key(seed, C_YULE_TAG), m, t)


def yule_cell(uint64_t seed, int64_t m, int64_t c):
    """Arrival times of level ``m`` inside cell ``[c/m, (c+1)/m)``, unsorted."""
    cdef uint64_t key = _stream_key(seed, C_YULE_TAG)
    cdef uint64_t h = mix64(key ^ (<uint64_t>m * C1))
    h = mix64(h ^ (<uint64_t>c * C2))
    cdef int64_t cnt = _poisson1(_to_unit(h)), i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(cnt, dtype=np.float64)
    for i in range(cnt):
        out[i] = (<double>c + _to_unit(mix64(h ^ (<uint64_t>(i + 1) * C3)))) / <double>m
    return out


def yule_levels(const uint64_t[::1] seeds, int64_t k, double s,
                const double[::1] times, int64_t vmax):
    """Level of the walk born at (k, s) at each (sorted) time, per replica."""
    cdef Py_ssize_t r, i, nrep = seeds.shape[0], nt = times.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.empty((nrep, nt), dtype=np.int64)
    cdef int64_t[:, ::1] ov = out
    cdef uint64_t key
    cdef int64_t m
    cdef double t, nxt
    cdef int err = ERR_NONE
    with nogil:
        for r in range(nrep):
            key = _stream_key(seeds[r], C_YULE_TAG)
            m = k
            t = s
            nxt = _next_arrival(key, m, t)
            for i in range(nt):
                while nxt <= times[i]:
                    m += 1
                    if m > vmax:
                        err = ERR_VMAX
                        break
                    t = nxt
                    nxt = _next_arrival(key, m, t)
                if err:
                    break
                ov[r, i] = m
            if err:
                break
    _raise(err)
    return out


def yule_pair(const uint64_t[::1] seeds, int64_t k1, double s1, int64_t k2, double s2,
              double t_end, int64_t sum_cap, int64_t vmax):
    """Meeting of two Yule walks on shared streams.

    Returns ``(time, status)`` arrays; status 0 met, 1 horizon reached,
    2 level-sum cap reached (``sum_cap <= 0`` disables the cap).
    """
    cdef Py_ssize_t r, nrep = seeds.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tout = np.empty(nrep, dtype=np.float64)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] sout = np.empty(nrep, dtype=np.int8)
    cdef double[::1] tv = tout
    cdef cnp.int8_t[::1] sv = sout
    cdef uint64_t key
    cdef int64_t m1, m2
    cdef double a1, a2, t, tb, tmp
    cdef int err = ERR_NONE
    with nogil:
        for r in range(nrep):
            key = _stream_key(seeds[r], C_YULE_TAG)
            m1 = k1
            m2 = k2
            # walk 1 is the earlier born one
            if s1 <= s2:
                a1 = s1
                a2 = s2
            else:
                m1 = k2
                m2 = k1
                a1 = s2
                a2 = s1
            tb = a2
            t = a1
            while True:
                tmp = _next_arrival(key, m1, t)
                if tmp > tb:
                    break
                m1 += 1
                t = tmp
                if m1 > vmax:
                    err = ERR_VMAX
                    break
            if err:
                break
            t = tb
            tv[r] = NAN
            sv[r] = 1
            if tb > t_end:
                continue
            a1 = _next_arrival(key, m1, t)
            a2 = _next_arrival(key, m2, t)
            while True:
                if m1 == m2:
                    tv[r] = t
                    sv[r] = 0
                    break
                if sum_cap > 0 and m1 + m2 >= sum_cap:
                    sv[r] = 2
                    break
                if a1 <= a2:
                    if a1 > t_end:
                        break
                    t = a1
                    m1 += 1
                    if m1 == m2:
                        continue
                    a1 = _next_arrival(key, m1, t)
                else:
                    if a2 > t_end:
                        break
                    t = a2
                    m2 += 1
                    if m1 == m2:
                        continue
                    a2 = _next_arrival(key, m2, t)
                if m1 > vmax or m2 > vmax:
                    err = ERR_VMAX
                    break
            if err:
                break
    _raise(err)
    return tout, sout
