# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels.  Semantics are pinned by ``_purepy.py``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint8_t, uint64_t

from ._common import OffSupport

cnp.import_array()

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

cdef enum:
    PREC = 62
cdef uint64_t FULL = (<uint64_t>1) << PREC
cdef uint64_t HALF = FULL >> 1
cdef uint64_t QUARTER = HALF >> 1
cdef uint64_t MASK = FULL - 1


def lz78_parse(const uint8_t[::1] x):
    cdef Py_ssize_t n = x.shape[0], i
    # node 0 is the root; at most n phrases
    cdef int64_t[::1] child0 = np.full(n + 1, -1, dtype=np.int64)
    cdef int64_t[::1] child1 = np.full(n + 1, -1, dtype=np.int64)
    cdef int64_t[::1] parent = np.zeros(n + 1, dtype=np.int64)
    cdef uint8_t[::1] last = np.zeros(n + 1, dtype=np.uint8)
    refs_arr = np.empty(n + 1, dtype=np.int64)
    bits_arr = np.empty(n + 1, dtype=np.uint8)
    cdef int64_t[::1] refs = refs_arr
    cdef uint8_t[::1] bits = bits_arr
    cdef int64_t node = 0, nodes = 1, c = 0, nxt
    cdef uint8_t b
    for i in range(n):
        b = x[i]
        nxt = child1[node] if b else child0[node]
        if nxt < 0:
            if b:
                child1[node] = nodes
            else:
                child0[node] = nodes
            parent[nodes] = node
            last[nodes] = b
            refs[c] = node
            bits[c] = b
            c += 1
            nodes += 1
            node = 0
        else:
            node = nxt
    if node:
        refs[c] = parent[node]
        bits[c] = last[node]
        c += 1
    return refs_arr[:c].copy(), bits_arr[:c].copy()


cdef inline uint64_t _split(uint64_t rng, int64_t a, int64_t q):
    return <uint64_t>((<u128>rng * <u128>(q - a)) / <u128>q)


def ac_encode(const uint8_t[::1] x, const int64_t[::1] p_num, const int64_t[::1] p_den,
              const int64_t[:, ::1] nxt, int64_t start):
    cdef Py_ssize_t n = x.shape[0], i, j
    cdef Py_ssize_t cap = n + 256, used = 0
    out_arr = np.empty(cap, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    cdef uint64_t low = 0, high = MASK, rng, w0
    cdef int64_t pending = 0, s = start, a, q
    cdef uint8_t b, e
    for i in range(n):
        b = x[i]
        a = p_num[s]
        q = p_den[s]
        rng = high - low + 1
        w0 = _split(rng, a, q)
        if b:
            if w0 == rng:
                raise OffSupport(i + 1)
            low += w0
        else:
            if w0 == 0:
                raise OffSupport(i + 1)
            high = low + w0 - 1
        s = nxt[s, b]
        while True:
            if high < HALF:
                e = 0
            elif low >= HALF:
                e = 1
                low -= HALF
                high -= HALF
            elif low >= QUARTER and high < HALF + QUARTER:
                pending += 1
                low -= QUARTER
                high -= QUARTER
                low <<= 1
                high = (high << 1) | 1
                continue
            else:
                break
            if used + pending + 1 > cap:
                cap = 2 * (used + pending + 1)
                out_arr = np.resize(out_arr, cap)
                out = out_arr
            out[used] = e
            used += 1
            for j in range(pending):
                out[used] = 1 - e
                used += 1
            pending = 0
            low <<= 1
            high = (high << 1) | 1
    return out_arr[:used].copy(), pending, low, high


def ac_decode(const uint8_t[::1] z, Py_ssize_t n, const int64_t[::1] p_num,
              const int64_t[::1] p_den, const int64_t[:, ::1] nxt, int64_t start):
    cdef Py_ssize_t nz = z.shape[0], pos, i
    cdef uint64_t value = 0, low = 0, high = MASK, rng, w0
    cdef int64_t s = start, a, q
    cdef uint8_t b
    out_arr = np.zeros(n, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    for pos in range(PREC):
        value = (value << 1) | (z[pos] if pos < nz else 0)
    pos = PREC
    for i in range(n):
        a = p_num[s]
        q = p_den[s]
        rng = high - low + 1
        w0 = _split(rng, a, q)
        if value - low < w0:
            high = low + w0 - 1
            b = 0
        else:
            low += w0
            b = 1
        out[i] = b
        s = nxt[s, b]
        while True:
            if high < HALF:
                pass
            elif low >= HALF:
                low -= HALF
                high -= HALF
                value -= HALF
            elif low >= QUARTER and high < HALF + QUARTER:
                low -= QUARTER
                high -= QUARTER
                value -= QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1
            value = (value << 1) | (z[pos] if pos < nz else 0)
            pos += 1
    return out_arr


def window_min_clogc(const int64_t[::1] idx, Py_ssize_t nsym, Py_ssize_t span,
                     Py_ssize_t stride, const double[::1] clog):
    cdef Py_ssize_t m = idx.shape[0], t = 0, nt, i, w
    cdef int64_t[::1] counts = np.zeros(nsym, dtype=np.int64)
    cdef double s, best_s
    cdef Py_ssize_t best_t = 0
    for i in range(span):
        counts[idx[i]] += 1
    best_s = 0.0
    for w in range(nsym):
        best_s += clog[counts[w]]
    while t + stride + span <= m:
        nt = t + stride
        if stride < span:
            for i in range(t, nt):
                counts[idx[i]] -= 1
            for i in range(t + span, nt + span):
                counts[idx[i]] += 1
        else:
            for w in range(nsym):
                counts[w] = 0
            for i in range(nt, nt + span):
                counts[idx[i]] += 1
        t = nt
        s = 0.0
        for w in range(nsym):
            s += clog[counts[w]]
        if s < best_s:
            best_s = s
            best_t = t
    return best_t, best_s
