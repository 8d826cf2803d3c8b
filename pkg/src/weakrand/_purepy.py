"""Pure-Python kernels.  Same signatures and results as ``_kernels.pyx``."""

import numpy as np

from ._common import FULL, HALF, MASK, PREC, QUARTER, OffSupport  # noqa: F401


def lz78_parse(x):
    """Incremental parse; returns (refs, bits) with phrase j = phrase[refs[j]] + bits[j].

    A trailing incomplete phrase is emitted as a repeat of the dictionary
    phrase it matched.
    """
    children = {}
    parent = [0]
    last = [0]
    refs = []
    bits = []
    node = 0
    for b in x.tolist():
        child = children.get((node, b))
        if child is None:
            new = len(parent)
            children[(node, b)] = new
            parent.append(node)
            last.append(b)
            refs.append(node)
            bits.append(b)
            node = 0
        else:
            node = child
    if node:
        refs.append(parent[node])
        bits.append(last[node])
    return np.array(refs, dtype=np.int64), np.array(bits, dtype=np.uint8)


def ac_encode(x, p_num, p_den, nxt, start):
    """62-bit renormalised binary arithmetic encoder driven by a finite automaton.

    State s gives P(next = 1) = p_num[s] / p_den[s]; the lower part of the
    interval codes 0.  Returns (emitted bits, pending, low, high).
    """
    p_num = p_num.tolist()
    p_den = p_den.tolist()
    nxt = nxt.tolist()
    low, high = 0, MASK
    pending = 0
    out = []
    emit = out.append
    s = start
    for i, b in enumerate(x.tolist()):
        a = p_num[s]
        q = p_den[s]
        rng = high - low + 1
        w0 = rng * (q - a) // q
        if b:
            if w0 == rng:
                raise OffSupport(i + 1)
            low += w0
        else:
            if w0 == 0:
                raise OffSupport(i + 1)
            high = low + w0 - 1
        s = nxt[s][b]
        while True:
            if high < HALF:
                emit(0)
                out.extend([1] * pending)
                pending = 0
            elif low >= HALF:
                emit(1)
                out.extend([0] * pending)
                pending = 0
                low -= HALF
                high -= HALF
            elif low >= QUARTER and high < HALF + QUARTER:
                pending += 1
                low -= QUARTER
                high -= QUARTER
            else:
                break
            low <<= 1
            high = (high << 1) | 1
    return np.array(out, dtype=np.uint8), pending, low, high


def ac_decode(z, n, p_num, p_den, nxt, start):
    """Inverse of ``ac_encode``; z is read MSB-first and zero-padded."""
    p_num = p_num.tolist()
    p_den = p_den.tolist()
    nxt = nxt.tolist()
    zl = z.tolist()
    nz = len(zl)
    value = 0
    for i in range(PREC):
        value = (value << 1) | (zl[i] if i < nz else 0)
    pos = PREC
    low, high = 0, MASK
    out = [0] * n
    s = start
    for i in range(n):
        a = p_num[s]
        q = p_den[s]
        rng = high - low + 1
        w0 = rng * (q - a) // q
        if value - low < w0:
            high = low + w0 - 1
            b = 0
        else:
            low += w0
            b = 1
        out[i] = b
        s = nxt[s][b]
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
            value = (value << 1) | (zl[pos] if pos < nz else 0)
            pos += 1
    return np.array(out, dtype=np.uint8)


def _seqsum(v):
    # left-to-right like the compiled loop, so both backends agree bit-for-bit
    return float(np.cumsum(v)[-1]) if v.size else 0.0


def window_min_clogc(idx, nsym, span, stride, clog):
    """Scan windows of ``span`` block indices every ``stride`` positions.

    Returns (t, S) for the first window minimising S = sum_w c_w log2 c_w,
    i.e. the window of maximal plug-in entropy.
    """
    m = idx.shape[0]
    counts = np.bincount(idx[:span], minlength=nsym).astype(np.int64)
    best_t = 0
    best_s = _seqsum(clog[counts])
    t = 0
    while t + stride + span <= m:
        nt = t + stride
        if stride < span:
            counts -= np.bincount(idx[t:nt], minlength=nsym)
            counts += np.bincount(idx[t + span:nt + span], minlength=nsym)
        else:
            counts = np.bincount(idx[nt:nt + span], minlength=nsym).astype(np.int64)
        t = nt
        s = _seqsum(clog[counts])
        if s < best_s:
            best_s = s
            best_t = t
    return best_t, best_s
