"""Computable stand-ins for complexity rates.

* ``lz78_estimate``: incremental-parsing phrase count c, costed at c (log2 c + 1) bits.
* ``kt_compress_rate``: code length of the Krichevsky-Trofimov mixture over
  order-k contexts (add-1/2 counts per context, history padded with zeros).
* ``conditional_estimate``: a fixed finite catalog of transforms of the side
  information; an exact hit costs only the entry id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.special import gammaln

from ._backend import kernels
from .bitseq import BitString
from .coding import (
    Bernoulli,
    ComputableMeasure,
    LogProb,
    Markov,
    Model,
    OffSupport,
    Uniform,
    encode,
    measure_logprob,
)
from .selection import complement, select

__all__ = [
    "ComplexityEstimate",
    "lz78_parse",
    "lz78_reconstruct",
    "lz78_estimate",
    "kt_counts",
    "kt_logprob",
    "kt_neg_log2",
    "kt_compress_rate",
    "KTMeasure",
    "Catalog",
    "conditional_estimate",
    "WeakRandomnessGap",
    "weak_randomness_gap",
    "MAX_ORDER",
]

MAX_ORDER = 16
# exact rational KT probabilities up to this length, lgamma sums beyond
KT_EXACT_MAX_N = 1 << 12


@dataclass(frozen=True)
class ComplexityEstimate:
    method: str
    bits_total: float
    n: int
    params: dict = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.bits_total / self.n if self.n else 0.0

    def to_dict(self) -> dict:
        return {"method": self.method, "bits_total": self.bits_total, "n": self.n,
                "rate": self.rate, **{f"param_{k}": v for k, v in self.params.items()}}


# --- LZ78 -----------------------------------------------------------------


def lz78_parse(x: BitString) -> tuple[np.ndarray, np.ndarray]:
    """Phrases as (refs, bits): phrase j is phrase refs[j] extended by bits[j].

    Phrase 0 is the empty word; phrase j >= 1 is the j-th new dictionary
    entry.  A trailing partial match repeats an existing phrase.
    """
    return kernels.lz78_parse(x.array)


def lz78_reconstruct(refs: np.ndarray, bits: np.ndarray) -> BitString:
    words = [b""]
    out = []
    for r, b in zip(refs.tolist(), bits.tolist()):
        w = words[r] + bytes((b,))
        words.append(w)
        out.append(w)
    return BitString._trusted(b"".join(out))


def lz78_estimate(x: BitString) -> ComplexityEstimate:
    if len(x) == 0:
        raise ValueError("LZ78 estimate of the empty word is undefined")
    refs, _ = lz78_parse(x)
    c = int(refs.size)
    bits = c * (math.log2(c) + 1)
    return ComplexityEstimate("lz78", bits, len(x), {"phrases": c})


# --- KT mixture -----------------------------------------------------------


def _check_order(order: int):
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"context order {order} outside 0..{MAX_ORDER}")


def kt_counts(x: BitString, order: int) -> np.ndarray:
    """(2^order, 2) array: zeros and ones seen after each context.

    The context of x_i is x_{i-order} .. x_{i-1} (x_{i-1} least significant),
    with positions before the start read as 0.
    """
    _check_order(order)
    n = len(x)
    a = x.array.astype(np.int64)
    padded = np.concatenate([np.zeros(order, dtype=np.int64), a])
    ctx = np.zeros(n, dtype=np.int64)
    for j in range(1, order + 1):
        ctx |= padded[order - j : order - j + n] << (j - 1)
    counts = np.bincount(ctx * 2 + a, minlength=2 << order)
    return counts.reshape(-1, 2)


def kt_neg_log2(x: BitString, order: int) -> float:
    """-log2 P_KT(x) in floating point (lgamma sums)."""
    c = kt_counts(x, order)
    c = c[(c[:, 0] + c[:, 1]) > 0].astype(np.float64)
    za, zb = c[:, 0], c[:, 1]
    lp = gammaln(za + 0.5) + gammaln(zb + 0.5) - gammaln(za + zb + 1.0) - math.log(math.pi)
    return float(-lp.sum() / math.log(2))


def _double_factorial_odd(k: int) -> int:
    # 1 * 3 * ... * (2k - 1)
    return math.prod(range(1, 2 * k, 2))


def kt_logprob(x: BitString, order: int) -> LogProb:
    """Exact P_KT(x) as a rational, wrapped for -log2 bookkeeping."""
    num, den = 1, 1
    for za, zb in kt_counts(x, order).tolist():
        if za + zb:
            num *= _double_factorial_odd(za) * _double_factorial_odd(zb)
            den *= math.factorial(za + zb) << (za + zb)
    return LogProb(num, den, len(x))


def kt_compress_rate(x: BitString, order: int = 0) -> ComplexityEstimate:
    """bits_total = ceil(-log2 P_KT(x)) for the order-``order`` KT mixture."""
    _check_order(order)
    n = len(x)
    if n <= KT_EXACT_MAX_N:
        bits = kt_logprob(x, order).ceil() if n else 0
    else:
        v = kt_neg_log2(x, order)
        # float error is far below this margin; keeps bits >= the exact value
        bits = math.ceil(v + 1e-9 * n + 1e-6)
    return ComplexityEstimate("kt_order_k", bits, n, {"order": order})


class _KTModel(Model):
    __slots__ = ("order", "mask", "ctx", "counts")

    def __init__(self, order):
        self.order = order
        self.mask = (1 << order) - 1
        self.ctx = 0
        self.counts = {}

    def p_one(self):
        za, zb = self.counts.get(self.ctx, (0, 0))
        return 2 * zb + 1, 2 * (za + zb + 1)

    def push(self, bit):
        za, zb = self.counts.get(self.ctx, (0, 0))
        self.counts[self.ctx] = (za, zb + 1) if bit else (za + 1, zb)
        self.ctx = ((self.ctx << 1) | bit) & self.mask


class KTMeasure(ComputableMeasure):
    """Sequential KT mixture, usable with the exact arithmetic coder."""

    def __init__(self, order: int = 0):
        _check_order(order)
        self.order = order

    @property
    def id(self):
        return f"kt:{self.order}"

    def model(self):
        return _KTModel(self.order)

    def prob_parts(self, x):
        lp = kt_logprob(x, self.order)
        return lp.num, lp.den


# --- catalog conditional proxy -------------------------------------------

DEFAULT_CATALOG_MEASURES: tuple[ComputableMeasure, ...] = (
    Uniform(),
    Bernoulli("1/3"),
    Markov("1/3", "3/4", "1/2"),
)


class Catalog:
    """Fixed list of transforms of the side word.

    Entries: the constants 0^m and 1^m; each source (the side word itself,
    and its arithmetic code under every registered measure) selected by the
    all-ones mask, by the side word and by its complement.
    """

    def __init__(self, measures: Sequence[ComputableMeasure] = DEFAULT_CATALOG_MEASURES):
        self.measures = tuple(measures)
        names = ["const0", "const1", "identity", "side/side", "side/~side"]
        for P in self.measures:
            names += [f"code[{P.id}]", f"code[{P.id}]/side", f"code[{P.id}]/~side"]
        self.names = names

    def __len__(self) -> int:
        return len(self.names)

    @property
    def id_bits(self) -> int:
        return max(0, math.ceil(math.log2(len(self))))

    def _code(self, P: ComputableMeasure, side: BitString) -> BitString | None:
        try:
            return encode(P, side).z
        except OffSupport:
            return None

    def candidates(self, side: BitString, length: int) -> Iterator[tuple[str, BitString | None]]:
        """(name, output) pairs in catalog order; output is None when inapplicable.

        The code entry yields the first ``length`` bits of the code of the
        side word; the selected entries need its first |side| bits.  Either
        is inapplicable when the code is shorter, since extending it would
        need source bits beyond the side word.
        """
        n = len(side)
        mask = side
        cmask = complement(side).y
        yield "const0", BitString.zeros(length)
        yield "const1", BitString.ones(length)
        yield "identity", side
        yield "side/side", select(side, mask)
        yield "side/~side", select(side, cmask)
        for P in self.measures:
            z = self._code(P, side)
            yield f"code[{P.id}]", z.prefix(length) if z is not None and len(z) >= length else None
            full = z.prefix(n) if z is not None and len(z) >= n else None
            yield f"code[{P.id}]/side", None if full is None else select(full, mask)
            yield f"code[{P.id}]/~side", None if full is None else select(full, cmask)


def conditional_estimate(target: BitString, side: BitString, catalog: Catalog | None = None,
                         order: int = 0) -> ComplexityEstimate:
    """Catalog proxy for the complexity of ``target`` given ``side``.

    Cost = id bits + (0 on an exact catalog hit, else the KT code length of target).
    """
    if len(target) == 0:
        raise ValueError("conditional estimate of the empty word is undefined")
    catalog = catalog or Catalog()
    for name, out in catalog.candidates(side, len(target)):
        if out is not None and out == target:
            return ComplexityEstimate("catalog_conditional", catalog.id_bits, len(target),
                                      {"entry": name, "catalog_size": len(catalog)})
    kt = kt_compress_rate(target, order)
    return ComplexityEstimate("catalog_conditional", catalog.id_bits + kt.bits_total, len(target),
                              {"entry": "none", "catalog_size": len(catalog), "order": order})


# --- weak randomness ------------------------------------------------------


@dataclass(frozen=True)
class WeakRandomnessGap:
    """|KT rate - (-(1/n) log2 P(y))|, or an off-support marker."""

    n: int
    measure_id: str
    order: int
    kt_rate: float
    logprob: LogProb

    @property
    def off_support(self) -> bool:
        return self.logprob.off_support

    @property
    def logprob_rate(self) -> float | None:
        return None if self.off_support else self.logprob.value / self.n

    @property
    def gap(self) -> float | None:
        if self.off_support:
            return None
        return abs(self.kt_rate - self.logprob_rate)

    def to_dict(self) -> dict:
        out = {"n": self.n, "measure": self.measure_id, "order": self.order,
               "kt_rate": self.kt_rate, "off_support": self.off_support}
        if self.off_support:
            out["gap"] = None
            out["status"] = "off-support, gap undefined"
        else:
            lo, hi = self.logprob.rate()
            out.update(gap=self.gap, logprob_rate=self.logprob_rate,
                       logprob_rate_lower=str(lo), logprob_rate_upper=str(hi))
        return out


def weak_randomness_gap(y: BitString, P: ComputableMeasure, proxy_order: int = 12) -> WeakRandomnessGap:
    if len(y) == 0:
        raise ValueError("gap of the empty word is undefined")
    lp = measure_logprob(P, y)
    kt = kt_compress_rate(y, proxy_order).rate if not lp.off_support else float("nan")
    return WeakRandomnessGap(len(y), P.id, proxy_order, kt, lp)
