"""Finite-n normality statistics: block histograms, defect, subword complexity, block entropy."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._backend import kernels
from .bitseq import BitString

__all__ = [
    "BlockHistogram",
    "NormalityReport",
    "block_indices",
    "block_histogram",
    "normality_defect",
    "subword_complexity",
    "block_entropy",
    "windowed_entropy_sup",
    "MIN_SAMPLES_PER_BLOCK",
]

MIN_SAMPLES_PER_BLOCK = 64
# dense count vectors up to this block length, dictionaries beyond
_DENSE_K = 24


def _check_k(x: BitString, k: int):
    if k < 1:
        raise ValueError(f"block length k = {k} must be at least 1")
    if k > len(x):
        raise ValueError(f"block length k = {k} exceeds |x| = {len(x)}")


def block_indices(x: BitString, k: int, overlapping: bool = True) -> np.ndarray:
    """Integer code of each counted k-block; the block's first bit is the MSB."""
    _check_k(x, k)
    if k > 62:
        raise ValueError("integer block codes need k <= 62")
    a = x.array.astype(np.int64)
    if overlapping:
        m = len(x) - k + 1
        idx = np.zeros(m, dtype=np.int64)
        for j in range(k):
            idx <<= 1
            idx |= a[j : j + m]
        return idx
    m = len(x) // k
    blocks = a[: m * k].reshape(m, k)
    weights = np.int64(1) << np.arange(k - 1, -1, -1, dtype=np.int64)
    return blocks @ weights


def _dense_counts(x: BitString, k: int, overlapping: bool) -> np.ndarray:
    return np.bincount(block_indices(x, k, overlapping), minlength=1 << k)


def _block_counter(x: BitString, k: int, overlapping: bool) -> dict[bytes, int]:
    data = x.data
    step = 1 if overlapping else k
    stop = len(x) - k + 1 if overlapping else (len(x) // k) * k
    out: dict[bytes, int] = {}
    for i in range(0, stop, step):
        w = data[i : i + k]
        out[w] = out.get(w, 0) + 1
    return out


@dataclass(frozen=True)
class BlockHistogram:
    k: int
    counts: dict[str, int]
    total: int
    overlapping: bool

    def frequency(self, block: str) -> Fraction:
        return Fraction(self.counts.get(block, 0), self.total)


def block_histogram(x: BitString, k: int, overlapping: bool = True) -> BlockHistogram:
    """Occurrence counts of every observed k-block (sliding window or disjoint)."""
    _check_k(x, k)
    if k <= _DENSE_K:
        vec = _dense_counts(x, k, overlapping)
        nz = np.flatnonzero(vec)
        counts = {format(int(w), f"0{k}b"): int(vec[w]) for w in nz}
    else:
        table = bytes.maketrans(b"\x00\x01", b"01")
        counts = {w.translate(table).decode(): c for w, c in _block_counter(x, k, overlapping).items()}
    total = len(x) - k + 1 if overlapping else len(x) // k
    return BlockHistogram(k=k, counts=counts, total=total, overlapping=overlapping)


def _count_values(x: BitString, k: int) -> np.ndarray:
    """Counts of observed blocks only (overlapping), any order."""
    if k <= _DENSE_K:
        vec = _dense_counts(x, k, True)
        return vec[vec > 0]
    if k <= 62:
        _, c = np.unique(block_indices(x, k), return_counts=True)
        return c
    return np.fromiter(_block_counter(x, k, True).values(), dtype=np.int64)


def subword_complexity(x: BitString, k: int) -> int:
    """Number of distinct overlapping k-blocks."""
    _check_k(x, k)
    return int(_count_values(x, k).size)


def _entropy_bits(counts: np.ndarray, total: int) -> float:
    p = counts[counts > 0] / total
    h = float(-(p * np.log2(p)).sum())
    return h if h > 0.0 else 0.0


def block_entropy(x: BitString, k: int) -> float:
    """Plug-in entropy of the overlapping k-block distribution, per symbol."""
    _check_k(x, k)
    h = _entropy_bits(_count_values(x, k), len(x) - k + 1) / k
    return min(h, 1.0)


def _defect_k(counts: np.ndarray, k: int, total: int) -> Fraction:
    # max_w |c_w / T - 2^-k| over all 2^k blocks, unobserved ones included
    scaled = np.abs(counts.astype(object if k > 40 else np.int64) * (1 << k) - total)
    worst = int(scaled.max())
    if counts.size < (1 << k):
        worst = max(worst, total)
    return Fraction(worst, total << k)


@dataclass
class NormalityReport:
    """Block statistics of one word for k = 1 .. k_max."""

    n: int
    k_max: int
    defect: Fraction
    per_k_defects: dict[int, Fraction]
    block_entropies: dict[int, float]
    subword_complexities: dict[int, int]
    reliable: dict[int, bool] = field(default_factory=dict)

    @property
    def reliable_defect(self) -> Fraction | None:
        vals = [d for k, d in self.per_k_defects.items() if self.reliable.get(k)]
        return max(vals) if vals else None

    def rows(self) -> list[dict]:
        return [
            {
                "k": k,
                "defect_k": float(self.per_k_defects[k]),
                "h_k": self.block_entropies[k],
                "p_k": self.subword_complexities[k],
                "reliable": self.reliable[k],
            }
            for k in range(1, self.k_max + 1)
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["k", "defect_k", "h_k", "p_k", "reliable"], lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({**row, "defect_k": repr(row["defect_k"]), "h_k": repr(row["h_k"])})
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k_max": self.k_max,
            "defect": float(self.defect),
            "defect_exact": str(self.defect),
            "reliable_defect": None if self.reliable_defect is None else float(self.reliable_defect),
            "per_k": self.rows(),
            "per_k_defects_exact": {str(k): str(v) for k, v in self.per_k_defects.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def normality_defect(x: BitString, k_max: int) -> NormalityReport:
    """Worst deviation of any overlapping k-block frequency from 2^-k, k <= k_max.

    Block lengths with fewer than 64 * 2^k counted positions are kept but
    flagged unreliable.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if len(x) < k_max:
        raise ValueError(f"|x| = {len(x)} is shorter than k_max = {k_max}")
    n = len(x)
    defects, ents, cplx, rel = {}, {}, {}, {}
    for k in range(1, k_max + 1):
        total = n - k + 1
        counts = _count_values(x, k)
        defects[k] = _defect_k(counts, k, total)
        ents[k] = min(_entropy_bits(counts, total) / k, 1.0)
        cplx[k] = int(counts.size)
        rel[k] = total >= MIN_SAMPLES_PER_BLOCK << k
    return NormalityReport(
        n=n,
        k_max=k_max,
        defect=max(defects.values()),
        per_k_defects=defects,
        block_entropies=ents,
        subword_complexities=cplx,
        reliable=rel,
    )


def windowed_entropy_sup(x: BitString, k: int, window: int, stride: int | None = None) -> float:
    """Largest per-symbol k-block entropy over windows x_t .. x_{t+window-1}.

    Windows start at t = 1, 1 + stride, ...; the default stride is window // 8.
    """
    _check_k(x, k)
    if window > len(x):
        raise ValueError(f"window {window} longer than |x| = {len(x)}")
    if window < MIN_SAMPLES_PER_BLOCK << k:
        raise ValueError(f"window {window} below {MIN_SAMPLES_PER_BLOCK} * 2^{k} samples")
    if stride is None:
        stride = max(1, window // 8)
    if stride < 1:
        raise ValueError("stride must be positive")
    if k > _DENSE_K:
        raise ValueError(f"windowed scan supports k <= {_DENSE_K}")
    idx = block_indices(x, k)
    span = window - k + 1
    clog = np.zeros(span + 1)
    c = np.arange(1, span + 1, dtype=np.float64)
    clog[1:] = c * np.log2(c)
    t, _ = kernels.window_min_clogc(idx, 1 << k, span, stride, clog)
    counts = np.bincount(idx[t : t + span], minlength=1 << k)
    return min(_entropy_bits(counts, span) / k, 1.0)

