"""Oblivious selection x/y, the complementary mask, and the split/merge bijection."""

from __future__ import annotations

from fractions import Fraction
from itertools import compress

import numpy as np

from .bitseq import BitString

__all__ = [
    "SelectionMask",
    "LengthMismatch",
    "select",
    "complement",
    "split",
    "merge",
    "density",
    "thin",
]

# below this size pure-bytes paths beat numpy call overhead
_SMALL = 256
_FLIP = bytes.maketrans(b"\x00\x01", b"\x01\x00")


class LengthMismatch(ValueError):
    pass


class SelectionMask:
    """A coordinate sequence y together with tau, the positions of its ones.

    ``tau`` is 1-based and strictly increasing; ``tau[j-1]`` is tau(j).
    """

    __slots__ = ("y", "ones", "_tau")

    def __init__(self, y: BitString | str):
        if isinstance(y, str):
            from .bitseq import from_text

            y = from_text(y)
        self.y = y
        self.ones = y.count_ones()
        self._tau = None

    @property
    def tau(self) -> np.ndarray:
        if self._tau is None:
            t = np.flatnonzero(self.y.array) + 1
            t.flags.writeable = False
            self._tau = t
        return self._tau

    def __len__(self) -> int:
        return len(self.y)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, SelectionMask):
            return self.y == other.y
        return NotImplemented

    def __hash__(self) -> int:
        return hash((SelectionMask, self.y))

    def __repr__(self) -> str:
        return f"SelectionMask({self.y!r}, ones={self.ones})"


def _as_mask(y) -> SelectionMask:
    return y if isinstance(y, SelectionMask) else SelectionMask(y)


def _pick(data: bytes, mask: bytes) -> bytes:
    if len(data) <= _SMALL:
        return bytes(compress(data, mask))
    a = np.frombuffer(data, dtype=np.uint8)
    m = np.frombuffer(mask, dtype=np.uint8).view(bool)
    return a[m].tobytes()


def select(x: BitString, y: SelectionMask | BitString) -> BitString:
    """x/y: the symbols x_tau(1) x_tau(2) ... picked where y is 1."""
    y = _as_mask(y)
    if len(x) != len(y):
        raise LengthMismatch(f"|x| = {len(x)} but |y| = {len(y)}")
    return BitString._trusted(_pick(x.data, y.y.data))


def complement(y: SelectionMask | BitString) -> SelectionMask:
    y = _as_mask(y)
    return SelectionMask(BitString._trusted(y.y.data.translate(_FLIP)))


def split(x: BitString, y: SelectionMask | BitString) -> tuple[BitString, BitString]:
    """(x/y, x/ybar)."""
    y = _as_mask(y)
    if len(x) != len(y):
        raise LengthMismatch(f"|x| = {len(x)} but |y| = {len(y)}")
    ybar = y.y.data.translate(_FLIP)
    return (BitString._trusted(_pick(x.data, y.y.data)),
            BitString._trusted(_pick(x.data, ybar)))


def merge(y: SelectionMask | BitString, a: BitString, b: BitString) -> BitString:
    """The unique x with x/y = a and x/ybar = b."""
    y = _as_mask(y)
    n = len(y)
    if len(a) != y.ones:
        raise LengthMismatch(f"|a| = {len(a)} but y has {y.ones} ones")
    if len(b) != n - y.ones:
        raise LengthMismatch(f"|b| = {len(b)} but y has {n - y.ones} zeros")
    if n <= _SMALL:
        ia, ib = iter(a.data), iter(b.data)
        return BitString._trusted(bytes(next(ia) if t else next(ib) for t in y.y.data))
    m = y.y.array.view(bool)
    out = np.empty(n, dtype=np.uint8)
    out[m] = a.array
    out[~m] = b.array
    return BitString._trusted(out.tobytes())


def density(y: SelectionMask | BitString, n: int | None = None) -> Fraction:
    """(y_1 + ... + y_n) / n as an exact rational."""
    y = _as_mask(y)
    if n is None:
        n = len(y)
    if n == 0:
        raise ValueError("density of an empty prefix is undefined")
    if not 0 < n <= len(y):
        raise ValueError(f"n = {n} outside 1..{len(y)}")
    ones = y.ones if n == len(y) else y.y.data.count(1, 0, n)
    return Fraction(ones, n)


def thin(y: SelectionMask | BitString, z: BitString) -> SelectionMask:
    """Mask keeping the j-th one of y exactly when z_j = 1.

    select(select(x, y), z) == select(x, thin(y, z)).
    """
    y = _as_mask(y)
    if len(z) != y.ones:
        raise LengthMismatch(f"|z| = {len(z)} but y has {y.ones} ones")
    out = np.zeros(len(y), dtype=np.uint8)
    out[y.tau - 1] = z.array
    return SelectionMask(BitString._trusted(out.tobytes()))
