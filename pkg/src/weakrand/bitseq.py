"""Finite binary words, packed/text I/O and streaming prefixes.

Positions are 1-based in the public API (``bit(1)`` is the first symbol).
Storage is one byte per symbol in an immutable ``bytes`` object, exposed to
numpy as a read-only view.
"""

from __future__ import annotations

import os
import struct
from typing import TYPE_CHECKING, Iterable, Iterator

import numpy as np

if TYPE_CHECKING:
    from .generators import GeneratorSpec

__all__ = [
    "BitString",
    "BitStream",
    "BitParseError",
    "BitFileError",
    "from_text",
    "to_text",
    "read_bitfile",
    "write_bitfile",
    "read_bits",
    "write_bits",
]

_HEADER = struct.Struct("<Q")
_TEXT_TABLE = bytes.maketrans(b"01", b"\x00\x01")
_TEXT_BACK = bytes.maketrans(b"\x00\x01", b"01")


class BitParseError(ValueError):
    """A text word contained something other than '0' and '1'."""

    def __init__(self, position: int, char: str):
        self.position = position
        self.char = char
        super().__init__(f"invalid bit character {char!r} at position {position}")


class BitFileError(ValueError):
    """Malformed packed bitfile."""


class BitString:
    """Immutable finite binary word x_1 ... x_n."""

    __slots__ = ("_data", "_hash")

    def __init__(self, bits: Iterable[int] | bytes | np.ndarray = b""):
        if isinstance(bits, bytes):
            data = bits
        elif isinstance(bits, np.ndarray):
            arr = np.ascontiguousarray(bits, dtype=np.uint8)
            data = arr.tobytes()
        else:
            data = bytes(bits)
        if data and data.translate(None, b"\x00\x01"):
            bad = next(i for i, b in enumerate(data) if b > 1)
            raise ValueError(f"bit {bad + 1} is {data[bad]}, expected 0 or 1")
        self._data = data
        self._hash = None

    @classmethod
    def _trusted(cls, data: bytes) -> "BitString":
        # skips validation; callers guarantee every byte is 0 or 1
        obj = cls.__new__(cls)
        obj._data = data
        obj._hash = None
        return obj

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "BitString":
        """Wrap a 0/1 array without re-validating each element."""
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        if arr.size and arr.max() > 1:
            raise ValueError("array contains values other than 0 and 1")
        return cls._trusted(arr.tobytes())

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls._trusted(bytes(n))

    @classmethod
    def ones(cls, n: int) -> "BitString":
        return cls._trusted(b"\x01" * n)

    @property
    def data(self) -> bytes:
        return self._data

    @property
    def array(self) -> np.ndarray:
        """Read-only uint8 view, 0-based."""
        return np.frombuffer(self._data, dtype=np.uint8)

    def __len__(self) -> int:
        return len(self._data)

    @property
    def n(self) -> int:
        return len(self._data)

    def bit(self, i: int) -> int:
        """Symbol x_i, 1-based."""
        if not 1 <= i <= len(self._data):
            raise IndexError(f"bit index {i} outside 1..{len(self._data)}")
        return self._data[i - 1]

    def prefix(self, m: int) -> "BitString":
        if not 0 <= m <= len(self._data):
            raise ValueError(f"prefix length {m} outside 0..{len(self._data)}")
        if m == len(self._data):
            return self
        return BitString._trusted(self._data[:m])

    def segment(self, start: int, stop: int) -> "BitString":
        """x_start ... x_stop inclusive, 1-based."""
        if not (1 <= start and stop <= len(self._data) and start <= stop + 1):
            raise ValueError(f"segment [{start}, {stop}] outside 1..{len(self._data)}")
        return BitString._trusted(self._data[start - 1 : stop])

    def count_ones(self) -> int:
        return self._data.count(1)

    def __iter__(self) -> Iterator[int]:
        return iter(self._data)

    def __add__(self, other: "BitString") -> "BitString":
        if not isinstance(other, BitString):
            return NotImplemented
        return BitString._trusted(self._data + other._data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self._data == other._data

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((BitString, self._data))
        return self._hash

    def __repr__(self) -> str:
        if len(self._data) <= 64:
            return f"BitString('{to_text(self)}')"
        head = self._data[:32].translate(_TEXT_BACK).decode()
        return f"BitString('{head}...', n={len(self._data)})"

    def __str__(self) -> str:
        return to_text(self)


def from_text(s: str) -> BitString:
    """Parse a '0'/'1' string; one trailing newline is tolerated."""
    if s.endswith("\n"):
        s = s[:-1]
        if s.endswith("\r"):
            s = s[:-1]
    raw = s.encode("ascii") if s.isascii() else None
    if raw is None or raw.translate(None, b"01"):
        for i, ch in enumerate(s, start=1):
            if ch not in "01":
                raise BitParseError(i, ch)
    return BitString._trusted(raw.translate(_TEXT_TABLE))


def to_text(x: BitString) -> str:
    return x.data.translate(_TEXT_BACK).decode("ascii")


def pack(x: BitString) -> bytes:
    """Payload bytes, LSB-first, zero padding."""
    return np.packbits(x.array, bitorder="little").tobytes()


def unpack(payload: bytes, n: int) -> BitString:
    nbytes = (n + 7) // 8
    if len(payload) < nbytes:
        raise BitFileError(f"truncated payload: need {nbytes} bytes for {n} bits, got {len(payload)}")
    if len(payload) > nbytes:
        raise BitFileError(f"{len(payload) - nbytes} unexpected trailing bytes after payload")
    arr = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), bitorder="little")
    if arr[n:].any():
        raise BitFileError("nonzero padding bits in final byte")
    return BitString._trusted(arr[:n].tobytes())


def encode_bitfile(x: BitString) -> bytes:
    return _HEADER.pack(len(x)) + pack(x)


def decode_bitfile(blob: bytes) -> BitString:
    if len(blob) < _HEADER.size:
        raise BitFileError(f"malformed header: {len(blob)} bytes, need {_HEADER.size}")
    (n,) = _HEADER.unpack_from(blob)
    return unpack(blob[_HEADER.size :], n)


def write_bitfile(path: str | os.PathLike, x: BitString) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_bitfile(x))


def read_bitfile(path: str | os.PathLike) -> BitString:
    with open(path, "rb") as fh:
        return decode_bitfile(fh.read())


def _is_text_path(path: str | os.PathLike) -> bool:
    return os.fspath(path).endswith(".txt")


def read_bits(path: str | os.PathLike) -> BitString:
    """Read ``.txt`` files as text, anything else as a packed bitfile."""
    if _is_text_path(path):
        with open(path, "r", encoding="latin-1", newline="") as fh:
            return from_text(fh.read())
    return read_bitfile(path)


def write_bits(path: str | os.PathLike, x: BitString) -> None:
    if _is_text_path(path):
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(to_text(x) + "\n")
    else:
        write_bitfile(path, x)


class BitStream:
    """Cursor over the infinite sequence described by a generator spec.

    Single consumer; ``clone`` copies the cursor.
    """

    def __init__(self, spec: "GeneratorSpec", cursor: int = 1):
        if cursor < 1:
            raise ValueError("cursor is 1-based")
        self.spec = spec
        self.cursor = cursor

    def prefix(self, n: int) -> BitString:
        return self.spec.prefix(n)

    def take(self, m: int) -> BitString:
        """Emit the next m symbols and advance."""
        start = self.cursor
        word = self.spec.prefix(start - 1 + m)
        self.cursor += m
        return BitString._trusted(word.data[start - 1 :])

    def clone(self) -> "BitStream":
        return BitStream(self.spec, self.cursor)

    def __repr__(self) -> str:
        return f"BitStream({self.spec}, cursor={self.cursor})"
