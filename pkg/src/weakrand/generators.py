"""Reproducible prefix generators: Champernowne, Sturmian, periodic, SplitMix64.

Every generator is a pure function of ``(spec, n)``.  Sturmian bits are
computed with integer arithmetic only; a float never decides a floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .bitseq import BitString, from_text, to_text

__all__ = [
    "QuadraticIrrational",
    "GeneratorSpec",
    "SpecError",
    "champernowne_prefix",
    "sturmian_prefix",
    "periodic_prefix",
    "prng_prefix",
    "splitmix64",
    "parse_number",
    "format_number",
    "GOLDEN",
]

MASK64 = (1 << 64) - 1
SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
SPLITMIX_MUL1 = 0xBF58476D1CE4E5B9
SPLITMIX_MUL2 = 0x94D049BB133111EB


class SpecError(ValueError):
    """Unparseable or out-of-range generator spec string."""


def _squarefree_split(d: int) -> tuple[int, int]:
    """Return (s, r) with d = s*s*r and r square-free."""
    s, r = 1, d
    f = 2
    while f * f <= r:
        while r % (f * f) == 0:
            r //= f * f
            s *= f
        f += 1
    return s, r


def _floor_mul_sqrt(b: int, d: int) -> int:
    """floor(b * sqrt(d)) for non-square d, exactly."""
    if b >= 0:
        return math.isqrt(b * b * d)
    return -math.isqrt(b * b * d) - 1


@dataclass(frozen=True)
class QuadraticIrrational:
    """The real number (a + b*sqrt(d)) / c, kept in canonical form.

    Canonical: c > 0, d > 1 square-free, b != 0 and gcd(a, b, c) == 1.
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        a, b, c, d = self.a, self.b, self.c, self.d
        if c == 0:
            raise SpecError("denominator c must be nonzero")
        if d <= 0:
            raise SpecError("radicand d must be positive")
        s, r = _squarefree_split(d)
        if r == 1:
            raise SpecError(f"sqrt({d}) is rational; use a Fraction instead")
        if b == 0:
            raise SpecError("b = 0 makes the value rational; use a Fraction instead")
        b *= s
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(a, b), c)
        object.__setattr__(self, "a", a // g)
        object.__setattr__(self, "b", b // g)
        object.__setattr__(self, "c", c // g)
        object.__setattr__(self, "d", r)

    def floor(self) -> int:
        return (self.a + _floor_mul_sqrt(self.b, self.d)) // self.c

    def _sign_minus(self, q: Fraction) -> int:
        # sign of self - q, exact: (a - q*c) + b*sqrt(d)
        num = (self.a * q.denominator - q.numerator * self.c)
        rad = self.b * q.denominator
        # value = (num + rad*sqrt(d)) / (c*q.den) with c, q.den > 0
        if num >= 0 and rad >= 0:
            return 1 if (num or rad) else 0
        if num <= 0 and rad <= 0:
            return -1
        lhs, rhs = num * num, rad * rad * self.d
        if rad > 0:
            return 1 if rhs > lhs else -1
        return 1 if lhs > rhs else -1

    def __lt__(self, other) -> bool:
        return self._sign_minus(Fraction(other)) < 0

    def __gt__(self, other) -> bool:
        return self._sign_minus(Fraction(other)) > 0

    def __le__(self, other) -> bool:
        return self._sign_minus(Fraction(other)) <= 0

    def __ge__(self, other) -> bool:
        return self._sign_minus(Fraction(other)) >= 0

    def __float__(self) -> float:
        return (self.a + self.b * math.sqrt(self.d)) / self.c

    def __str__(self) -> str:
        # field order a,b,d,c: "-1,1,5,2" is (-1 + sqrt 5) / 2
        return f"{self.a},{self.b},{self.d},{self.c}"

    @classmethod
    def parse(cls, text: str) -> "QuadraticIrrational":
        parts = text.split(",")
        if len(parts) != 4:
            raise SpecError(f"quadratic irrational needs 4 integers a,b,d,c: {text!r}")
        try:
            a, b, d, c = (int(p) for p in parts)
        except ValueError as exc:
            raise SpecError(f"non-integer field in {text!r}") from exc
        return cls(a, b, c, d)


GOLDEN = QuadraticIrrational(-1, 1, 2, 5)

Number = Union[QuadraticIrrational, Fraction]


def parse_number(text: str) -> Number:
    """``p/q`` or an integer gives a Fraction, ``a,b,d,c`` a quadratic irrational."""
    if "," in text:
        return QuadraticIrrational.parse(text)
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecError(f"bad rational {text!r}") from exc


def format_number(v: Number) -> str:
    return str(v)


# --- Champernowne ---------------------------------------------------------


def champernowne_prefix(n: int) -> BitString:
    """First n bits of 1 10 11 100 101 ... (binary expansions, no leading zeros)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    chunks = []
    have = 0
    length = 1
    while have < n:
        lo, hi = 1 << (length - 1), 1 << length
        need_numbers = min(hi - lo, -(-(n - have) // length))
        start = lo
        # bounded chunks keep the (numbers x length) matrix small
        while need_numbers > 0 and have < n:
            m = min(need_numbers, max(1, (1 << 22) // length))
            nums = np.arange(start, start + m, dtype=np.int64)
            shifts = np.arange(length - 1, -1, -1, dtype=np.int64)
            block = ((nums[:, None] >> shifts) & 1).astype(np.uint8).ravel()
            chunks.append(block)
            have += block.size
            start += m
            need_numbers -= m
        length += 1
    if not chunks:
        return BitString()
    return BitString._trusted(np.concatenate(chunks)[:n].tobytes())


# --- Sturmian -------------------------------------------------------------


def _check_unit(name: str, v: Number, allow_zero: bool):
    lower_ok = v >= 0 if allow_zero else v > 0
    if not (lower_ok and v < 1):
        rng = "[0, 1)" if allow_zero else "(0, 1)"
        raise SpecError(f"{name} = {v} outside {rng}")


def _isqrt_array(v: np.ndarray) -> np.ndarray:
    """Exact floor(sqrt(v)) for int64 v < 2**62."""
    r = np.floor(np.sqrt(v.astype(np.float64))).astype(np.int64)
    while True:
        hi = r * r > v
        lo = (r + 1) * (r + 1) <= v
        if not (hi.any() or lo.any()):
            return r
        r = r - hi + lo


def _sturmian_floors(alpha: Number, beta: Number, n: int) -> np.ndarray:
    """floor(i*alpha + beta) for i = 1 .. n+1, exact."""
    i = np.arange(1, n + 2, dtype=np.int64)
    qa = alpha if isinstance(alpha, QuadraticIrrational) else None
    qb = beta if isinstance(beta, QuadraticIrrational) else None
    if qa is None and qb is None:
        fa, fb = Fraction(alpha), Fraction(beta)
        den = fa.denominator * fb.denominator // math.gcd(fa.denominator, fb.denominator)
        pa = fa.numerator * (den // fa.denominator)
        pb = fb.numerator * (den // fb.denominator)
        if (n + 1) * abs(pa) + abs(pb) < 1 << 62:
            return (i * pa + pb) // den
        return np.array([(k * pa + pb) // den for k in range(1, n + 2)], dtype=np.int64)

    d = (qa or qb).d
    if qa is not None and qb is not None and qa.d != qb.d:
        raise SpecError("alpha and beta must share the same radicand")

    def parts(v: Number) -> tuple[int, int, int]:
        if isinstance(v, QuadraticIrrational):
            return v.a, v.b, v.c
        f = Fraction(v)
        return f.numerator, 0, f.denominator

    a1, b1, c1 = parts(alpha)
    a2, b2, c2 = parts(beta)
    c = c1 * c2 // math.gcd(c1, c2)
    a1, b1 = a1 * (c // c1), b1 * (c // c1)
    a2, b2 = a2 * (c // c2), b2 * (c // c2)
    # value_i = (A_i + B_i sqrt d) / c with A_i = i*a1 + a2, B_i = i*b1 + b2
    bmax = (n + 1) * abs(b1) + abs(b2)
    amax = (n + 1) * abs(a1) + abs(a2) + math.isqrt(bmax * bmax * d) + 1
    if bmax * bmax * d < 1 << 61 and amax < 1 << 62:
        A = i * a1 + a2
        B = i * b1 + b2
        root = _isqrt_array(B * B * d)
        # B sqrt(d) is never an integer unless B == 0
        fl = np.where(B > 0, root, np.where(B < 0, -root - 1, 0))
        return (A + fl) // c
    out = np.empty(n + 1, dtype=np.int64)
    for k in range(1, n + 2):
        A = k * a1 + a2
        B = k * b1 + b2
        fl = _floor_mul_sqrt(B, d) if B else 0
        out[k - 1] = (A + fl) // c
    return out


def sturmian_prefix(alpha: Number, beta: Number, n: int) -> BitString:
    """Rotation coding: bit i = floor((i+1)alpha + beta) - floor(i alpha + beta).

    Rational alpha is accepted and gives a periodic word.
    """
    if not isinstance(alpha, QuadraticIrrational):
        alpha = Fraction(alpha)
    if not isinstance(beta, QuadraticIrrational):
        beta = Fraction(beta)
    _check_unit("alpha", alpha, allow_zero=False)
    _check_unit("beta", beta, allow_zero=True)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return BitString()
    fl = _sturmian_floors(alpha, beta, n)
    return BitString._trusted(np.diff(fl).astype(np.uint8).tobytes())


# --- periodic -------------------------------------------------------------


def periodic_prefix(pattern: BitString, n: int) -> BitString:
    if len(pattern) == 0:
        raise SpecError("periodic pattern must be nonempty")
    reps = -(-n // len(pattern))
    return BitString._trusted((pattern.data * reps)[:n])


# --- SplitMix64 -----------------------------------------------------------


def splitmix64(seed: int, count: int) -> np.ndarray:
    """``count`` successive SplitMix64 outputs as uint64 (wrapping arithmetic)."""
    seed &= MASK64
    k = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + k * np.uint64(SPLITMIX_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(SPLITMIX_MUL1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(SPLITMIX_MUL2)
        z = z ^ (z >> np.uint64(31))
    return z


def prng_prefix(seed: int, n: int) -> BitString:
    """n bits from SplitMix64(seed), each output word read LSB-first."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    words = splitmix64(seed, -(-n // 64))
    raw = words.astype("<u8").view(np.uint8)
    bits = np.unpackbits(raw, bitorder="little")[:n]
    return BitString._trusted(bits.tobytes())


# --- specs ----------------------------------------------------------------

_KINDS = ("champernowne", "sturmian", "periodic", "prng")


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for an infinite binary sequence.

    Canonical text forms: ``champernowne``, ``sturmian:ALPHA:BETA``,
    ``periodic:PATTERN`` and ``prng:SEED``.  ALPHA and BETA are ``p/q``
    rationals or ``a,b,d,c`` for (a + b sqrt d) / c.
    """

    kind: str
    alpha: Number | None = None
    beta: Number | None = None
    pattern: BitString | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SpecError(f"unknown generator kind {self.kind!r}")
        if self.kind == "sturmian":
            if self.alpha is None:
                raise SpecError("sturmian needs alpha")
            alpha = self.alpha if isinstance(self.alpha, QuadraticIrrational) else Fraction(self.alpha)
            beta = self.beta if self.beta is not None else Fraction(0)
            beta = beta if isinstance(beta, QuadraticIrrational) else Fraction(beta)
            _check_unit("alpha", alpha, allow_zero=False)
            _check_unit("beta", beta, allow_zero=True)
            if (isinstance(alpha, QuadraticIrrational) and isinstance(beta, QuadraticIrrational)
                    and alpha.d != beta.d):
                raise SpecError("alpha and beta must share the same radicand")
            object.__setattr__(self, "alpha", alpha)
            object.__setattr__(self, "beta", beta)
        elif self.kind == "periodic":
            if self.pattern is None or len(self.pattern) == 0:
                raise SpecError("periodic pattern must be nonempty")
        elif self.kind == "prng":
            if self.seed is None or not 0 <= self.seed <= MASK64:
                raise SpecError("prng seed must be an unsigned 64-bit integer")

    @classmethod
    def champernowne(cls) -> "GeneratorSpec":
        return cls("champernowne")

    @classmethod
    def sturmian(cls, alpha: Number, beta: Number = Fraction(0)) -> "GeneratorSpec":
        return cls("sturmian", alpha=alpha, beta=beta)

    @classmethod
    def periodic(cls, pattern: BitString | str) -> "GeneratorSpec":
        if isinstance(pattern, str):
            pattern = from_text(pattern)
        return cls("periodic", pattern=pattern)

    @classmethod
    def prng(cls, seed: int) -> "GeneratorSpec":
        return cls("prng", seed=seed)

    @classmethod
    def parse(cls, text: str) -> "GeneratorSpec":
        kind, _, rest = text.strip().partition(":")
        if kind == "champernowne":
            if rest:
                raise SpecError("champernowne takes no parameters")
            return cls.champernowne()
        if kind == "sturmian":
            a_text, sep, b_text = rest.partition(":")
            if not a_text:
                raise SpecError("sturmian needs sturmian:ALPHA[:BETA]")
            return cls.sturmian(parse_number(a_text), parse_number(b_text) if sep else Fraction(0))
        if kind == "periodic":
            try:
                return cls.periodic(from_text(rest))
            except ValueError as exc:
                raise SpecError(str(exc)) from exc
        if kind == "prng":
            try:
                seed = int(rest, 0)
            except ValueError as exc:
                raise SpecError(f"bad prng seed {rest!r}") from exc
            return cls.prng(seed)
        raise SpecError(f"unknown generator spec {text!r}")

    def __str__(self) -> str:
        if self.kind == "champernowne":
            return "champernowne"
        if self.kind == "sturmian":
            return f"sturmian:{format_number(self.alpha)}:{format_number(self.beta)}"
        if self.kind == "periodic":
            return f"periodic:{to_text(self.pattern)}"
        return f"prng:{self.seed}"

    def prefix(self, n: int) -> BitString:
        if self.kind == "champernowne":
            return champernowne_prefix(n)
        if self.kind == "sturmian":
            return sturmian_prefix(self.alpha, self.beta, n)
        if self.kind == "periodic":
            return periodic_prefix(self.pattern, n)
        return prng_prefix(self.seed, n)

    def stream(self):
        from .bitseq import BitStream

        return BitStream(self)
