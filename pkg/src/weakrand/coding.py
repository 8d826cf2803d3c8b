"""Exact computable measures and a binary arithmetic codec over them.

Two encoders share one output rule.  Both find the coded interval
[L, L + P(y)), then emit the shortest dyadic interval [m 2^-l, (m+1) 2^-l)
inside it (smallest m at that length).  That rule guarantees
``|z| <= ceil(-log2 P(y)) + 1``.

* ``exact``: the interval is tracked as exact integers over the product of
  the conditional denominators.
* ``renorm``: a 62-bit renormalised integer coder (compiled kernel when
  available) whose split points are rounded down.  For dyadic measures
  (uniform, point masses) no rounding happens and both encoders give the
  same z.  Otherwise the rounded interval drifts from the exact one by
  about 2^-62 per step.  Once the interval is narrower than that drift,
  after roughly 60 symbols, the codes differ, though each remains a valid
  code with the same length bound.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from decimal import Context, Decimal
from fractions import Fraction
from typing import Callable

import numpy as np

from ._backend import kernels
from ._common import OffSupport
from .bitseq import BitString, decode_bitfile, encode_bitfile
from .generators import GeneratorSpec, SpecError

__all__ = [
    "ComputableMeasure",
    "Uniform",
    "Bernoulli",
    "Markov",
    "PointMass",
    "Automaton",
    "LogProb",
    "CodeOutput",
    "OffSupport",
    "DecodeError",
    "MeasureError",
    "measure_from_id",
    "measure_logprob",
    "encode",
    "decode",
    "extended_code",
    "EXACT_MAX_N",
]

# "auto" uses the exact coder up to this length
EXACT_MAX_N = 1 << 16
# denominators above this cannot drive the 62-bit coder safely
_AUTOMATON_MAX_DEN = 1 << 32


class MeasureError(ValueError):
    pass


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class Automaton:
    """Finite-state form of a measure: P(1 | state s) = p_num[s] / p_den[s]."""

    p_num: np.ndarray
    p_den: np.ndarray
    nxt: np.ndarray
    start: int = 0


class Model:
    """Sequential conditional probabilities; ``p_one`` returns (num, den)."""

    def p_one(self) -> tuple[int, int]:
        raise NotImplementedError

    def push(self, bit: int) -> None:
        raise NotImplementedError


class _ConstModel(Model):
    __slots__ = ("ratio",)

    def __init__(self, ratio):
        self.ratio = ratio

    def p_one(self):
        return self.ratio

    def push(self, bit):
        pass


def _ratio(p: Fraction) -> tuple[int, int]:
    return p.numerator, p.denominator


def _check_prob(name: str, p: Fraction) -> Fraction:
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise MeasureError(f"{name} = {p} is not a probability")
    return p


class ComputableMeasure(ABC):
    """A probability on infinite binary sequences given by exact rational conditionals."""

    @property
    @abstractmethod
    def id(self) -> str: ...

    @abstractmethod
    def model(self) -> Model: ...

    def prob_parts(self, x: BitString) -> tuple[int, int]:
        """P(x) as an (unreduced) numerator/denominator pair."""
        num, den = 1, 1
        m = self.model()
        for b in x:
            a, q = m.p_one()
            num *= a if b else q - a
            den *= q
            if num == 0:
                return 0, 1
            m.push(b)
        return num, den

    def prob(self, x: BitString) -> Fraction:
        return Fraction(*self.prob_parts(x))

    def conditional(self, prefix: BitString, bit: int) -> Fraction:
        m = self.model()
        for b in prefix:
            m.push(b)
        a, q = m.p_one()
        return Fraction(a if bit else q - a, q)

    def approximate(self, x: BitString, k: int) -> Fraction:
        """A rational within 1/k of P(x) (the computability witness)."""
        if k < 1:
            raise ValueError("k must be positive")
        p = self.prob(x)
        return Fraction(round(p * 2 * k), 2 * k)

    def automaton(self, n: int) -> Automaton | None:
        return None

    def __str__(self) -> str:
        return self.id

    def __repr__(self) -> str:
        return f"<measure {self.id}>"

    def __eq__(self, other):
        return isinstance(other, ComputableMeasure) and self.id == other.id

    def __hash__(self):
        return hash(self.id)


def _single_state(a: int, q: int) -> Automaton:
    return Automaton(
        np.array([a], dtype=np.int64),
        np.array([q], dtype=np.int64),
        np.zeros((1, 2), dtype=np.int64),
    )


class Bernoulli(ComputableMeasure):
    """i.i.d. bits with P(1) = p."""

    def __init__(self, p: Fraction | str):
        self.p = _check_prob("p", Fraction(p))

    @property
    def id(self):
        return f"bernoulli:{self.p.numerator}/{self.p.denominator}"

    def model(self):
        return _ConstModel(_ratio(self.p))

    def prob_parts(self, x):
        ones = x.count_ones()
        a, q = _ratio(self.p)
        return a**ones * (q - a) ** (len(x) - ones), q ** len(x)

    def automaton(self, n):
        a, q = _ratio(self.p)
        if q > _AUTOMATON_MAX_DEN:
            return None
        return _single_state(a, q)


class Uniform(Bernoulli):
    """Fair coin: P(x) = 2^-|x|."""

    def __init__(self):
        super().__init__(Fraction(1, 2))

    @property
    def id(self):
        return "uniform"

    def prob_parts(self, x):
        return 1, 1 << len(x)


class _MarkovModel(Model):
    __slots__ = ("ratios", "state")

    def __init__(self, ratios):
        self.ratios = ratios
        self.state = 2

    def p_one(self):
        return self.ratios[self.state]

    def push(self, bit):
        self.state = bit


class Markov(ComputableMeasure):
    """Two-state chain: P(1 | prev 0) = p01, P(1 | prev 1) = p11, P(first = 1) = p_init."""

    def __init__(self, p01, p11, p_init=Fraction(1, 2)):
        self.p01 = _check_prob("p01", Fraction(p01))
        self.p11 = _check_prob("p11", Fraction(p11))
        self.p_init = _check_prob("p_init", Fraction(p_init))

    @property
    def id(self):
        return f"markov:{self.p01},{self.p11},{self.p_init}"

    def _ratios(self):
        return (_ratio(self.p01), _ratio(self.p11), _ratio(self.p_init))

    def model(self):
        return _MarkovModel(self._ratios())

    def prob_parts(self, x):
        if len(x) == 0:
            return 1, 1
        a = x.array
        (a0, q0), (a1, q1), (ai, qi) = self._ratios()
        prev, cur = a[:-1], a[1:]
        n01 = int(np.count_nonzero((prev == 0) & (cur == 1)))
        n00 = int(np.count_nonzero((prev == 0) & (cur == 0)))
        n11 = int(np.count_nonzero((prev == 1) & (cur == 1)))
        n10 = len(x) - 1 - n01 - n00 - n11
        first = int(a[0])
        num = (ai if first else qi - ai) * a0**n01 * (q0 - a0) ** n00 * a1**n11 * (q1 - a1) ** n10
        den = qi * q0 ** (n00 + n01) * q1 ** (n10 + n11)
        return num, den

    def automaton(self, n):
        ratios = self._ratios()
        if max(q for _, q in ratios) > _AUTOMATON_MAX_DEN:
            return None
        # states: 0 after a 0, 1 after a 1, 2 before the first bit
        return Automaton(
            np.array([r[0] for r in ratios], dtype=np.int64),
            np.array([r[1] for r in ratios], dtype=np.int64),
            np.array([[0, 1], [0, 1], [0, 1]], dtype=np.int64),
            start=2,
        )


class _PointMassModel(Model):
    __slots__ = ("spec", "bits", "pos")

    def __init__(self, spec):
        self.spec = spec
        self.bits = b""
        self.pos = 0

    def p_one(self):
        if self.pos >= len(self.bits):
            self.bits = self.spec.prefix(max(64, 2 * len(self.bits))).data
        return (1, 1) if self.bits[self.pos] else (0, 1)

    def push(self, bit):
        self.pos += 1


class PointMass(ComputableMeasure):
    """Probability one on the sequence produced by a generator."""

    def __init__(self, spec: GeneratorSpec | str):
        self.spec = GeneratorSpec.parse(spec) if isinstance(spec, str) else spec

    @property
    def id(self):
        return f"pointmass:{self.spec}"

    def model(self):
        return _PointMassModel(self.spec)

    def prob_parts(self, x):
        return (1, 1) if self.spec.prefix(len(x)) == x else (0, 1)

    def automaton(self, n):
        target = self.spec.prefix(n).array.astype(np.int64)
        p_num = np.append(target, 0)
        p_den = np.ones(n + 1, dtype=np.int64)
        step = np.minimum(np.arange(1, n + 2), n)
        return Automaton(p_num, p_den, np.stack([step, step], axis=1).astype(np.int64))


def measure_from_id(text: str) -> ComputableMeasure:
    """Parse ``uniform``, ``bernoulli:p/q``, ``markov:A,B,C`` or ``pointmass:<generator>``."""
    kind, _, rest = text.strip().partition(":")
    try:
        if kind == "uniform" and not rest:
            return Uniform()
        if kind == "bernoulli":
            return Bernoulli(Fraction(rest))
        if kind == "markov":
            parts = [Fraction(p) for p in rest.split(",")]
            if len(parts) not in (2, 3):
                raise MeasureError("markov needs P(1|0),P(1|1)[,P(first=1)]")
            return Markov(*parts)
        if kind == "pointmass":
            return PointMass(GeneratorSpec.parse(rest))
    except (ValueError, ZeroDivisionError, SpecError) as exc:
        raise MeasureError(f"bad measure id {text!r}: {exc}") from exc
    raise MeasureError(f"unknown measure id {text!r}")


# --- -log2 P bookkeeping --------------------------------------------------

_DEC = Context(prec=60)
_LN2 = _DEC.ln(Decimal(2))
_SLACK = Fraction(1, 10**45)
_GRID = 1 << 64


def _log2_decimal(m: int) -> Decimal:
    return _DEC.divide(_DEC.ln(Decimal(m)), _LN2)


def _log2_bracket(v: int) -> tuple[Fraction, Fraction]:
    """Rational bounds on log2(v) for an integer v >= 1."""
    if v & (v - 1) == 0:
        e = Fraction(v.bit_length() - 1)
        return e, e
    shift = max(0, v.bit_length() - 128)
    m = v >> shift
    lo = Fraction(_log2_decimal(m)) - _SLACK + shift
    hi_arg = m + 1 if shift else m
    hi = Fraction(_log2_decimal(hi_arg)) + _SLACK + shift
    return lo, hi


def _odd_part(v: int) -> tuple[int, int]:
    tz = (v & -v).bit_length() - 1
    return v >> tz, tz


def _outward(lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    return (Fraction(math.floor(lo * _GRID), _GRID), Fraction(math.ceil(hi * _GRID), _GRID))


@dataclass(frozen=True)
class LogProb:
    """-log2 P(x) for an exact rational P(x) = num / den.

    ``exact`` is set when P(x) is a power of two; otherwise ``lower`` and
    ``upper`` bracket the value with width below 2^-32.
    """

    num: int
    den: int
    n: int

    @property
    def off_support(self) -> bool:
        return self.num == 0

    @property
    def prob(self) -> Fraction:
        return Fraction(self.num, self.den)

    @property
    def exact(self) -> Fraction | None:
        if self.off_support:
            return None
        a, s = _odd_part(self.num)
        b, t = _odd_part(self.den)
        return Fraction(t - s) if a == b else None

    @property
    def bracket(self) -> tuple[Fraction, Fraction]:
        if self.off_support:
            raise OffSupport(None)
        ex = self.exact
        if ex is not None:
            return ex, ex
        dlo, dhi = _log2_bracket(self.den)
        nlo, nhi = _log2_bracket(self.num)
        return _outward(dlo - nhi, dhi - nlo)

    @property
    def lower(self) -> Fraction:
        return self.bracket[0]

    @property
    def upper(self) -> Fraction:
        return self.bracket[1]

    @property
    def value(self) -> float:
        lo, hi = self.bracket
        return float((lo + hi) / 2)

    def floor(self) -> int:
        """floor(-log2 P) by integer comparison only."""
        if self.off_support:
            raise OffSupport(None)
        m = self.den.bit_length() - self.num.bit_length()
        if (self.num << m) > self.den:
            m -= 1
        return m

    def ceil(self) -> int:
        f = self.floor()
        return f if (self.num << f) == self.den else f + 1

    @property
    def f_n(self) -> int:
        """Least integer strictly greater than -log2 P."""
        return self.floor() + 1

    def rate(self) -> tuple[Fraction, Fraction]:
        """Bracket on -(1/n) log2 P."""
        lo, hi = self.bracket
        return lo / self.n, hi / self.n

    def to_dict(self) -> dict:
        if self.off_support:
            return {"off_support": True, "n": self.n}
        lo, hi = self.bracket
        return {
            "off_support": False,
            "n": self.n,
            "exact": None if self.exact is None else str(self.exact),
            "lower": str(lo),
            "upper": str(hi),
            "value": self.value,
            "f_n": self.f_n,
        }


def measure_logprob(P: ComputableMeasure, x: BitString) -> LogProb:
    """Exact -log2 P(x); ``off_support`` is set when P(x) = 0."""
    num, den = P.prob_parts(x)
    return LogProb(num, den, len(x))


# --- encoders -------------------------------------------------------------


def _dyadic_inside(low: int, width: int, scale_bits: int | None = None, den: int | None = None):
    """Shortest dyadic [m 2^-l, (m+1) 2^-l) inside [low, low+width) / den.

    Pass ``scale_bits`` instead of ``den`` when den = 2**scale_bits.
    """
    top = low + width
    if den is None:
        # power-of-two scale: shifts only, and l never exceeds scale_bits
        l = max(0, scale_bits - width.bit_length() + 1)
        while l > 0 and (width << (l - 1)) >= (1 << scale_bits):
            l -= 1
        while True:
            sh = scale_bits - l
            m = -((-low) >> sh)
            if (m + 1) << sh <= top:
                return m, l
            l += 1
    # start from the smallest l with width * 2^l >= den
    l = max(0, den.bit_length() - width.bit_length())
    while (width << l) < den:
        l += 1
    while l > 0 and (width << (l - 1)) >= den:
        l -= 1
    while True:
        m = -((-low << l) // den)
        if (m + 1) * den <= top << l:
            return m, l
        l += 1


def _int_to_bits(m: int, l: int) -> BitString:
    if l == 0:
        return BitString()
    raw = np.frombuffer(m.to_bytes((l + 7) // 8, "big"), dtype=np.uint8)
    return BitString._trusted(np.unpackbits(raw)[-l:].tobytes())


def _bits_to_int(z: np.ndarray) -> int:
    if z.size == 0:
        return 0
    pad = (-z.size) % 8
    return int.from_bytes(np.packbits(z).tobytes(), "big") >> pad


def _exact_interval(P: ComputableMeasure, y: BitString) -> tuple[int, int, int]:
    low, width, den = 0, 1, 1
    m = P.model()
    for i, b in enumerate(y):
        a, q = m.p_one()
        low *= q
        den *= q
        if b:
            if a == 0:
                raise OffSupport(i + 1)
            low += width * (q - a)
            width *= a
        else:
            if a == q:
                raise OffSupport(i + 1)
            width *= q - a
        m.push(b)
    return low, width, den


def _encode_exact(P: ComputableMeasure, y: BitString) -> BitString:
    low, width, den = _exact_interval(P, y)
    m, l = _dyadic_inside(low, width, den=den)
    return _int_to_bits(m, l)


def _encode_renorm(P: ComputableMeasure, y: BitString, auto: Automaton) -> BitString:
    from ._common import PREC

    emitted, pending, low, high = kernels.ac_encode(y.array, auto.p_num, auto.p_den, auto.nxt, auto.start)
    e = int(emitted.size)
    E = _bits_to_int(emitted)
    scale = e + PREC + pending
    base = E << (PREC + pending)
    if pending:
        base += (1 << (PREC + pending - 1)) - (1 << (PREC - 1))
    m, l = _dyadic_inside(base + low, high + 1 - low, scale_bits=scale)
    return _int_to_bits(m, l)


def _pick_method(P: ComputableMeasure, n: int, method: str) -> tuple[str, Automaton | None]:
    if method not in ("auto", "exact", "renorm"):
        raise ValueError(f"unknown coding method {method!r}")
    auto = None if method == "exact" else P.automaton(n)
    if method == "renorm" and auto is None:
        raise MeasureError(f"{P.id} has no finite-precision form")
    if method == "auto":
        method = "exact" if (n <= EXACT_MAX_N or auto is None) else "renorm"
    return method, auto


@dataclass(frozen=True)
class CodeOutput:
    z: BitString
    f_n: int
    logprob: LogProb
    measure_id: str
    n: int
    method: str = "exact"

    def to_bytes(self) -> bytes:
        header = f"{self.measure_id} {self.n} {self.f_n}\n".encode("ascii")
        return header + encode_bitfile(self.z)

    @staticmethod
    def parse_header(blob: bytes) -> tuple[str, int, int, BitString]:
        line, sep, rest = blob.partition(b"\n")
        if not sep:
            raise DecodeError("code file lacks a header line")
        try:
            mid, n, f_n = line.decode("ascii").split(" ")
            return mid, int(n), int(f_n), decode_bitfile(rest)
        except ValueError as exc:
            raise DecodeError(f"malformed code file: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "measure": self.measure_id,
            "n": self.n,
            "f_n": self.f_n,
            "z_length": len(self.z),
            "method": self.method,
            "neg_log2_P": self.logprob.to_dict(),
        }


def encode(P: ComputableMeasure, y: BitString, method: str = "auto") -> CodeOutput:
    """Arithmetic code z of y under P, with |z| <= ceil(-log2 P(y)) + 1."""
    lp = measure_logprob(P, y)
    if lp.off_support:
        if len(y) <= EXACT_MAX_N:
            _exact_interval(P, y)  # raises with the offending position
        raise OffSupport(None)
    method, auto = _pick_method(P, len(y), method)
    if method == "exact":
        z = _encode_exact(P, y)
    else:
        z = _encode_renorm(P, y, auto)
    return CodeOutput(z=z, f_n=lp.f_n, logprob=lp, measure_id=P.id, n=len(y), method=method)


def _decode_exact(P: ComputableMeasure, z: BitString, n: int) -> BitString:
    l = len(z)
    m = _bits_to_int(z.array)
    # interval scaled by 2^l so that the code cell is [m*den, (m+1)*den)
    low, width, den = 0, 1 << l, 1
    zlo, zhi = m, m + 1
    out = bytearray(n)
    model = P.model()
    for i in range(n):
        a, q = model.p_one()
        low *= q
        den *= q
        zlo *= q
        zhi *= q
        w0 = width * (q - a)
        split = low + w0
        if zhi <= split and w0:
            width = w0
            b = 0
        elif zlo >= split and a:
            low = split
            width *= a
            b = 1
        else:
            raise DecodeError(f"code straddles the split at symbol {i + 1}")
        out[i] = b
        model.push(b)
    return BitString._trusted(bytes(out))


def decode(P: ComputableMeasure, z: BitString, n: int, method: str = "auto") -> BitString:
    """The unique y of length n whose code under P is z."""
    method, auto = _pick_method(P, n, method)
    if method == "exact":
        y = _decode_exact(P, z, n)
    else:
        y = BitString._trusted(
            kernels.ac_decode(z.array, n, auto.p_num, auto.p_den, auto.nxt, auto.start).tobytes()
        )
    try:
        again = encode(P, y, method=method).z
    except OffSupport as exc:
        raise DecodeError("code decodes outside the support") from exc
    if again != z:
        raise DecodeError("code is not the encoding of any length-n source")
    return y


def extended_code(P: ComputableMeasure, prefix_of: Callable[[int], BitString], n: int,
                  max_blocks: int = 64) -> BitString:
    """Length-n word from the codes of y_1^n, y_1^{2n}, ... concatenated and truncated."""
    z = encode(P, prefix_of(n)).z
    j = 2
    while len(z) < n:
        if j > max_blocks:
            raise MeasureError(f"codes under {P.id} too short to fill {n} bits")
        z = z + encode(P, prefix_of(j * n)).z
        j += 1
    return z.prefix(n)
