from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np
import pytest

from weakrand.bitseq import from_text, to_text
from weakrand.generators import (
    GOLDEN,
    GeneratorSpec,
    QuadraticIrrational,
    SpecError,
    champernowne_prefix,
    periodic_prefix,
    prng_prefix,
    splitmix64,
    sturmian_prefix,
)
from weakrand.normality import normality_defect, subword_complexity


def test_champernowne_first_bits():
    assert to_text(champernowne_prefix(8)) == "11011100"
    assert len(champernowne_prefix(0)) == 0


def test_champernowne_matches_enumeration():
    direct = "".join(format(i, "b") for i in range(1, 65))
    assert to_text(champernowne_prefix(len(direct))) == direct
    # blocks for 2, 3, 4 start right after the shorter expansions
    assert direct[1:3] == "10" and direct[3:5] == "11" and direct[5:8] == "100"


def test_champernowne_long_prefix_consistent():
    big = champernowne_prefix(200_000)
    direct = "".join(format(i, "b") for i in range(1, 12_000))
    assert to_text(big.prefix(len(direct))) == direct


def test_champernowne_one_block_frequency_recorded():
    # the leading 1 of every expansion biases ones by about 1 / (2 log2 n)
    rep = normality_defect(champernowne_prefix(1 << 20), 1)
    assert float(rep.per_k_defects[1]) == pytest.approx(0.02524, rel=0.01)


def test_golden_fibonacci_word():
    assert to_text(sturmian_prefix(GOLDEN, Fraction(0), 8)) == "10110101"


def test_rational_alpha_is_periodic():
    # floor((i+1)/2) - floor(i/2) for i = 1..6
    assert to_text(sturmian_prefix(Fraction(1, 2), Fraction(0), 6)) == "101010"


def test_sturmian_matches_high_precision_floors():
    getcontext().prec = 80
    alpha = QuadraticIrrational(3, -1, 7, 2)  # (3 - sqrt 2) / 7
    beta = Fraction(2, 9)
    a = (Decimal(3) - Decimal(2).sqrt()) / 7
    b = Decimal(2) / 9
    bits = [int(((i + 1) * a + b).to_integral_value(rounding="ROUND_FLOOR"))
            - int((i * a + b).to_integral_value(rounding="ROUND_FLOOR")) for i in range(1, 2001)]
    assert list(sturmian_prefix(alpha, beta, 2000)) == bits


def test_sturmian_quadratic_beta():
    beta = QuadraticIrrational(-1, 1, 4, 5)  # (sqrt5 - 1) / 4
    x = sturmian_prefix(GOLDEN, beta, 500)
    getcontext().prec = 60
    g = (Decimal(5).sqrt() - 1) / 2
    b = (Decimal(5).sqrt() - 1) / 4
    want = [int(((i + 1) * g + b) // 1) - int((i * g + b) // 1) for i in range(1, 501)]
    assert list(x) == want


def test_golden_density_and_complexity():
    x = sturmian_prefix(GOLDEN, Fraction(0), 10**5)
    assert abs(x.count_ones() - float(GOLDEN) * 10**5) <= 10
    for k in range(1, 17):
        assert subword_complexity(x, k) == k + 1


def test_sturmian_balance():
    x = sturmian_prefix(GOLDEN, Fraction(0), 10**5).array.astype(np.int64)
    c = np.concatenate([[0], np.cumsum(x)])
    for k in range(1, 17):
        w = c[k:] - c[:-k]
        assert w.max() - w.min() <= 1


@pytest.mark.parametrize("pattern,n,want", [("01", 5, "01010"), ("1", 3, "111"), ("0011", 10, "0011001100")])
def test_periodic(pattern, n, want):
    assert to_text(periodic_prefix(from_text(pattern), n)) == want


def test_periodic_empty_pattern():
    with pytest.raises(SpecError):
        GeneratorSpec.periodic("")


def test_splitmix_reference_output():
    assert int(splitmix64(0, 1)[0]) == 0xE220A8397B1DCDAF


def test_prng_determinism_and_prefix():
    assert prng_prefix(5, 1000) == prng_prefix(5, 1000)
    assert prng_prefix(3, 256).prefix(128) == prng_prefix(3, 128)
    assert prng_prefix(3, 100) != prng_prefix(4, 100)


def test_prng_lsb_first():
    w = int(splitmix64(1, 1)[0])
    assert list(prng_prefix(1, 64)) == [(w >> i) & 1 for i in range(64)]


def test_prng_frequency():
    x = prng_prefix(1, 10**6)
    assert abs(x.count_ones() / 10**6 - 0.5) <= 0.005


def test_quadratic_canonical_form():
    q = QuadraticIrrational(2, 2, -4, 8)  # (2 + 2 sqrt 8)/-4 = (-1 - 2 sqrt 2)/2
    assert (q.a, q.b, q.c, q.d) == (-1, -2, 2, 2)
    with pytest.raises(SpecError):
        QuadraticIrrational(1, 1, 1, 9)
    with pytest.raises(SpecError):
        QuadraticIrrational(1, 0, 1, 5)


def test_quadratic_floor_and_order():
    assert GOLDEN.floor() == 0
    assert GOLDEN > Fraction(61803, 100000) and GOLDEN < Fraction(61804, 100000)
    assert QuadraticIrrational(0, -1, 1, 2).floor() == -2


@pytest.mark.parametrize("text", ["champernowne", "sturmian:-1,1,5,2:0", "sturmian:1/3:1/5",
                                  "periodic:0110", "prng:12345", "sturmian:-1,1,5,2:-1,1,5,4"])
def test_spec_roundtrip(text):
    spec = GeneratorSpec.parse(text)
    assert GeneratorSpec.parse(str(spec)) == spec


def test_spec_canonicalizes():
    assert str(GeneratorSpec.parse("sturmian:-2,2,5,4")) == "sturmian:-1,1,5,2:0"


@pytest.mark.parametrize("bad", ["sturmian:3/2", "sturmian:0", "sturmian:1/3:1", "sturmian:1,1,5,2",
                                 "prng:x", "prng:-1", "periodic:", "periodic:012", "foo", "champernowne:1",
                                 "sturmian:-1,1,5,2:-1,1,3,4"])
def test_bad_specs(bad):
    with pytest.raises(SpecError):
        GeneratorSpec.parse(bad)
