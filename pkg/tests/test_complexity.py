import math

import pytest

from weakrand.bitseq import BitString, from_text, to_text
from weakrand.coding import Bernoulli, PointMass, Uniform, encode
from weakrand.complexity import (
    Catalog,
    KTMeasure,
    conditional_estimate,
    kt_compress_rate,
    kt_counts,
    kt_logprob,
    kt_neg_log2,
    lz78_estimate,
    lz78_parse,
    lz78_reconstruct,
    weak_randomness_gap,
)
from weakrand.generators import GOLDEN, GeneratorSpec, prng_prefix, sturmian_prefix
from weakrand.selection import select

from conftest import all_words


def phrases(x):
    refs, bits = lz78_parse(x)
    words = [""]
    for r, b in zip(refs.tolist(), bits.tolist()):
        words.append(words[r] + str(b))
    return words[1:]


def test_lz78_worked_parse(backend):
    x = from_text("1011010100010")
    assert phrases(x) == ["1", "0", "11", "01", "010", "00", "10"]
    est = lz78_estimate(x)
    assert est.params["phrases"] == 7
    assert est.bits_total == pytest.approx(7 * (math.log2(7) + 1))


def test_lz78_trailing_partial_phrase(backend):
    # "1 0 11 1": the last phrase repeats a dictionary word
    assert phrases(from_text("10111")) == ["1", "0", "11", "1"]


def test_lz78_roundtrip(backend):
    for n in range(1, 11):
        for x in all_words(n):
            assert lz78_reconstruct(*lz78_parse(x)) == x
    x = prng_prefix(6, 50_000)
    assert lz78_reconstruct(*lz78_parse(x)) == x


def test_lz78_rates(backend):
    # c(c+1)/2 >= n forces c >= 1414 phrases, so the cost floor is about 0.0162
    zeros = lz78_estimate(BitString.zeros(10**6))
    assert zeros.params["phrases"] == 1414
    assert zeros.rate == pytest.approx(0.0162, abs=5e-4)
    assert 0.9 <= lz78_estimate(prng_prefix(1, 10**6)).rate <= 1.3


def test_lz78_empty():
    with pytest.raises(ValueError):
        lz78_estimate(BitString.zeros(0))


def test_kt_counts_context_convention():
    # order 2, history padded with zeros: contexts 00,00,01,11 (x_{i-1} low bit)
    c = kt_counts(from_text("0111"), 2)
    assert c[0].tolist() == [1, 1] and c[1].tolist() == [0, 1] and c[3].tolist() == [0, 1]


def test_kt_constant_sequence():
    for n in (1, 10, 100, 1000, 5000):
        assert kt_compress_rate(BitString.ones(n), 0).bits_total <= math.log2(n) + 2


def test_kt_exact_matches_float():
    for order in (0, 3, 9):
        x = prng_prefix(order, 3000)
        assert kt_logprob(x, order).value == pytest.approx(kt_neg_log2(x, order), abs=1e-7)


def test_kt_bits_bound_exact():
    for order in (0, 2, 5):
        x = sturmian_prefix(GOLDEN, 0, 4000)
        est = kt_compress_rate(x, order)
        lp = kt_logprob(x, order)
        assert est.bits_total == lp.ceil()


def test_kt_float_path_bound():
    x = prng_prefix(3, 20_000)
    est = kt_compress_rate(x, 4)
    v = kt_neg_log2(x, 4)
    assert v <= est.bits_total <= v + 2


def test_kt_rates():
    assert 0.99 <= kt_compress_rate(prng_prefix(1, 10**6), 0).rate <= 1.01


def test_kt_order_limit():
    with pytest.raises(ValueError):
        kt_compress_rate(from_text("01"), 17)


def test_kt_code_length_small():
    for order in (0, 1, 2):
        P = KTMeasure(order)
        for n in range(1, 11):
            for x in all_words(n):
                assert abs(len(encode(P, x).z) - kt_compress_rate(x, order).bits_total) <= 2


def test_kt_measure_property():
    P = KTMeasure(2)
    for x in all_words(6):
        assert P.prob(x + from_text("0")) + P.prob(x + from_text("1")) == P.prob(x)


def test_catalog_shape():
    cat = Catalog()
    assert len(cat) == 14 and cat.id_bits == 4
    assert len(set(cat.names)) == len(cat)


def test_conditional_all_ones_hit():
    x = prng_prefix(1, 4096)
    est = conditional_estimate(select(x, x), x)
    assert est.params["entry"] == "const1"
    assert est.bits_total == 4


def test_conditional_miss_uses_kt():
    side = sturmian_prefix(GOLDEN, 0, 5000)
    target = prng_prefix(9, 5000)
    est = conditional_estimate(target, side)
    assert est.params["entry"] == "none"
    assert est.bits_total == 4 + kt_compress_rate(target).bits_total
    assert est.rate == pytest.approx(1.0, abs=0.01)


def test_conditional_arithmetic_code_hit():
    y = prng_prefix(2, 4096)
    z = encode(Bernoulli("1/3"), y).z.prefix(2000)
    est = conditional_estimate(z, y, Catalog([Bernoulli("1/3")]))
    assert est.params["entry"] == "code[bernoulli:1/3]"


def test_conditional_code_needing_more_side_is_skipped():
    # one third ones: the code is shorter than the source
    y = GeneratorSpec.parse("periodic:001").prefix(4096)
    z = encode(Bernoulli("1/3"), y).z
    assert len(z) < len(y)
    cat = Catalog([Bernoulli("1/3")])
    entries = dict(cat.candidates(y, len(y)))
    assert entries["code[bernoulli:1/3]"] is None
    assert entries["code[bernoulli:1/3]/side"] is None
    assert dict(cat.candidates(y, len(z)))["code[bernoulli:1/3]"] == z


def test_conditional_never_worse_than_unconditional():
    for seed in range(20):
        t = prng_prefix(seed, 300)
        s = prng_prefix(seed + 100, 300)
        cond = conditional_estimate(t, s)
        assert cond.bits_total <= kt_compress_rate(t).bits_total + Catalog().id_bits


def test_conditional_empty_target():
    with pytest.raises(ValueError):
        conditional_estimate(BitString.zeros(0), from_text("1"))


def test_gap_uniform_prng():
    g = weak_randomness_gap(prng_prefix(1, 10**6), Uniform(), 0)
    assert g.logprob_rate == 1.0
    assert g.gap <= 0.05


def test_gap_all_ones_uniform():
    g = weak_randomness_gap(BitString.ones(10_000), Uniform(), 0)
    assert g.gap == pytest.approx(1.0, abs=0.01)


def test_gap_off_support_is_reported():
    spec = GeneratorSpec.parse("champernowne")
    g = weak_randomness_gap(from_text("1111"), PointMass(spec), 2)
    assert g.off_support and g.gap is None
    assert g.to_dict()["status"] == "off-support, gap undefined"


def test_gap_pointmass_exact_zero_logprob():
    spec = GeneratorSpec.parse("sturmian:-1,1,5,2:0")
    g = weak_randomness_gap(spec.prefix(1 << 14), PointMass(spec), 12)
    assert g.logprob_rate == 0.0
    assert g.gap == g.kt_rate
