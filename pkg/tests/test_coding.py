from fractions import Fraction

import pytest

from weakrand.bitseq import BitString, from_text, to_text
from weakrand.coding import (
    Bernoulli,
    CodeOutput,
    DecodeError,
    LogProb,
    Markov,
    MeasureError,
    OffSupport,
    PointMass,
    Uniform,
    decode,
    encode,
    extended_code,
    measure_from_id,
    measure_logprob,
)
from weakrand.generators import GeneratorSpec, prng_prefix

from conftest import all_words

MEASURES = [
    Uniform(),
    Bernoulli("1/3"),
    Markov("1/3", "3/4", "1/2"),
    PointMass(GeneratorSpec.parse("champernowne")),
]


@pytest.mark.parametrize("mid", ["uniform", "bernoulli:1/3", "markov:1/3,3/4,1/2", "pointmass:champernowne",
                                 "pointmass:sturmian:-1,1,5,2:0"])
def test_measure_id_roundtrip(mid):
    assert measure_from_id(mid).id == mid
    assert measure_from_id(measure_from_id(mid).id) == measure_from_id(mid)


@pytest.mark.parametrize("bad", ["bernoulli:3/2", "bernoulli:x", "markov:1/2", "pointmass:nope", "gauss", "uniform:1"])
def test_bad_measure_ids(bad):
    with pytest.raises(MeasureError):
        measure_from_id(bad)


@pytest.mark.parametrize("P", MEASURES, ids=lambda P: P.id)
def test_measure_property_small(P):
    assert P.prob(BitString.zeros(0)) == 1
    for n in range(10):
        for x in all_words(n):
            assert P.prob(x + from_text("0")) + P.prob(x + from_text("1")) == P.prob(x)
            c0 = P.conditional(x, 0)
            assert 0 <= c0 <= 1 and c0 + P.conditional(x, 1) == 1 or P.prob(x) == 0


def test_pointmass_conditionals():
    P = PointMass(GeneratorSpec.parse("periodic:01"))
    assert P.conditional(from_text("0"), 1) == 1
    assert P.conditional(from_text("0"), 0) == 0
    assert P.prob(from_text("0101")) == 1
    assert P.prob(from_text("0111")) == 0


def test_approximation_oracle():
    P = Bernoulli("1/3")
    x = from_text("1001")
    for k in (1, 2, 7, 100, 10**6):
        assert abs(P.prob(x) - P.approximate(x, k)) < Fraction(1, k)


def test_uniform_logprob_exact():
    lp = measure_logprob(Uniform(), prng_prefix(1, 77))
    assert lp.exact == 77 and lp.f_n == 78 and lp.ceil() == 77


def test_pointmass_logprob_zero():
    x = GeneratorSpec.parse("champernowne").prefix(1000)
    lp = measure_logprob(PointMass(GeneratorSpec.parse("champernowne")), x)
    assert lp.exact == 0 and lp.f_n == 1


def test_bernoulli_bracket():
    lp = measure_logprob(Bernoulli("1/3"), from_text("10"))
    assert lp.prob == Fraction(2, 9)
    assert lp.exact is None
    lo, hi = lp.bracket
    # log2(9/2) = 2.16992500144231...
    assert lo < Fraction(216992500144232, 10**14) and hi > Fraction(216992500144231, 10**14)
    assert hi - lo <= Fraction(1, 2**32)
    assert lp.f_n == 3 and lp.floor() == 2


def test_bracket_on_huge_rationals():
    lp = LogProb(3**5000 - 1, 2**8000, 5000)
    lo, hi = lp.bracket
    assert hi - lo <= Fraction(1, 2**32)
    assert lo <= lp.floor() + 1 and hi >= lp.floor()


def test_off_support_marker():
    lp = measure_logprob(PointMass(GeneratorSpec.parse("periodic:1")), from_text("10"))
    assert lp.off_support
    with pytest.raises(OffSupport):
        encode(PointMass(GeneratorSpec.parse("periodic:1")), from_text("110"))


def test_off_support_position():
    with pytest.raises(OffSupport) as info:
        encode(PointMass(GeneratorSpec.parse("champernowne")), from_text("1100"))
    assert info.value.position == 4


def test_uniform_code_is_identity():
    y = from_text("0110")
    code = encode(Uniform(), y)
    assert to_text(code.z) == "0110"
    assert to_text(decode(Uniform(), code.z, 4)) == "0110"


def test_pointmass_code_tiny():
    spec = GeneratorSpec.parse("sturmian:-1,1,5,2:0")
    code = encode(PointMass(spec), spec.prefix(5000))
    assert len(code.z) <= 2
    assert decode(PointMass(spec), code.z, 5000) == spec.prefix(5000)


@pytest.mark.parametrize("P", MEASURES, ids=lambda P: P.id)
def test_roundtrip_and_length_small(P):
    for n in range(11):
        for y in all_words(n):
            lp = measure_logprob(P, y)
            if lp.off_support:
                continue
            code = encode(P, y)
            assert len(code.z) <= lp.ceil() + 2
            assert code.f_n == lp.floor() + 1
            assert decode(P, code.z, n) == y


@pytest.mark.parametrize("P", MEASURES[:3], ids=lambda P: P.id)
def test_kraft(P):
    for n in range(1, 13):
        total = sum(Fraction(1, 2 ** len(encode(P, y).z)) for y in all_words(n))
        assert total <= 1 + Fraction(4, 2**n)


def test_truncated_code_rejected():
    P = Bernoulli("1/3")
    caught = 0
    for y in all_words(9):
        z = encode(P, y).z
        if len(z) == 0:
            continue
        try:
            out = decode(P, z.prefix(len(z) - 1), 9)
        except DecodeError:
            caught += 1
        else:
            assert encode(P, out).z != z.prefix(len(z) - 1) or out != y
    assert caught > 0


def test_decode_rejects_garbage():
    with pytest.raises(DecodeError):
        decode(Uniform(), from_text("0110"), 5)


@pytest.mark.parametrize("P", [Uniform(), Bernoulli("1/3"), Markov("1/3", "3/4", "1/2")], ids=lambda P: P.id)
def test_renorm_long_roundtrip(P, backend):
    y = prng_prefix(3, 200_000)
    code = encode(P, y, method="renorm")
    assert len(code.z) <= code.logprob.ceil() + 2
    assert decode(P, code.z, len(y), method="renorm") == y


def test_renorm_matches_exact_while_state_is_exact(backend):
    # half/one conditionals keep every interval width a power of two
    spec = GeneratorSpec.parse("sturmian:-1,1,5,2:0")
    for n in (1, 5, 64, 700, 4096):
        y = prng_prefix(n, n)
        assert encode(Uniform(), y, method="renorm").z == encode(Uniform(), y, method="exact").z
        ys = spec.prefix(n)
        P = PointMass(spec)
        assert encode(P, ys, method="renorm").z == encode(P, ys, method="exact").z
    # short inputs under other measures, before the 62-bit state has to round
    for P in (Bernoulli("1/4"), Bernoulli("1/3")):
        for s in range(30):
            y = prng_prefix(s, 30)
            assert encode(P, y, method="renorm").z == encode(P, y, method="exact").z


def test_backends_agree_on_renorm():
    from weakrand import _backend, coding

    if "cython" not in _backend.BACKENDS:
        pytest.skip("extension not built")
    y = prng_prefix(8, 50_000)
    P = Markov("2/7", "5/6", "1/3")
    outs = []
    for name in ("python", "cython"):
        saved = coding.kernels
        coding.kernels = _backend.BACKENDS[name]
        try:
            outs.append(encode(P, y, method="renorm").z)
        finally:
            coding.kernels = saved
    assert outs[0] == outs[1]


def test_code_file_format():
    code = encode(Bernoulli("1/3"), from_text("1101"))
    blob = code.to_bytes()
    mid, n, f_n, z = CodeOutput.parse_header(blob)
    assert (mid, n, f_n, z) == ("bernoulli:1/3", 4, code.f_n, code.z)
    with pytest.raises(DecodeError):
        CodeOutput.parse_header(b"no header")


def test_determinism():
    y = prng_prefix(2, 3000)
    P = Markov("1/3", "3/4", "1/2")
    assert encode(P, y).z == encode(P, y).z


def test_extended_code_padding_rule():
    P = Bernoulli("1/3")
    spec = GeneratorSpec.parse("prng:4")
    n = 512
    z = extended_code(P, spec.prefix, n)
    first = encode(P, spec.prefix(n)).z
    second = encode(P, spec.prefix(2 * n)).z
    assert len(z) == n
    assert z == (first + second).prefix(n)
