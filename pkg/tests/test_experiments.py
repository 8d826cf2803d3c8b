import math
from fractions import Fraction

import pytest

from weakrand.experiments import ConfigError, ExperimentConfig, HypothesisError, run
from weakrand.generators import prng_prefix


def cfg(scenario, **kw):
    return ExperimentConfig(scenario, **kw).validated()


def test_defaults_recorded():
    c = cfg("forward")
    assert c.x_seeds == list(range(1, 17))
    assert c.baseline_seeds == list(range(1001, 1017))
    assert c.thresholds == {"envelope_sd": 4.0, "min_inside_fraction": 15 / 16}
    assert cfg("converse").n == 1 << 18


def test_from_mapping_rejects_unknown():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"scenario": "forward", "colour": "red"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"n": 4096})


@pytest.mark.parametrize("kw", [{"n": 1000}, {"k_max": 0}, {"proxy_order": 17}, {"jobs": 0},
                                {"n": "big"}, {"y_spec": "nope"}, {"measure": "gauss"}])
def test_validation(kw):
    with pytest.raises(ConfigError):
        cfg("weakrand", **kw)


def test_identity_selection_keeps_statistics():
    r = run(cfg("forward", y_spec="periodic:1", x_seeds=[7], n=1 << 12, k_max=4, proxy_order=3))
    arm = r.results["per_x"][0]
    assert arm["x"] == arm["x_over_y"]
    assert r.results["density_y"] == 1


def test_forward_periodic_y():
    r = run(cfg("forward", y_spec="periodic:01", x_seeds=[1], n=1 << 14, k_max=4, proxy_order=4))
    assert r.results["selected_length"] == 1 << 13
    assert r.passed


def test_forward_zero_density_rejected():
    with pytest.raises(HypothesisError):
        run(cfg("forward", y_spec="periodic:0", n=4096))


def test_parallel_equals_sequential():
    base = dict(y_spec="sturmian:-1,1,5,2:0", x_seeds=[1, 2, 3], n=1 << 13, k_max=4, proxy_order=4)
    a = run(cfg("forward", jobs=1, **base))
    b = run(cfg("forward", jobs=4, **base))
    assert a.results == b.results and a.verdict == b.verdict
    # jobs is a config field, so it is part of the hashed body
    assert a.config["jobs"] != b.config["jobs"]


def test_digest_ignores_provenance():
    c = cfg("counterexample", n=4096, k_max=4)
    a, b = run(c), run(c)
    b.provenance["timestamp"] = "1970-01-01T00:00:00+00:00"
    assert a.digest() == b.digest()
    assert a.to_json().count("report_hash") == 1


def test_counterexample_minimal():
    r = run(cfg("counterexample", n=1 << 10, k_max=3, proxy_order=0))
    assert r.results["defect_k1_x_over_y"] == Fraction(1, 2)
    assert r.passed


def test_converse_bernoulli_records_rate():
    r = run(cfg("converse", measure="bernoulli:1/3", n=1 << 12, proxy_order=4))
    assert r.results["sequences"]["z"]["n"] == 1 << 12
    lo, hi = r.results["logprob_rate_bracket"]
    k = prng_prefix(1, 1 << 12).count_ones()
    want = math.log2(3) - (4096 - k) / 4096
    assert float(Fraction(lo)) <= want + 1e-12 and float(Fraction(hi)) >= want - 1e-12
    assert r.results["conditional"]["param_entry"] in ("const1", "code[bernoulli:1/3]/side")


def test_converse_pointmass_vacuous():
    with pytest.raises(HypothesisError, match="vacuous"):
        run(cfg("converse", measure="pointmass:prng:1", n=4096))


def test_weakrand_ladder():
    r = run(cfg("weakrand", n=1 << 16, n_min=1 << 12, proxy_order=0))
    assert [row["n"] for row in r.results["ladder"]] == [1 << 12, 1 << 14, 1 << 16]
    assert r.results["steps"] == 2
    assert r.passed


def test_report_csv_rows():
    r = run(cfg("counterexample", n=4096, k_max=2, proxy_order=0))
    lines = r.to_csv().splitlines()
    assert lines[0] == "sequence,k,defect_k,h_k,p_k,reliable"
    assert sum(1 for line in lines if line.startswith("x/y,")) == 2
