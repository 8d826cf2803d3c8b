"""Experiment harness: configs, the four scenarios, and deterministic reports.

Each scenario is a pure function of its :class:`ExperimentConfig`.  Verdicts
read only the statistics recorded in the report; a finite sample of x can
give evidence for the selection statements, never proof.  The seed lists are
echoed into the report so the sample is auditable.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import platform
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from ._backend import BACKEND
from .bitseq import BitString
from .coding import ComputableMeasure, MeasureError, extended_code, measure_from_id, measure_logprob
from .complexity import (
    MAX_ORDER,
    conditional_estimate,
    kt_compress_rate,
    lz78_estimate,
    weak_randomness_gap,
)
from .generators import GeneratorSpec, SpecError
from .normality import MIN_SAMPLES_PER_BLOCK, normality_defect, windowed_entropy_sup
from .selection import density, select

__all__ = [
    "ConfigError",
    "HypothesisError",
    "ExperimentConfig",
    "ExperimentReport",
    "SCENARIOS",
    "run",
    "run_forward_experiment",
    "run_counterexample",
    "run_converse_experiment",
    "run_weakrand_check",
    "sequence_stats",
]

MIN_N = 1 << 10
MAX_K = 16


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


class HypothesisError(ValueError):
    """The scenario's precondition fails on the generated data."""


_DEFAULT_THRESHOLDS = {
    "forward": {"envelope_sd": 4.0, "min_inside_fraction": 15 / 16},
    "counterexample": {"min_rate_y": 0.99, "defect_tolerance": 2.0**-10},
    "converse": {"min_rate_z": 0.95, "max_conditional_rate": 0.05, "min_logprob_rate": 0.05},
    "weakrand": {"max_gap": 0.1},
}

_DEFAULTS = {
    "forward": {"y_spec": "sturmian:-1,1,5,2:0", "baseline_seeds": list(range(1001, 1017))},
    "counterexample": {"y_spec": "prng:1", "control_seed": 2},
    "converse": {"y_spec": "prng:1", "measure": "uniform", "n": 1 << 18},
    "weakrand": {"y_spec": "prng:1", "measure": "uniform"},
}

SCENARIOS = tuple(_DEFAULTS)


@dataclass
class ExperimentConfig:
    """Every CLI flag of ``experiment`` has a field here, and vice versa."""

    scenario: str
    y_spec: str | None = None
    x_spec: str | None = None
    n: int | None = None
    k_max: int = 8
    proxy_order: int = 12
    measure: str | None = None
    x_seeds: list[int] | None = None
    baseline_seeds: list[int] | None = None
    control_seed: int | None = None
    n_min: int = 1 << 12
    ladder_step: int = 2
    thresholds: dict[str, float] = field(default_factory=dict)
    jobs: int = 1
    out: str | None = None

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        clean = {k.replace("-", "_"): v for k, v in data.items()}
        unknown = sorted(set(clean) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "scenario" not in clean:
            raise ConfigError("config is missing 'scenario'")
        return cls(**clean).validated()

    def validated(self) -> "ExperimentConfig":
        """Fill scenario defaults and check every field; raises ConfigError."""
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {', '.join(SCENARIOS)}, got {self.scenario!r}")
        if self.n is None:
            self.n = _DEFAULTS[self.scenario].get("n", 1 << 20)
        for key, val in _DEFAULTS[self.scenario].items():
            if getattr(self, key) is None:
                setattr(self, key, val)
        merged = dict(_DEFAULT_THRESHOLDS[self.scenario])
        for key, val in self.thresholds.items():
            if key not in merged:
                raise ConfigError(f"unknown threshold {key!r} for {self.scenario}")
            merged[key] = float(val)
        self.thresholds = merged

        for key in ("n", "k_max", "proxy_order", "n_min", "ladder_step", "jobs"):
            if not isinstance(getattr(self, key), int) or isinstance(getattr(self, key), bool):
                raise ConfigError(f"{key} must be an integer")
        if self.n < MIN_N:
            raise ConfigError(f"n = {self.n} is below the minimum {MIN_N}")
        if not 1 <= self.k_max <= MAX_K:
            raise ConfigError(f"k_max = {self.k_max} outside 1..{MAX_K}")
        if not 0 <= self.proxy_order <= MAX_ORDER:
            raise ConfigError(f"proxy_order = {self.proxy_order} outside 0..{MAX_ORDER}")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")
        try:
            for key in ("y_spec", "x_spec"):
                if getattr(self, key) is not None:
                    setattr(self, key, str(GeneratorSpec.parse(getattr(self, key))))
            if self.measure is not None:
                self.measure = measure_from_id(self.measure).id
        except (SpecError, MeasureError) as exc:
            raise ConfigError(str(exc)) from exc

        if self.scenario == "forward":
            if GeneratorSpec.parse(self.y_spec).kind not in ("sturmian", "champernowne", "periodic"):
                raise ConfigError("forward scenario needs a sturmian, champernowne or periodic y")
            if self.x_seeds is None:
                # a single x_spec gives one arm; otherwise 16 seeds
                self.x_seeds = [GeneratorSpec.parse(self.x_spec).seed] if self.x_spec else list(range(1, 17))
            elif self.x_spec is not None:
                raise ConfigError("give either x_spec or x_seeds, not both")
            if self.x_spec is not None and GeneratorSpec.parse(self.x_spec).kind != "prng":
                raise ConfigError("forward scenario needs a prng x")
            if not self.x_seeds:
                raise ConfigError("x_seeds is empty")
            for seed in [*self.x_seeds, *self.baseline_seeds]:
                if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 1 << 64:
                    raise ConfigError(f"seed {seed!r} is not an unsigned 64-bit integer")
            if len(set(self.baseline_seeds)) < 16:
                raise ConfigError("baseline envelope needs at least 16 distinct seeds")
            if set(self.baseline_seeds) & set(self.x_seeds):
                raise ConfigError("baseline seeds must differ from the x seeds")
        elif self.scenario in ("counterexample", "converse"):
            if GeneratorSpec.parse(self.y_spec).kind != "prng":
                raise ConfigError(f"{self.scenario} scenario needs a prng y")
            if self.scenario == "counterexample" and not 0 <= self.control_seed < 1 << 64:
                raise ConfigError("control_seed is not an unsigned 64-bit integer")
        elif self.scenario == "weakrand":
            if self.ladder_step < 1:
                raise ConfigError("ladder_step must be positive")
            if not MIN_N <= self.n_min <= self.n:
                raise ConfigError(f"n_min must lie in [{MIN_N}, n]")
        return self

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name != "out"}


@dataclass
class ExperimentReport:
    scenario: str
    config: dict
    results: dict
    verdict: dict
    provenance: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.verdict["pass"])

    def body(self) -> dict:
        """Everything but the provenance block; this is what the hash covers."""
        return {"scenario": self.scenario, "config": self.config, "results": self.results,
                "verdict": self.verdict}

    def digest(self) -> str:
        blob = json.dumps(_jsonable(self.body()), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_dict(self) -> dict:
        return _jsonable({**self.body(), "report_hash": self.digest(), "provenance": self.provenance})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def csv_rows(self) -> list[dict]:
        rows = []
        for name, stats in self.results.get("sequences", {}).items():
            for row in stats.get("normality", {}).get("per_k", []):
                rows.append({"sequence": name, **row})
        return rows

    def to_csv(self) -> str:
        cols = ["sequence", "k", "defect_k", "h_k", "p_k", "reliable"]
        lines = [",".join(cols)]
        for r in self.csv_rows():
            lines.append(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in cols))
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> tuple[Path, Path]:
        path = Path(path)
        path.write_text(self.to_json())
        csv_path = path.with_suffix(".csv")
        csv_path.write_text(self.to_csv())
        return path, csv_path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _provenance() -> dict:
    return {
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "package_version": __version__,
        "kernel_backend": BACKEND,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


# --- per-sequence statistics ---------------------------------------------


def sequence_stats(x: BitString, k_max: int, order: int, *, lz: bool = False,
                   windowed: bool = False) -> dict:
    """Normality report plus KT rate (and optionally LZ78 / windowed entropy) of one word."""
    k_max = min(k_max, len(x))
    out = {
        "n": len(x),
        "ones": x.count_ones(),
        "normality": normality_defect(x, k_max).to_dict(),
        "kt": kt_compress_rate(x, order).to_dict(),
    }
    if lz:
        out["lz78"] = lz78_estimate(x).to_dict()
    if windowed:
        k = min(8, k_max)
        window = max(MIN_SAMPLES_PER_BLOCK << k, len(x) // 16)
        if window <= len(x):
            out["windowed_entropy_sup"] = {"k": k, "window": window,
                                           "value": windowed_entropy_sup(x, k, window)}
    return out


def _map(fn, items, jobs):
    # Executor.map keeps input order, so the merged result equals the sequential one.
    if jobs <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _envelope(values: list[float], width: float, log: bool = False) -> dict:
    """mean +- width * sd of the baseline values, on a log scale if ``log``.

    The defect is a positive, right-skewed maximum; its envelope is built on
    log(defect) and mapped back.
    """
    v = [math.log(max(x, 1e-300)) for x in values] if log else list(values)
    mean = statistics.fmean(v)
    sd = statistics.stdev(v)
    lo, hi = mean - width * sd, mean + width * sd
    if log:
        lo, hi = math.exp(lo), math.exp(hi)
    return {"scale": "log" if log else "linear", "mean": mean, "sd": sd, "lower": lo, "upper": hi}


def _inside(v: float, env: dict) -> bool:
    return env["lower"] <= v <= env["upper"]


# --- scenarios ------------------------------------------------------------


def run_forward_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Select prng words along a zero-entropy y and compare x/y against fresh prng words."""
    th = cfg.thresholds
    y_spec = GeneratorSpec.parse(cfg.y_spec)
    y = y_spec.prefix(cfg.n)
    rho = density(y)
    if rho == 0:
        raise HypothesisError(f"y = {cfg.y_spec} has no ones in its first {cfg.n} bits")
    m = y.count_ones()
    if m < max(cfg.k_max, 2):
        raise HypothesisError(f"x/y has only {m} bits")

    x_specs = [GeneratorSpec.prng(s) for s in cfg.x_seeds]

    def arm(spec):
        x = spec.prefix(cfg.n)
        xy = select(x, y)
        return str(spec), sequence_stats(x, cfg.k_max, cfg.proxy_order), sequence_stats(xy, cfg.k_max, cfg.proxy_order)

    def base(seed):
        return seed, sequence_stats(GeneratorSpec.prng(seed).prefix(m), cfg.k_max, cfg.proxy_order)

    arms = _map(arm, x_specs, cfg.jobs)
    baseline = _map(base, cfg.baseline_seeds, cfg.jobs)

    env_defect = _envelope([b["normality"]["defect"] for _, b in baseline], th["envelope_sd"], log=True)
    env_rate = _envelope([b["kt"]["rate"] for _, b in baseline], th["envelope_sd"])

    per_x = []
    for name, xs, xys in arms:
        d, r = xys["normality"]["defect"], xys["kt"]["rate"]
        per_x.append({
            "x_spec": name,
            "x": xs,
            "x_over_y": xys,
            "defect_inside": _inside(d, env_defect),
            "rate_inside": _inside(r, env_rate),
        })
    inside = sum(1 for p in per_x if p["defect_inside"] and p["rate_inside"])
    need = math.ceil(th["min_inside_fraction"] * len(per_x) - 1e-12)

    results = {
        "density_y": rho,
        "selected_length": m,
        "y": sequence_stats(y, cfg.k_max, cfg.proxy_order, lz=True, windowed=True),
        "per_x": per_x,
        "baseline": [{"seed": s, **b} for s, b in baseline],
        "envelope": {"defect": env_defect, "kt_rate": env_rate},
    }
    results["sequences"] = {"y": results["y"]}
    for p in per_x:
        results["sequences"][f"x[{p['x_spec']}]"] = p["x"]
        results["sequences"][f"x/y[{p['x_spec']}]"] = p["x_over_y"]
    verdict = {"pass": inside >= need, "inside": inside, "arms": len(per_x), "required": need}
    return ExperimentReport("forward", cfg.to_dict(), results, verdict, _provenance())


def run_counterexample(cfg: ExperimentConfig) -> ExperimentReport:
    """Select a prng word along itself: x/y is all ones, so maximally non-normal."""
    th = cfg.thresholds
    y = GeneratorSpec.parse(cfg.y_spec).prefix(cfg.n)
    if y.count_ones() == 0:
        raise HypothesisError("y has no ones")
    xy = select(y, y)
    y_stats = sequence_stats(y, cfg.k_max, cfg.proxy_order, lz=True)
    xy_stats = sequence_stats(xy, cfg.k_max, cfg.proxy_order)
    defect1 = normality_defect(xy, 1).per_k_defects[1]

    ctrl_spec = GeneratorSpec.prng(cfg.control_seed)
    ctrl = select(ctrl_spec.prefix(cfg.n), y)
    ctrl_stats = sequence_stats(ctrl, cfg.k_max, cfg.proxy_order)

    rate_y = y_stats["kt"]["rate"]
    ok_rate = rate_y >= th["min_rate_y"]
    ok_defect = abs(defect1 - Fraction(1, 2)) <= th["defect_tolerance"]
    results = {
        "density_y": density(y),
        "defect_k1_x_over_y": defect1,
        "control_spec": str(ctrl_spec),
        "sequences": {"y": y_stats, "x/y": xy_stats, "control_x/y": ctrl_stats},
    }
    verdict = {"pass": ok_rate and ok_defect, "rate_y_high": ok_rate, "defect_half": ok_defect,
               "control_defect": ctrl_stats["normality"]["defect"]}
    return ExperimentReport("counterexample", cfg.to_dict(), results, verdict, _provenance())


def run_converse_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Arithmetic-code a weakly random y; z is incompressible alone, free given y."""
    th = cfg.thresholds
    P = measure_from_id(cfg.measure)
    spec = GeneratorSpec.parse(cfg.y_spec)
    y = spec.prefix(cfg.n)
    lp = measure_logprob(P, y)
    if lp.off_support:
        raise HypothesisError(f"off-support: P(y) = 0 under {P.id}")
    lo, hi = lp.rate()
    if hi <= th["min_logprob_rate"]:
        raise HypothesisError("f(n) = o(n) regime: converse construction vacuous "
                              f"(-log2 P(y)/n <= {hi})")

    z = extended_code(P, spec.prefix, cfg.n)
    zy = select(z, y)
    z_stats = sequence_stats(z, cfg.k_max, cfg.proxy_order)
    zy_stats = sequence_stats(zy, cfg.k_max, cfg.proxy_order)
    cond = conditional_estimate(zy, y, order=cfg.proxy_order)

    rate_z = z_stats["kt"]["rate"]
    ok_z = rate_z >= th["min_rate_z"]
    ok_cond = cond.rate <= th["max_conditional_rate"]
    results = {
        "measure": P.id,
        "logprob": lp.to_dict(),
        "logprob_rate_bracket": [lo, hi],
        "z_over_y_length": len(zy),
        "conditional": cond.to_dict(),
        "z_over_y_unconditional_rate": zy_stats["kt"]["rate"],
        "sequences": {"z": z_stats, "z/y": zy_stats},
    }
    verdict = {"pass": ok_z and ok_cond, "rate_z_high": ok_z, "conditional_rate_low": ok_cond}
    return ExperimentReport("converse", cfg.to_dict(), results, verdict, _provenance())


def _ladder(n_min: int, n_max: int, step: int) -> list[int]:
    out, n = [], n_min
    while n < n_max:
        out.append(n)
        n <<= step
    out.append(n_max)
    return out


def run_weakrand_check(cfg: ExperimentConfig) -> ExperimentReport:
    """Gap between KT rate and log-likelihood rate along a ladder of prefix lengths."""
    th = cfg.thresholds
    P: ComputableMeasure = measure_from_id(cfg.measure)
    spec = GeneratorSpec.parse(cfg.y_spec)
    ladder = _ladder(cfg.n_min, cfg.n, cfg.ladder_step)
    y_full = spec.prefix(cfg.n)

    rows = []
    for n in ladder:
        g = weak_randomness_gap(y_full.prefix(n), P, cfg.proxy_order)
        if g.off_support:
            raise HypothesisError(f"off-support, gap undefined: P(y_1^{n}) = 0 under {P.id}")
        rows.append(g.to_dict())
    gaps = [r["gap"] for r in rows]
    steps = len(gaps) - 1
    nonincreasing = sum(1 for a, b in zip(gaps, gaps[1:]) if b <= a)
    results = {"measure": P.id, "ladder": rows, "gap_at_n": gaps[-1],
               "nonincreasing_steps": nonincreasing, "steps": steps,
               "sequences": {"y": sequence_stats(y_full, cfg.k_max, cfg.proxy_order, lz=True)}}
    verdict = {"pass": gaps[-1] <= th["max_gap"], "gap_at_n": gaps[-1],
               "trend_nonincreasing_steps": f"{nonincreasing}/{steps}"}
    return ExperimentReport("weakrand", cfg.to_dict(), results, verdict, _provenance())


_RUNNERS = {
    "forward": run_forward_experiment,
    "counterexample": run_counterexample,
    "converse": run_converse_experiment,
    "weakrand": run_weakrand_check,
}


def run(cfg: ExperimentConfig) -> ExperimentReport:
    return _RUNNERS[cfg.scenario](cfg)
