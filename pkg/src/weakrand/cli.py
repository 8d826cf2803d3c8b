"""``weakrand`` command line.

Exit codes: 0 PASS / success, 1 FAIL, 2 hypothesis or config rejection,
3 I/O or format error.  Errors are written to stderr as one JSON object.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import yaml

from .bitseq import BitFileError, BitParseError, read_bits, write_bits
from .coding import CodeOutput, DecodeError, MeasureError, OffSupport, decode, encode, measure_from_id
from .experiments import SCENARIOS, ConfigError, ExperimentConfig, HypothesisError, run, sequence_stats
from .generators import GeneratorSpec, SpecError
from .normality import normality_defect
from .selection import LengthMismatch, complement, select

EXIT_PASS, EXIT_FAIL, EXIT_REJECT, EXIT_IO = 0, 1, 2, 3

_REJECT = (ConfigError, HypothesisError, SpecError, MeasureError, LengthMismatch, OffSupport)
_IO = (OSError, BitParseError, BitFileError, DecodeError, yaml.YAMLError)


def _error_payload(exc: BaseException) -> dict:
    out = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("position", "char"):
        if getattr(exc, attr, None) is not None:
            out[attr] = getattr(exc, attr)
    return out


class _Group(click.Group):
    """Maps library exceptions to exit codes and JSON on stderr."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.exceptions.Exit:
            raise
        except click.UsageError as exc:
            code, err = EXIT_REJECT, exc
        except _REJECT as exc:
            code, err = EXIT_REJECT, exc
        except _IO as exc:
            code, err = EXIT_IO, exc
        click.echo(json.dumps(_error_payload(err), sort_keys=True), err=True)
        ctx.exit(code)


def _emit(obj) -> None:
    click.echo(json.dumps(obj, sort_keys=True, default=str))


def _count(text: str) -> int:
    """Accept 1048576, 2^20 or 1e6."""
    t = text.strip().replace("_", "")
    try:
        if "^" in t:
            b, e = t.split("^")
            return int(b) ** int(e)
        if "e" in t.lower():
            v = float(t)
            if v != int(v):
                raise ValueError
            return int(v)
        return int(t)
    except ValueError:
        raise click.BadParameter(f"{text!r} is not a count") from None


class _Count(click.ParamType):
    name = "count"

    def convert(self, value, param, ctx):
        return value if isinstance(value, int) else _count(value)


COUNT = _Count()


@click.group(cls=_Group)
@click.version_option(package_name="artifact")
def main():
    """Selection, normality, complexity and coding experiments on binary sequences."""


@main.command()
@click.argument("spec")
@click.argument("n", type=COUNT)
@click.argument("out", type=click.Path(dir_okay=False))
def generate(spec, n, out):
    """Write the first N bits of SPEC to OUT (.txt for text, else a bitfile)."""
    g = GeneratorSpec.parse(spec)
    write_bits(out, g.prefix(n))
    _emit({"spec": str(g), "n": n, "out": out})


@main.command("select")
@click.argument("x_file", type=click.Path(dir_okay=False))
@click.argument("y_file", type=click.Path(dir_okay=False))
@click.argument("out", type=click.Path(dir_okay=False))
@click.option("--complement", "use_complement", is_flag=True, help="Select along the complement of y.")
def select_cmd(x_file, y_file, out, use_complement):
    """Write x/y (the bits of X at the 1-positions of Y) to OUT."""
    x, y = read_bits(x_file), read_bits(y_file)
    mask = complement(y) if use_complement else y
    xy = select(x, mask)
    write_bits(out, xy)
    _emit({"n": len(x), "selected": len(xy), "out": out})


@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--k-max", default=8, show_default=True, type=click.IntRange(1, 16))
@click.option("--order", default=12, show_default=True, type=click.IntRange(0, 16), help="KT context order.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write JSON here and per-k CSV next to it.")
def analyze(file, k_max, order, out):
    """Normality statistics and complexity proxies of one sequence."""
    x = read_bits(file)
    if len(x) == 0:
        raise ConfigError("empty sequence")
    stats = sequence_stats(x, k_max, order, lz=True, windowed=True)
    if out:
        Path(out).write_text(json.dumps(stats, sort_keys=True, indent=2) + "\n")
        Path(out).with_suffix(".csv").write_text(normality_defect(x, min(k_max, len(x))).to_csv())
    _emit(stats)


@main.command("encode")
@click.argument("measure")
@click.argument("file", type=click.Path(dir_okay=False))
@click.argument("out", type=click.Path(dir_okay=False))
@click.option("--method", type=click.Choice(["auto", "exact", "renorm"]), default="auto", show_default=True)
def encode_cmd(measure, file, out, method):
    """Arithmetic-code FILE under MEASURE; OUT holds a header line and the packed code."""
    P = measure_from_id(measure)
    code = encode(P, read_bits(file), method=method)
    Path(out).write_bytes(code.to_bytes())
    _emit({**code.to_dict(), "out": out})


@main.command("decode")
@click.argument("file", type=click.Path(dir_okay=False))
@click.argument("out", type=click.Path(dir_okay=False))
@click.option("--measure", help="Expected measure id; must match the code file header.")
@click.option("--method", type=click.Choice(["auto", "exact", "renorm"]), default="auto", show_default=True)
def decode_cmd(file, out, measure, method):
    """Recover the source from a code file written by ``encode``."""
    mid, n, f_n, z = CodeOutput.parse_header(Path(file).read_bytes())
    P = measure_from_id(mid)
    if measure is not None and measure_from_id(measure).id != P.id:
        raise MeasureError(f"code file was made under {P.id}, not {measure}")
    y = decode(P, z, n, method=method)
    write_bits(out, y)
    _emit({"measure": P.id, "n": n, "f_n": f_n, "z_length": len(z), "out": out})


def _seed_list(text: str | None) -> list[int] | None:
    """'1-16' or '1,2,5' or a mix."""
    if text is None:
        return None
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part[1:]:
                a, b = part.split("-", 1)
                out.extend(range(int(a), int(b) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise click.BadParameter(f"bad seed list {text!r}") from None
    return out


def _load_config(path: str) -> dict:
    text = Path(path).read_text()
    data = yaml.safe_load(text)  # JSON is a subset of YAML
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config document must be a mapping")
    return data


@main.command()
@click.argument("scenario", type=click.Choice(SCENARIOS))
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="YAML or JSON config; flags override it.")
@click.option("--y-spec")
@click.option("--x-spec")
@click.option("--n", type=COUNT)
@click.option("--k-max", type=int)
@click.option("--proxy-order", type=int)
@click.option("--measure")
@click.option("--x-seeds", help="e.g. 1-16 or 1,3,5")
@click.option("--baseline-seeds", help="e.g. 1001-1016")
@click.option("--control-seed", type=int)
@click.option("--n-min", type=COUNT)
@click.option("--ladder-step", type=int, help="Ladder multiplies n by 2^step.")
@click.option("--threshold", "thresholds", multiple=True, metavar="KEY=VALUE")
@click.option("--jobs", type=int, help="Worker threads for the seed envelope.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the JSON report here and per-k CSV next to it.")
def experiment(scenario, config_path, **flags):
    """Run one scenario: forward, converse, counterexample or weakrand."""
    data = _load_config(config_path) if config_path else {}
    data = {k.replace("-", "_"): v for k, v in data.items()}
    if data.get("scenario", scenario) != scenario:
        raise ConfigError(f"config scenario {data['scenario']!r} differs from {scenario!r}")
    data["scenario"] = scenario

    flags["x_seeds"] = _seed_list(flags["x_seeds"])
    flags["baseline_seeds"] = _seed_list(flags["baseline_seeds"])
    th = dict(data.get("thresholds") or {})
    for item in flags.pop("thresholds"):
        key, sep, val = item.partition("=")
        if not sep:
            raise click.BadParameter(f"threshold {item!r} is not KEY=VALUE")
        try:
            th[key.strip()] = float(val)
        except ValueError:
            raise click.BadParameter(f"threshold {item!r} is not numeric") from None
    data["thresholds"] = th
    data.update({k: v for k, v in flags.items() if v is not None})

    cfg = ExperimentConfig.from_mapping(data)
    report = run(cfg)
    summary = {"scenario": scenario, "verdict": report.verdict, "report_hash": report.digest()}
    if cfg.out:
        js, csv = report.write(cfg.out)
        summary["out"] = [str(js), str(csv)]
    _emit(summary)
    sys.stdout.flush()
    click.get_current_context().exit(EXIT_PASS if report.passed else EXIT_FAIL)


if __name__ == "__main__":  # pragma: no cover
    main()
