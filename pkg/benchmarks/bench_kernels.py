"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--n 65536] [--repeat 3]

Each kernel runs on identical inputs under both backends; outputs are
checked for equality before timing is reported.
"""

import argparse
import time

import numpy as np

from weakrand._backend import BACKENDS
from weakrand.coding import Markov, encode
from weakrand.generators import prng_prefix
from weakrand.normality import block_indices


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(u, v) for u, v in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def cases(n):
    x = prng_prefix(7, n)
    auto = Markov("1/3", "3/4", "1/2").automaton(n)
    z = encode(Markov("1/3", "3/4", "1/2"), x, method="renorm").z
    k, window = 4, 4096
    idx = block_indices(x, k)
    span = window - k + 1
    c = np.arange(1, span + 1, dtype=np.float64)
    clog = np.concatenate([[0.0], c * np.log2(c)])
    return {
        "lz78_parse": lambda K: K.lz78_parse(x.array),
        "ac_encode": lambda K: K.ac_encode(x.array, auto.p_num, auto.p_den, auto.nxt, auto.start),
        "ac_decode": lambda K: K.ac_decode(z.array, n, auto.p_num, auto.p_den, auto.nxt, auto.start),
        "window_min_clogc": lambda K: K.window_min_clogc(idx, 1 << k, span, 64, clog),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1 << 16)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    if "cython" not in BACKENDS:
        print("compiled extension not built; only the python backend is available")
    names = [b for b in ("cython", "python") if b in BACKENDS]
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<18}" + "".join(f"{b:>12}" for b in names) + f"{'speedup':>10}")
    for kernel, fn in cases(args.n).items():
        times, outs = {}, {}
        for b in names:
            times[b], outs[b] = _best(lambda: fn(BACKENDS[b]), args.repeat)
        if len(names) == 2 and not _same(outs["cython"], outs["python"]):
            raise SystemExit(f"{kernel}: backends disagree")
        row = f"{kernel:<18}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in names)
        if len(names) == 2:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
