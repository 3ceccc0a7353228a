#!/usr/bin/env python3
"""Benchmark the compiled text-distance kernels against the pure-Python twins.

Run after `python setup.py build_ext --inplace`:

    python benchmarks/bench_textdist.py
"""
import random
import string
import time

from subquest import _fastpath_py as pure

try:
    from subquest import _fastpath as fast
except ImportError:
    fast = None


def make_strings(rng, count, length):
    return ["".join(rng.choice(string.ascii_lowercase[:8]) for _ in range(length))
            for _ in range(count)]


def bench(fn, pairs, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for a, b in pairs:
            fn(a, b)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    rng = random.Random(17)
    rows = [("kernel", "case", "python", "cython", "speedup")]
    cases = [
        ("levenshtein", "200 pairs x 40 chars", make_strings(rng, 200, 40)),
        ("levenshtein", "50 pairs x 200 chars", make_strings(rng, 50, 200)),
    ]
    for name, label, strings in cases:
        pairs = list(zip(strings, strings[1:] + strings[:1]))
        t_py = bench(pure.levenshtein, pairs)
        if fast is None:
            rows.append((name, label, f"{t_py * 1e3:.1f} ms", "n/a", "-"))
            continue
        t_cy = bench(fast.levenshtein, pairs)
        rows.append((name, label, f"{t_py * 1e3:.1f} ms", f"{t_cy * 1e3:.1f} ms",
                     f"{t_py / t_cy:.1f}x"))

    seq_cases = [
        ("lcs_pairs", "200 pairs x 40 items", [[rng.randint(0, 9) for _ in range(40)]
                                               for _ in range(200)]),
        ("lcs_pairs", "50 pairs x 200 items", [[rng.randint(0, 9) for _ in range(200)]
                                               for _ in range(50)]),
    ]
    for name, label, seqs in seq_cases:
        pairs = list(zip(seqs, seqs[1:] + seqs[:1]))
        t_py = bench(pure.lcs_pairs, pairs)
        if fast is None:
            rows.append((name, label, f"{t_py * 1e3:.1f} ms", "n/a", "-"))
            continue
        t_cy = bench(fast.lcs_pairs, pairs)
        rows.append((name, label, f"{t_py * 1e3:.1f} ms", f"{t_cy * 1e3:.1f} ms",
                     f"{t_py / t_cy:.1f}x"))

    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    for i, row in enumerate(rows):
        print("  ".join(str(c).ljust(w) for c, w in zip(row, widths)))
        if i == 0:
            print("  ".join("-" * w for w in widths))
    if fast is None:
        print("\ncompiled extension not built; run `python setup.py build_ext --inplace`")


if __name__ == "__main__":
    main()
