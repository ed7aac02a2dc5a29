"""Compare the compiled and pure-Python kernel backends.

Run ``python3 benchmarks/bench_kernels.py`` after building the extension.
Each kernel is checked for agreement before it is timed.
"""
import argparse
import timeit

import numpy as np

from secureid.kernels import BACKENDS


def workloads(rng, trials, codewords, n, colors):
    Y = rng.standard_normal((trials, n))
    C = rng.standard_normal((codewords, n))
    bins = codewords // colors
    L_in = rng.standard_normal((trials, codewords))
    L_out = rng.standard_normal((trials, colors))
    coloring = rng.integers(0, colors, codewords)
    return {
        "nearest_codeword": ("nearest_codeword", (Y, C)),
        "binned_log_likelihood": ("binned_log_likelihood", (Y, C, bins, 0.5)),
        "identity_log_likelihood": ("identity_log_likelihood", (L_in, L_out, coloring)),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--trials", type=int, default=256)
    p.add_argument("--codewords", type=int, default=4096)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--colors", type=int, default=64)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)

    if "cython" not in BACKENDS:
        print("compiled backend not built; only the Python fallback is available")
    work = workloads(np.random.default_rng(0), args.trials, args.codewords, args.n, args.colors)
    print(f"{'kernel':<26}" + "".join(f"{b:>12}" for b in BACKENDS) + f"{'speedup':>10}")
    for label, (name, call_args) in work.items():
        results = {b: getattr(mod, name)(*call_args) for b, mod in BACKENDS.items()}
        as_tuple = {b: r if isinstance(r, tuple) else (r,) for b, r in results.items()}
        for b, parts in as_tuple.items():
            if not all(np.allclose(a, e, rtol=1e-9, atol=1e-9) for a, e in zip(parts, as_tuple["python"])):
                raise SystemExit(f"{label}: backend {b} disagrees with the Python fallback")
        times = {
            b: min(timeit.repeat(lambda m=mod: getattr(m, name)(*call_args), number=1, repeat=args.repeat))
            for b, mod in BACKENDS.items()
        }
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<26}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in BACKENDS) + f"{speed:>9.2f}x")


if __name__ == "__main__":
    main()
