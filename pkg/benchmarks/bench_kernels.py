"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --m 12 16 20 --repeat 5
"""
import argparse
import timeit

import numpy as np

from pow2digits import kernels
from pow2digits.digits import WeightFunction


def bench(fn, arr, h, repeat):
    return min(timeit.repeat(lambda: fn(arr, h), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, nargs="+", default=[12, 16, 20, 22])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if kernels.compiled_backend is None:
        print("compiled kernels not available; timing numpy only")
    rng = np.random.default_rng(args.seed)
    h = list(WeightFunction.zero_weight(3.0).as_floats().w)
    print(f"{'m':>3} {'kernel':>9} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    for m in args.m:
        cases = [
            ("forward", rng.random(2 ** (m - 1))),
            ("backward", rng.random(2**m)),
        ]
        for name, arr in cases:
            py = bench(getattr(kernels.python_backend, f"{name}_dense"), arr, h, args.repeat)
            if kernels.compiled_backend is None:
                print(f"{m:>3} {name:>9} {py * 1e3:>10.3f} {'-':>10} {'-':>8}")
                continue
            cy_fn = getattr(kernels.compiled_backend, f"{name}_dense")
            cy = bench(cy_fn, arr, h, args.repeat)
            assert np.array_equal(cy_fn(arr, h), getattr(kernels.python_backend, f"{name}_dense")(arr, h))
            print(f"{m:>3} {name:>9} {py * 1e3:>10.3f} {cy * 1e3:>10.3f} {py / cy:>7.1f}x")


if __name__ == "__main__":
    main()
