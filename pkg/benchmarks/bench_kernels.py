"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Both backends are imported directly, so the comparison does not depend on
which one the package selected at import time.
"""
import argparse
import timeit

import numpy as np

from secrecy_rfuowc import _pykernels

try:
    from secrecy_rfuowc import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases():
    rng = np.random.default_rng(0)
    x = rng.uniform(0.0, 30.0, 200_000)
    coef = rng.normal(size=40)
    power = rng.integers(0, 12, 40).astype(float)
    rate = rng.uniform(0.1, 5.0, 40)
    return {
        "gammainc_lower(a=1.43, 2e5 pts)": lambda k: k.gammainc_lower(1.43, x),
        "gammainc_lower(a=12, 2e5 pts)": lambda k: k.gammainc_lower(12.0, x),
        "expoly_sum(40 terms, 2e5 pts)": lambda k: k.expoly_sum(x, coef, power, rate),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=10)
    args = ap.parse_args()
    print(f"{'kernel':<34}{'python ms':>12}{'cython ms':>12}{'speedup':>10}{'max rel diff':>15}")
    for name, fn in cases().items():
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:<34}{t_py:>12.2f}{'n/a':>12}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        a, b = fn(_pykernels), fn(_ckernels)
        diff = np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300))
        print(f"{name:<34}{t_py:>12.2f}{t_c:>12.2f}{t_py / t_c:>10.1f}{diff:>15.2e}")


if __name__ == "__main__":
    main()
