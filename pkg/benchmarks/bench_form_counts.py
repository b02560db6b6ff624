"""Compare the numba and numpy backends of the reduced-form counting sweep.

    python3 benchmarks/bench_form_counts.py --bound 100000 --repeat 3 --json out.json
"""
import argparse
import json
import time

import numpy as np

from cm_atlas import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return min(times), result


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--bound", type=int, default=100_000)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--json", help="also write results to this file")
    args = p.parse_args(argv)

    # first call pays for JIT compilation (or loads the on-disk cache)
    start = time.perf_counter()
    _kernels.form_counts(1000, use_numba=True)
    compile_s = time.perf_counter() - start

    t_numba, (h1, a1) = best_of(lambda: _kernels.form_counts(args.bound, use_numba=True), args.repeat)
    t_numpy, (h2, a2) = best_of(lambda: _kernels.form_counts(args.bound, use_numba=False), args.repeat)
    agree = bool(np.array_equal(h1, h2) and np.array_equal(a1, a2))

    result = {
        "bound": args.bound,
        "numba_seconds": t_numba,
        "numpy_seconds": t_numpy,
        "numba_first_call_seconds": compile_s,
        "speedup": t_numpy / t_numba,
        "agree": agree,
    }
    print(f"bound {args.bound}: numba {t_numba:.3f}s  numpy {t_numpy:.3f}s  "
          f"speedup {result['speedup']:.1f}x  first numba call {compile_s:.2f}s  agree={agree}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(result, fh, indent=2)
    return 0 if agree else 1


if __name__ == "__main__":
    raise SystemExit(main())
