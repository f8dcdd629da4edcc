"""Compare the compiled and pure-Python enumeration kernels.

    python3 benchmarks/bench_kernels.py [--sizes 8 32 64] [--repeat 5] [--audit 1000]

Per-kernel timings use identical inputs for both backends and assert the
results are bit-identical.  The audit sweep runs in a subprocess per
backend so the import-time selection is exercised as users see it.
"""
import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from semifix import kernels

AUDIT_SNIPPET = (
    "import time; from semifix import kernels; from semifix.finitelab import theorem_audit;"
    "t = time.perf_counter(); s = theorem_audit({count}, 6, 42);"
    "print(kernels.BACKEND, time.perf_counter() - t, s.total_violations, len(s.witnesses))"
)


def instance(n, seed=0):
    rng = np.random.default_rng(seed)
    d = rng.integers(1, 11, size=(n, n)).astype(float)
    d = np.triu(d, 1)
    d = d + d.T
    return d, rng.integers(0, n, size=n)


def cases(d, m):
    return {
        "ratio_constant/banach": lambda impl: kernels.ratio_constant(d, m, kernels.BANACH, impl),
        "ratio_constant/kannan": lambda impl: kernels.ratio_constant(d, m, kernels.KANNAN, impl),
        "perimeter_constant": lambda impl: kernels.perimeter_constant(d, m, impl),
        "crr_excess": lambda impl: kernels.crr_excess(d, m, 0.2, 0.2, 0.2, impl),
        "tr_excess/power": lambda impl: kernels.tr_excess(d, 3, 1.0, 2.0, impl),
        "tr_ratio": lambda impl: kernels.tr_ratio(d, impl),
    }


def bench_kernels(sizes, repeat):
    impls = kernels.backends()
    if "cython" not in impls:
        print("compiled kernels unavailable; only the Python backend can be timed")
    print(f"{'kernel':<24}{'n':>5}" + "".join(f"{name + ' (us)':>16}" for name in impls) + f"{'speedup':>10}")
    for n in sizes:
        d, m = instance(n)
        for name, fn in cases(d, m).items():
            results = {k: fn(v) for k, v in impls.items()}
            if len(results) == 2:
                assert results["python"] == results["cython"], name
            times = {}
            for k, v in impls.items():
                loops = max(1, int(2e5 // n**3) if "tr_" in name or "perimeter" in name else int(2e5 // n**2))
                t = min(timeit.repeat(lambda: fn(v), number=loops, repeat=repeat)) / loops
                times[k] = t * 1e6
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{name:<24}{n:>5}" + "".join(f"{times[k]:>16.1f}" for k in impls) + f"{speed:>9.1f}x")


def bench_audit(count):
    print(f"\ntheorem audit sweep, {count} instances, n_max 6, seed 42")
    for forced in ("0", "1"):
        env = dict(os.environ, SEMIFIX_PURE_PYTHON=forced)
        out = subprocess.run([sys.executable, "-c", AUDIT_SNIPPET.format(count=count)],
                             env=env, capture_output=True, text=True, check=True).stdout.split()
        backend, secs, viol, wit = out
        print(f"  {backend:<8}{float(secs):8.3f} s   violations {viol}   witnesses {wit}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[6, 32, 96])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--audit", type=int, default=1000, help="instances in the sweep (0 to skip)")
    args = ap.parse_args()
    start = time.perf_counter()
    bench_kernels(args.sizes, args.repeat)
    if args.audit:
        bench_audit(args.audit)
    print(f"\ntotal {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
