"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]

Each kernel runs on the same random inputs under both backends; results
are checked for agreement before timing. ``--end-to-end`` also times one
default JCRATOA run per backend in a subprocess.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from vfcsim._kernels import available_backends


def sp1_inputs(rng, n):
    c = rng.uniform(1e8, 1e10, n)
    lo = rng.uniform(1e7, 1e8, n)
    hi = lo + rng.uniform(1e8, 1e10, n)
    return (c, lo, hi, 0.5 * hi.sum())


def pava_inputs(rng, n):
    return (rng.normal(size=n), rng.uniform(0.1, 2.0, n), np.sort(rng.uniform(0.5, 3.0, n)))


def da_inputs(rng, n, s):
    prefs = np.array([rng.permutation(s) for _ in range(n)], dtype=np.int64)
    rank = np.array([rng.permutation(n) for _ in range(s)], dtype=np.int64)
    demand = rng.uniform(0.5, 1.5, (n, s))
    cap = np.full(s, n / s * 0.8)
    return (prefs, rank, demand, cap, np.zeros(s, dtype=np.int64))


CASES = [
    ("sp1_kkt", "n=20", lambda r: sp1_inputs(r, 20)),
    ("sp1_kkt", "n=200", lambda r: sp1_inputs(r, 200)),
    ("pava_clip", "n=4", lambda r: pava_inputs(r, 4)),
    ("pava_clip", "n=200", lambda r: pava_inputs(r, 200)),
    ("deferred_acceptance", "N=30 S=15", lambda r: da_inputs(r, 30, 15)),
    ("deferred_acceptance", "N=200 S=40", lambda r: da_inputs(r, 200, 40)),
]


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.allclose(np.asarray(a, float), np.asarray(b, float), rtol=1e-8, equal_nan=True)


def time_call(fn, args, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-7)))
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def end_to_end():
    code = ("import time, vfcsim; from vfcsim import ScenarioConfig, run; t=time.perf_counter(); "
            "run(ScenarioConfig(), 'jcratoa'); print(vfcsim.BACKEND, time.perf_counter()-t)")
    for pure in ("0", "1"):
        env = dict(os.environ, VFCSIM_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        name, secs = out.stdout.split()
        print(f"{'jcratoa run (40 slots)':<22} {'default':<12} {name:>8} {float(secs) * 1e3:12.1f} ms")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()
    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the Python backend is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22} {'size':<12} " + " ".join(f"{b:>12}" for b in backends) + f" {'speedup':>9}")
    for name, label, make in CASES:
        inputs = make(rng)
        results = {b: getattr(m, name)(*inputs) for b, m in backends.items()}
        if "cython" in results and not same(results["python"], results["cython"]):
            raise SystemExit(f"{name} {label}: backends disagree")
        times = {b: time_call(getattr(m, name), inputs, args.repeat) for b, m in backends.items()}
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        cols = " ".join(f"{times[b] * 1e6:10.1f}us" for b in backends)
        print(f"{name:<22} {label:<12} {cols} {speed:8.1f}x")
    if args.end_to_end:
        end_to_end()


if __name__ == "__main__":
    main()
