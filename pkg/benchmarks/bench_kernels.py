"""Compare the compiled and pure-Python window kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--stream 100000]

Reports per-call time of ``weighted_stats`` for several window sizes and the
end-to-end engine throughput under each backend. The engine runs in a child
process per backend because the backend is fixed at import.
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from fraudwin import _pykernels

try:
    from fraudwin import _ckernels
except ImportError:
    _ckernels = None

ENGINE_SNIPPET = """
import time
from fraudwin import kernels
from fraudwin.engine import run
from fraudwin.lab import GenParams, generate
s = generate(GenParams(seed=0, n_cards=100, txns_per_card={per_card}))
t0 = time.perf_counter()
run(s)
print(kernels.BACKEND, len(s) / (time.perf_counter() - t0))
"""


def bench_kernel(mod, sizes, lam, repeat):
    rng = random.Random(0)
    out = {}
    for n in sizes:
        xs = [rng.uniform(0.01, 1000.0) for _ in range(n)]
        number = max(1000, 200_000 // n)
        t = min(timeit.repeat(lambda: mod.weighted_stats(xs, lam), number=number, repeat=repeat))
        out[n] = t / number * 1e6
    return out


def bench_engine(pure, stream):
    env = dict(os.environ, FRAUDWIN_PURE="1" if pure else "0")
    code = ENGINE_SNIPPET.format(per_card=max(1, stream // 100))
    res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, rate = res.stdout.split()
    return backend, float(rate)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--stream", type=int, default=100_000)
    args = ap.parse_args(argv)

    sizes = (3, 20, 100, 1000)
    py = bench_kernel(_pykernels, sizes, 0.9, args.repeat)
    print(f"{'window':>8} {'python us':>10} {'cython us':>10} {'speedup':>8}")
    if _ckernels is None:
        print("compiled extension not built; python only")
    cy = bench_kernel(_ckernels, sizes, 0.9, args.repeat) if _ckernels else {}
    for n in sizes:
        c = cy.get(n)
        print(f"{n:>8} {py[n]:>10.2f} {c if c is None else format(c, '10.2f'):>10} "
              f"{'' if c is None else format(py[n] / c, '7.1f') + 'x':>8}")

    print()
    for pure in (True, False):
        backend, rate = bench_engine(pure, args.stream)
        print(f"engine ({backend:>6}): {rate:,.0f} txn/s")


if __name__ == "__main__":
    main()
