"""Compare the numba and pure-numpy kernel backends.

Usage::

    python benchmarks/bench_backends.py            # kernels + desk benchmark
    python benchmarks/bench_backends.py --kernels  # kernels only

Kernel timings call both variants directly in one process (numba timings
exclude compilation).  The end-to-end desk run is launched twice in
subprocesses, once with ``DDSC_DISABLE_NUMBA=1``.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from ddsc import kernels
from ddsc._numba import HAVE_NUMBA


def _best(fn, repeat=5):
    number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def bench_kernels():
    rng = np.random.default_rng(0)
    print(f"{'kernel':<24}{'shape':<22}{'numpy us':>12}{'numba us':>12}{'ratio':>8}")
    for n, m, f in ((45, 3, 16), (1500, 3, 16), (20000, 6, 64)):
        Z = rng.normal(size=(n, f))
        Z /= np.linalg.norm(Z, axis=1, keepdims=True)
        P = rng.normal(size=(m, f))
        P /= np.linalg.norm(P, axis=1, keepdims=True)
        seen = np.ones(m, dtype=bool)
        kernels.posterior_entropy_numba(Z, P, seen, 0.1)
        a = _best(lambda: kernels.posterior_entropy_numpy(Z, P, seen, 0.1))
        b = _best(lambda: kernels.posterior_entropy_numba(Z, P, seen, 0.1))
        print(f"{'posterior_entropy':<24}{f'N={n} M={m} F={f}':<22}{a * 1e6:>12.1f}{b * 1e6:>12.1f}{a / b:>8.2f}")
    for n, d, f, c in ((16, 32, 16, 5), (256, 32, 16, 5), (1500, 32, 16, 5), (4096, 128, 64, 10)):
        X = rng.normal(size=(n, d))
        y = rng.integers(c, size=n)
        w = np.full(n, 1.0 / n)
        params = (rng.normal(size=(f, d)), np.zeros(f), rng.normal(size=(c, f)), np.zeros(c))
        kernels.mlp_loss_and_grad_numba(X, y, w, *params)
        a = _best(lambda: kernels.mlp_loss_and_grad_numpy(X, y, w, *params))
        b = _best(lambda: kernels.mlp_loss_and_grad_numba(X, y, w, *params))
        print(f"{'mlp_loss_and_grad':<24}{f'B={n} D={d} F={f} C={c}':<22}{a * 1e6:>12.1f}{b * 1e6:>12.1f}{a / b:>8.2f}")
        a = _best(lambda: kernels.mlp_forward_numpy(X, *params))
        b = _best(lambda: kernels.mlp_forward_numba(X, *params))
        print(f"{'mlp_forward':<24}{f'B={n} D={d} F={f} C={c}':<22}{a * 1e6:>12.1f}{b * 1e6:>12.1f}{a / b:>8.2f}")


_DESK = """
import time
from ddsc.bench import SyntheticDatasetSpec, run_benchmark
from ddsc.kernels import BACKEND
run_benchmark(SyntheticDatasetSpec(), ["ddsc"], 2, [0])  # warm-up / JIT
t = time.perf_counter()
run_benchmark(SyntheticDatasetSpec(), ["uniform", "ddsc", "static_entropy"], 40, list(range(20)))
print(f"{BACKEND:<8}{time.perf_counter() - t:8.2f}s")
"""


def bench_desk():
    print("\ndesk benchmark (3 strategies x 20 seeds x 40 epochs), warm:", flush=True)
    for disable in ("1", "0"):
        env = dict(os.environ, DDSC_DISABLE_NUMBA=disable)
        subprocess.run([sys.executable, "-c", _DESK], env=env, check=True)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--kernels", action="store_true", help="skip the end-to-end run")
    args = p.parse_args()
    if not HAVE_NUMBA:
        sys.exit("numba unavailable or disabled; nothing to compare")
    bench_kernels()
    if not args.kernels:
        bench_desk()


if __name__ == "__main__":
    main()
