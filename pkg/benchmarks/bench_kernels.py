"""Timing comparison of the numba kernels against the pure-numpy path.

Runs the three hot kernels (batch gradient, squared-error sum, batch
encode) at the shapes a desk-scale training run actually hits: a layer-1
mini-batch update, a layer-1 fitness evaluation, and a layer-2 update.
Prints median times for both flavors, the speedup, and the largest
disagreement between them.

Usage: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from gadl import kernels
from gadl.numerics import RandomStream


def make_case(hidden, visible, batch, seed=0):
    rng = RandomStream(seed).fork("bench", hidden, visible, batch)
    w = np.ascontiguousarray(rng.uniform(-0.05, 0.05, (hidden, visible)))
    b_enc = rng.uniform(-0.1, 0.1, hidden)
    b_dec = rng.uniform(-0.1, 0.1, visible)
    x = np.ascontiguousarray(rng.uniform(0.0, 1.0, (batch, visible)))
    return w, b_enc, b_dec, x


def median_time(fn, args, repeats=30):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def max_disagreement(numpy_out, numba_out):
    if isinstance(numpy_out, tuple):
        return max(float(np.abs(a - b).max())
                   for a, b in zip(numpy_out, numba_out))
    return float(np.abs(np.asarray(numpy_out) - np.asarray(numba_out)).max())


KERNELS = [
    ("gradient_batch", kernels.gradient_batch_numpy,
     getattr(kernels, "gradient_batch_numba", None)),
    ("sum_squared_error", kernels.sum_squared_error_numpy,
     getattr(kernels, "sum_squared_error_numba", None)),
    ("encode_batch", kernels.encode_batch_numpy,
     getattr(kernels, "encode_batch_numba", None)),
]

CASES = [
    ("layer1 update  (64x784, batch 20)", (64, 784, 20)),
    ("layer1 fitness (64x784, batch 1000)", (64, 784, 1000)),
    ("layer2 update  (32x64, batch 20)", (32, 64, 20)),
]


def main():
    if not kernels.HAVE_NUMBA:
        print("numba is not importable; only the numpy path can run")
        return
    kernels.warmup()
    print(f"active backend: {kernels.BACKEND} "
          f"(override with GADL_BACKEND=numpy|numba)\n")
    header = f"{'case':38s} {'kernel':18s} {'numpy':>10s} {'numba':>10s} " \
             f"{'speedup':>8s} {'max diff':>10s}"
    print(header)
    print("-" * len(header))
    for label, (hidden, visible, batch) in CASES:
        args = make_case(hidden, visible, batch)
        for name, np_fn, nb_fn in KERNELS:
            if name == "encode_batch":
                call_args = (args[0], args[1], args[3])
            else:
                call_args = args
            nb_fn(*call_args)  # make sure this signature is compiled
            t_np = median_time(np_fn, call_args)
            t_nb = median_time(nb_fn, call_args)
            diff = max_disagreement(np_fn(*call_args), nb_fn(*call_args))
            print(f"{label:38s} {name:18s} {t_np * 1e6:9.1f}u "
                  f"{t_nb * 1e6:9.1f}u {t_np / t_nb:7.2f}x {diff:10.2e}")
    print("\ntimes are medians over 30 calls; 'u' is microseconds")


if __name__ == "__main__":
    main()
