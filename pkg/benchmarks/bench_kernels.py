"""Time the compiled kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--N 32] [--T 8] [--repeat 7]

Each kernel is timed with `timeit` on identical inputs under both backends,
then a full IST decode (200 iterations) shows the end-to-end effect.
"""
import argparse
import timeit

import numpy as np

from sgmask import kernels
from sgmask.core import Mask, lines_for_rate, make_rng
from sgmask.decoders import ist_dense
from sgmask.phantom import phantom_suite
from sgmask.transform import sample


def _cases(N, T, rng):
    shape = (T, N, N)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    y = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    rm = (rng.random((T, N)) < 0.3).astype(np.uint8)
    out = np.empty(shape, dtype=np.complex128)
    a, b = rng.random((N, N)), rng.random((N, N))
    work = z.copy()

    def prox():
        np.copyto(work, z)
        kernels.prox_step_(work, g, 1.0, 1e-3)

    return {
        "prox_step": prox,
        "l1_norm": lambda: kernels.l1_norm(z),
        "masked_residual": lambda: kernels.masked_residual(z, rm, y, out),
        "ssim_mean_2d": lambda: kernels.ssim_mean_2d(a, b, 8, 1e-4, 9e-4),
    }


def _ist_case(N, T):
    x = np.asarray(phantom_suite(1, N, T, seed=0)[0])
    rng = make_rng(1)
    lines = [(t, yy) for t in range(T) for yy in range(N)]
    idx = rng.permutation(len(lines))[: lines_for_rate(0.25, N, T)]
    mask = Mask([lines[i] for i in idx], N, T)
    dense, rm = sample(x, mask).dense(), mask.row_mask()
    return lambda: ist_dense(dense, rm, lam=1e-3, iters=200, tol=0.0)


def best_time(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=32)
    ap.add_argument("--T", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the numpy fallback only")
    start = kernels.BACKEND
    rows = {}
    for name in backends:
        kernels.use_backend(name)
        cases = _cases(args.N, args.T, make_rng(0))
        cases["ist_decode (200 it)"] = _ist_case(args.N, args.T)
        for label, fn in cases.items():
            number = 3 if label.startswith("ist") else 200
            rows.setdefault(label, {})[name] = best_time(fn, args.repeat, number)
    kernels.use_backend(start)

    print(f"N={args.N} T={args.T}, best of {args.repeat}")
    head = f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        head += f"{'speedup':>10}"
    print(head)
    for label, t in rows.items():
        line = f"{label:<22}" + "".join(f"{t[b] * 1e6:>10.1f}us" for b in backends)
        if len(backends) == 2:
            line += f"{t['python'] / t['cython']:>9.2f}x"
        print(line)


if __name__ == "__main__":
    main()
