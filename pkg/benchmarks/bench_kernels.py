"""Benchmark the compiled Jacobi kernel against the pure-Python fallback.

Also times numpy.linalg.eigvalsh for scale.  Run from the repo root:

    python benchmarks/bench_kernels.py --sizes 2 4 8 16 32 --repeats 50
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qrobust import _kernels_py

try:
    from qrobust import _kernels as _compiled
except ImportError:
    _compiled = None


def _bench(fn, matrices, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for h in matrices:
            fn(h)
        best = min(best, (time.perf_counter() - start) / len(matrices))
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[2, 3, 4, 8, 16, 32, 64])
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--batch", type=int, default=8, help="matrices per size")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'n':>4} {'compiled':>12} {'python':>12} {'numpy':>12} {'speedup':>9} {'max |dw|':>10}")
    for n in args.sizes:
        mats = []
        for _ in range(args.batch):
            g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            mats.append((g + g.conj().T) / 2)
        t_py = _bench(lambda h: _kernels_py.jacobi_eigh(h, compute_vectors=False), mats, max(args.repeats // 4, 1))
        t_np = _bench(np.linalg.eigvalsh, mats, args.repeats)
        if _compiled is not None:
            t_c = _bench(lambda h: _compiled.jacobi_eigh(h, compute_vectors=False), mats, args.repeats)
            dev = max(
                float(np.max(np.abs(_compiled.jacobi_eigh(h, compute_vectors=False)[0]
                                    - _kernels_py.jacobi_eigh(h, compute_vectors=False)[0])))
                for h in mats
            )
            print(f"{n:>4} {t_c * 1e6:>10.1f}us {t_py * 1e6:>10.1f}us {t_np * 1e6:>10.1f}us {t_py / t_c:>8.1f}x {dev:>10.1e}")
        else:
            print(f"{n:>4} {'-':>12} {t_py * 1e6:>10.1f}us {t_np * 1e6:>10.1f}us {'-':>9} {'-':>10}")
    if _compiled is None:
        print("compiled kernel unavailable; showing the pure-Python fallback only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
