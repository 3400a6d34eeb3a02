"""Benchmark the partial-likelihood kernels: numba @njit vs pure numpy.

Times one (loglik, gradient, information) evaluation and one full Newton
fit on day-granularity tied data of increasing size.  Run as:

    python benchmarks/bench_cox.py

The numba column includes a separate one-time compile measurement; steady
state is what matters for the acceptance workloads (hundreds of fits).
Set CAUSALSURV_DISABLE_NUMBA=1 to confirm the numpy path is what the
package falls back to.
"""

import time

import numpy as np

from causalsurv import _cox_kernels as kernels
from causalsurv.estimators import cox_fit


def _tied_data(rng, n, p=2, max_day=60):
    x = np.ascontiguousarray(rng.normal(size=(n, p)))
    t = np.ascontiguousarray(np.sort(rng.integers(0, max_day, size=n)).astype(float))
    d = np.ascontiguousarray(rng.integers(0, 2, size=n).astype(np.uint8))
    d[0] = 1
    return x, t, d


def _time_eval(fn, x, t, d, beta, repeats=30):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn(x, t, d, beta, True)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    rng = np.random.default_rng(12345)
    print(f"active backend: {kernels.BACKEND}")
    if kernels.HAVE_NUMBA:
        x, t, d = _tied_data(rng, 200)
        start = time.perf_counter()
        kernels.eval_numba(x, t, d, np.zeros(2), True)
        print(f"numba compile + first call: {time.perf_counter() - start:.2f}s")

    header = f"{'n':>7} {'numpy eval':>12} {'numba eval':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in (200, 1000, 5000, 20000):
        x, t, d = _tied_data(rng, n)
        beta = np.array([0.2, -0.1])
        t_np = _time_eval(kernels.eval_numpy, x, t, d, beta)
        if kernels.HAVE_NUMBA:
            t_nb = _time_eval(kernels.eval_numba, x, t, d, beta)
            print(f"{n:>7} {t_np * 1e3:>10.3f}ms {t_nb * 1e3:>10.3f}ms {t_np / t_nb:>7.1f}x")
        else:
            print(f"{n:>7} {t_np * 1e3:>10.3f}ms {'-':>12} {'-':>8}")

    x, t, d = _tied_data(rng, 5000)
    start = time.perf_counter()
    fit = cox_fit(x, t, d)
    print(
        f"\nfull newton fit, n=5000 ({kernels.BACKEND} backend): "
        f"{time.perf_counter() - start:.3f}s, {fit.iterations} iterations, "
        f"converged={fit.converged}"
    )


if __name__ == "__main__":
    main()
