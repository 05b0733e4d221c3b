"""Compare the numba kernels with the pure-numpy fallback.

    python benchmarks/bench_backends.py [--repeat 20] [--n 500]

Both backends are imported side by side (``kernels.*_nb`` / ``kernels.*_np``),
so the environment flag is not needed here. Numba compilation happens once in
a warm-up call and is excluded from the timings.
"""
import argparse
import time

import numpy as np

import rbtll as R
from rbtll import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--n", type=int, default=500, help="synthetic sample size")
    args = ap.parse_args(argv)

    truth = R.RbtllParams(2.0, 0.9, 0.5)
    data = {
        "pump (n=23)": R.builtin("pump"),
        f"synthetic (n={args.n})": R.sample(truth, args.n, R.RngStream(1)),
    }
    names = {kernels.MLE: "MLE", kernels.CVME: "CvME", kernels.MPSE: "MPSE", kernels.TW_NLL: "TW"}

    print(f"{'case':<34}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for label, s in data.items():
        logx = np.ascontiguousarray(s.log_sorted)
        for code, name in names.items():
            t0 = np.zeros(kernels.N_PARAMS[code])
            step = np.full(t0.size, 0.25)
            kernels.objective(code, t0, logx)
            kernels.minimize_nb(code, t0, step, logx, 1e-8, 1e-10, 5000)

            ob_nb = best_of(lambda: kernels._objective_nb(code, t0, logx), args.repeat)
            ob_np = best_of(lambda: kernels._objective_np(code, t0, logx), args.repeat)
            fit_nb = best_of(lambda: kernels.minimize_nb(code, t0, step, logx, 1e-8, 1e-10, 5000), max(1, args.repeat // 4))
            fit_np = best_of(lambda: kernels.minimize_np(code, t0, step, logx, 1e-8, 1e-10, 5000), max(1, args.repeat // 4))
            for kind, a, b in (("objective", ob_nb, ob_np), ("minimise", fit_nb, fit_np)):
                print(f"{label + ' ' + name + ' ' + kind:<34}{a * 1e3:>10.3f}ms{b * 1e3:>10.3f}ms{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
