"""Time the numba kernels against the pure-numpy fallback.

Run with ``python benchmarks/bench_kernels.py [--repeat N] [--rows N]``.
Both implementations are imported side by side; the environment flag only
decides which one the estimators use by default.
"""

import argparse
import statistics
import time

import numpy as np

from gravfit import _kernels
from gravfit.estimators import fit_tobit_bhhh, tobit_problem
from gravfit.model_frame import build_design, gravity_spec
from gravfit.synthetic import gravity_table


def _time(fn, repeat):
    fn()  # warm-up (jit compilation, caches)
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--rows", type=int, default=18360)
    args = ap.parse_args(argv)

    impls = [i for i in (_kernels.numpy_impl, _kernels.numba_impl) if i is not None]
    table = gravity_table(n=args.rows, seed=0)
    design = build_design(table, gravity_spec())
    X = np.ascontiguousarray(design.X)
    rng = np.random.default_rng(0)
    y = np.log(159.0 + design.y)
    cens = design.y == 0
    xb = X @ (0.01 * rng.normal(size=X.shape[1]))
    _, d_xb, d_ls = _kernels.numpy_impl.tobit_terms(y, xb, cens, float(y.min()), 0.5)
    sw = np.sqrt(rng.uniform(0.5, 2.0, X.shape[0]))
    S = X.T @ X

    cases = {
        "tobit_terms": lambda k: k.tobit_terms(y, xb, cens, float(y.min()), 0.5),
        "opg": lambda k: k.opg(X, d_xb, d_ls),
        "householder": lambda k: k.householder(X * sw[:, None], y * sw),
        "cholesky": lambda k: k.cholesky(S),
    }
    print(f"rows={X.shape[0]} cols={X.shape[1]} repeat={args.repeat}  (median seconds)")
    print(f"{'kernel':<14}" + "".join(f"{i.name:>12}" for i in impls) + "     speedup")
    for name, fn in cases.items():
        times = [_time(lambda k=k: fn(k), args.repeat) for k in impls]
        ratio = f"{times[0] / times[1]:10.2f}x" if len(times) == 2 else ""
        print(f"{name:<14}" + "".join(f"{t:12.6f}" for t in times) + ratio)

    # a full Tobit fit at a=159 with each implementation active
    problem = tobit_problem(table, gravity_spec(), 159.0)
    saved = _kernels.active
    times = []
    try:
        for k in impls:
            _kernels.active = k
            times.append(_time(lambda: fit_tobit_bhhh(problem), max(1, args.repeat // 10)))
    finally:
        _kernels.active = saved
    ratio = f"{times[0] / times[1]:10.2f}x" if len(times) == 2 else ""
    print(f"{'tobit fit':<14}" + "".join(f"{t:12.6f}" for t in times) + ratio)


if __name__ == "__main__":
    main()
