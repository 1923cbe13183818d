"""Compare the numba and numpy kernel backends (speed and agreement).

    python3 benchmarks/bench_kernels.py [--repeat R]
"""
import argparse
import timeit

import numpy as np

from modsg import kernels
from modsg.modular import make_modular_params


def cases(rng):
    p = make_modular_params(np.pi / 4)
    x = rng.uniform(-2, 2, 4000)
    u = p.u(x)
    x0 = rng.normal(0, 0.3, 400)
    w = np.full(x0.size, 2.0 / x0.size)
    c = rng.normal(size=24) + 1j * rng.normal(size=24)
    return {
        "log_qpoch": lambda be: kernels.log_qpoch(-p.q * u, p.q2, backend=be),
        "qpoch_inf": lambda be: kernels.qpoch_inf(-p.q * u, p.q2, backend=be),
        "polyval": lambda be: kernels.polyval(c, u, backend=be),
        "sech_convolve": lambda be: kernels.sech_convolve(x, x0, w, p.eta, backend=be),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        print("numba unavailable (or MODSG_DISABLE_NUMBA set); numpy timings only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<15}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max rel diff':>15}")
    for name, f in cases(rng).items():
        t_np = min(timeit.repeat(lambda: f("numpy"), number=1, repeat=args.repeat)) * 1e3
        if kernels.HAVE_NUMBA:
            f("numba")  # compile
            t_nb = min(timeit.repeat(lambda: f("numba"), number=1, repeat=args.repeat)) * 1e3
            a, b = f("numpy"), f("numba")
            diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
            print(f"{name:<15}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>10.1f}{diff:>15.2e}")
        else:
            print(f"{name:<15}{t_np:>12.3f}{'-':>12}{'-':>10}{'-':>15}")


if __name__ == "__main__":
    main()
