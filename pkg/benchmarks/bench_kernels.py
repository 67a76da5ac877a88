"""Time the numba and numpy kernel backends on identical inputs.

    python3 benchmarks/bench_kernels.py [--points N] [--repeat R]
"""

import argparse
import math
import time

import numpy as np

from cvloc import _kernels, oracle, states
from cvloc.threemode import ThreeModeState, kernel_consts


def best_of(fn, repeat):
    fn()  # warm-up (numba compilation, caches)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)

    consts = kernel_consts(ThreeModeState.from_cm(states.random_physical_cm(3, rng)))
    side = int(math.isqrt(args.points))
    ys, ths = np.linspace(0, 1, side), np.linspace(0, math.pi, side)

    rows = []
    for k in (1, 2):
        g = states.random_physical_cm(2 + k, rng)
        tgt, cross, gcc = oracle._blocks(g, (0, 1), tuple(range(2, 2 + k)))
        s = rng.uniform(0, 1, size=(args.points, k))
        th = rng.uniform(0, math.pi, size=(args.points, k))
        rows.append(
            (
                f"conditioned_mu2 (k={k})",
                best_of(lambda: _kernels.conditioned_mu2_nb(tgt, cross, gcc, s, th), args.repeat),
                best_of(lambda: _kernels.conditioned_mu2_np(tgt, cross, gcc, s, th), args.repeat),
            )
        )
    rows.append(
        (
            "threemode_f_grid",
            best_of(lambda: _kernels.threemode_f_grid_nb(consts, ys, ths), args.repeat),
            best_of(lambda: _kernels.threemode_f_grid_np(consts, ys, ths), args.repeat),
        )
    )

    print(f"points per call: {args.points} (grid kernel {side}x{side}); active backend: {_kernels.BACKEND}")
    print(f"{'kernel':<26}{'numba us/pt':>12}{'numpy us/pt':>13}{'speedup':>9}")
    for name, t_nb, t_np in rows:
        n = side * side if name == "threemode_f_grid" else args.points
        print(f"{name:<26}{1e6 * t_nb / n:>12.4f}{1e6 * t_np / n:>13.4f}{t_np / t_nb:>9.1f}")


if __name__ == "__main__":
    main()
