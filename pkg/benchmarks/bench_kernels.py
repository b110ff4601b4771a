"""Time the leave-two-out kernel on both backends.

    python3 benchmarks/bench_kernels.py [--machines 16] [--processes 128] [--repeat 5]

Also checks that both backends return identical counts.
"""

from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from crossmachine._kernels import _reference
from crossmachine.experiments import simulate_fleet, synthetic_fleet
from crossmachine.runtime_model import REL_SLACK

try:
    from crossmachine._kernels import _core
except ImportError:
    _core = None


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--machines", type=int, default=16)
    ap.add_argument("--processes", type=int, default=128)
    ap.add_argument("--gammas", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    m = simulate_fleet(synthetic_fleet(args.machines, args.processes, "lognormal", 0.05, seed=0))
    call = (m.scores, m.runtimes, np.linspace(0.05, 1.0, args.gammas), REL_SLACK)
    backends = [("python", _reference.leave_two_out_counts)]
    if _core is not None:
        backends.append(("cython", _core.leave_two_out_counts))
    else:
        print("compiled extension not built; timing the fallback only", file=sys.stderr)

    folds = args.processes * args.machines * (args.machines - 1)
    print(f"{args.machines} machines x {args.processes} processes, {folds} folds, {args.gammas} gammas")
    results, best = {}, {}
    for name, fn in backends:
        results[name] = fn(*call)
        best[name] = min(timeit.repeat(lambda: fn(*call), number=1, repeat=args.repeat))
        print(f"{name:>7}: {best[name] * 1e3:9.2f} ms  ({folds / best[name]:,.0f} folds/s)")
    if "cython" in best:
        print(f"speedup: {best['python'] / best['cython']:.1f}x")
        same = np.array_equal(results["python"][0], results["cython"][0])
        print(f"identical counts: {same}")
        return 0 if same else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
