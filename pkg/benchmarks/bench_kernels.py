"""Compare the compiled and pure event kernels on one workload.

Runs the same seeded network with both kernels and reports wall time,
events per second, and the speedup.  Structural results (event and firing
counts) must match; phases are expected to agree only to roundoff over
short horizons, so this script checks counts, not trajectories (the
equivalence tests in tests/test_kernels.py do the numeric comparison).

Usage: python benchmarks/bench_kernels.py [--n 100] [--horizon 50] [--seed 1]
"""

from __future__ import annotations

import argparse
import time

import pcodelay as pc


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=100)
    parser.add_argument("--epsilon", type=float, default=0.001)
    parser.add_argument("--tau", type=float, default=0.1)
    parser.add_argument("--i", type=float, default=1.05, dest="curve_i")
    parser.add_argument("--horizon", type=float, default=50.0)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    params = pc.ModelParams(
        curve=pc.CurveSpec(i=args.curve_i),
        coupling=pc.CouplingParams(n=args.n, epsilon=args.epsilon, tau=args.tau),
    )
    phases = pc.sample_phases(args.seed, args.n)

    results: dict[str, tuple[float, int, int]] = {}
    for kernel in pc.available_kernels():
        pc.set_kernel(kernel)
        best = float("inf")
        events = fires = 0
        for _ in range(args.repeats):
            net = pc.NetworkState(params, phases, fire_log_limit=4)
            start = time.perf_counter()
            reports = net.run_until_time(args.horizon)
            elapsed = time.perf_counter() - start
            best = min(best, elapsed)
            events = len(reports)
            fires = sum(len(r.fired) for r in reports)
        results[kernel] = (best, events, fires)
        print(
            f"{kernel:>8}: {best * 1e3:8.2f} ms   "
            f"{events / best:12.0f} events/s   "
            f"({events} events, {fires} firings)"
        )
    pc.set_kernel(pc.available_kernels()[0])

    if len(results) == 2:
        pure_t, pure_e, pure_f = results["pure"]
        comp_t, comp_e, comp_f = results["compiled"]
        if (pure_e, pure_f) != (comp_e, comp_f):
            print("WARNING: kernels disagree on event/firing counts")
            return 1
        print(f"speedup: {pure_t / comp_t:.2f}x (compiled over pure)")
    else:
        print("compiled kernel unavailable; nothing to compare")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
