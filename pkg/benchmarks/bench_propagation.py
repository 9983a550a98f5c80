#!/usr/bin/env python3
"""Benchmark the propagation kernels: compiled extension vs. pure-Python fallback.

Workloads:
  unitary    five-pulse storage sequence, midpoint-exponential stepper
  lindblad   the same sequence plus four decay channels, RK4 stepper
  hold       50/Omega dissipative hold (no drive), RK4 stepper

Usage: python benchmarks/bench_propagation.py [--repeats N]
"""

import argparse
import time

import numpy as np

from qmem import (
    PulseSchedule,
    PureState,
    density_from_pure,
    four_level_system,
    memory_sequence,
    propagate_lindblad,
    propagate_unitary,
    symmetric_decay_channels,
)
from qmem import _kernels


def _workloads():
    sys4 = four_level_system()
    rho0 = density_from_pure(PureState(np.array([1, 0, 2, 0]) / np.sqrt(5)))
    sched = memory_sequence(sys4)
    channels = symmetric_decay_channels(sys4, 0.05)
    empty = PulseSchedule(())
    return {
        "unitary": lambda: propagate_unitary(rho0, sys4, sched),
        "lindblad": lambda: propagate_lindblad(rho0, sys4, sched, channels),
        "hold": lambda: propagate_lindblad(
            rho0, sys4, empty, channels, t_span=(0.0, 50.0), step_scale=20.0
        ),
    }


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = list(_kernels.available())
    results = {}
    for backend in backends:
        _kernels.select(backend)
        for name, fn in _workloads().items():
            fn()  # warm up
            results[(backend, name)] = _time(fn, args.repeats)
    _kernels.select("auto")

    names = sorted({name for _, name in results})
    print(f"{'workload':<10} " + " ".join(f"{b + ' [s]':>14}" for b in backends) + "   speedup")
    for name in names:
        times = [results[(b, name)] for b in backends]
        speedup = times[0] / times[-1] if len(times) > 1 else float("nan")
        row = f"{name:<10} " + " ".join(f"{t:>14.6f}" for t in times)
        if len(times) > 1:
            row += f"   {speedup:>6.1f}x"
        print(row)
    if len(backends) == 1:
        print("(compiled kernels not built; showing fallback only)")


if __name__ == "__main__":
    main()
