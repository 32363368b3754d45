#!/usr/bin/env python3
"""Benchmark the compiled kernel extension against the numpy fallback.

Times the three hot paths on synthetic data sized like one hour of
256 Hz EEG: SOS band-pass filtering, fused per-frame pulse counting
(VLD + rejection passes), and per-train rejection reduction.

Usage: python benchmarks/bench_kernels.py [--seconds N] [--repeats N]
"""

import argparse
import time

import numpy as np

from cseiz import _kernels_py
from cseiz.preprocess import design_bandpass

try:
    from cseiz import _kernels_c
except ImportError:
    _kernels_c = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(seconds, repeats):
    fs = 256.0
    rng = np.random.default_rng(0)
    x = np.ascontiguousarray(rng.normal(scale=250.0, size=int(seconds * fs)))
    sos = design_bandpass(3.0, 29.0, fs)
    bits = (rng.random(int(seconds * fs)) < 0.5).astype(np.uint8)

    backends = [("python", _kernels_py)]
    if _kernels_c is not None:
        backends.insert(0, ("compiled", _kernels_c))

    cases = {
        "sos_filter": lambda mod: mod.sos_filter(sos, x, None),
        "frame_pulse_counts": lambda mod: mod.frame_pulse_counts(
            x, 128, 150.0, 400.0, 4),
        "frame_mean_square": lambda mod: mod.frame_mean_square(x, 128),
        "sra_reduce": lambda mod: mod.sra_reduce(bits, 6, 4),
    }

    print(f"signal: {seconds:.0f} s at {fs:.0f} Hz "
          f"({len(x)} samples), best of {repeats}")
    header = f"{'kernel':<22}" + "".join(f"{name:>14}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for case, call in cases.items():
        times = [timeit(lambda m=mod: call(m), repeats)
                 for _, mod in backends]
        row = f"{case:<22}" + "".join(f"{t * 1e3:>11.2f} ms" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>9.1f}x"
        print(row)
    if _kernels_c is None:
        print("compiled extension not built; showing fallback only")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seconds", type=float, default=3600.0,
                        help="signal length to synthesize (default 1 h)")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    run(args.seconds, args.repeats)


if __name__ == "__main__":
    main()
