"""Time the hot kernels and one full decision under both backends.

    python benchmarks/bench_kernels.py            # both backends, side by side
    python benchmarks/bench_kernels.py --inner    # current backend only (used internally)

The numpy backend is selected by setting TWOCENTER3D_DISABLE_NUMBA=1 before import,
so each backend runs in its own interpreter.
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def inner(repeat: int) -> dict:
    from twocenter3d import _accel
    from twocenter3d.generators import planted
    from twocenter3d.solver import brute_force_decide, decide_cubic, optimize_reference

    _accel.warmup()
    rng = np.random.default_rng(0)
    P200 = rng.normal(size=(200, 3))
    P12 = rng.normal(size=(12, 3))
    masks = rng.random((500, 12)) < 0.5
    order = np.arange(12)
    P10 = planted(10, seed=1, distance=4.0).points
    r = optimize_reference(P10).radius
    cases = {
        "seb_ordered n=200": lambda: _accel.seb_ordered(P200, np.arange(200)),
        "all_bipartition_radii n=12": lambda: _accel.all_bipartition_radii(P12, order),
        "mask_batch_radii 500x12": lambda: _accel.mask_batch_radii(P12, masks, order),
        "small_subset_radii n=12": lambda: _accel.small_subset_radii(P12),
        "brute_force_decide n=10": lambda: brute_force_decide(P10, r),
        "decide_cubic n=10": lambda: decide_cubic(P10, r),
    }
    return {"backend": _accel.BACKEND, "seconds": {k: _best(f, repeat) for k, f in cases.items()}}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--inner", action="store_true")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if args.inner:
        json.dump(inner(args.repeat), sys.stdout)
        return
    results = []
    for disable in (False, True):
        env = dict(os.environ)
        env.pop("TWOCENTER3D_DISABLE_NUMBA", None)
        if disable:
            env["TWOCENTER3D_DISABLE_NUMBA"] = "1"
        out = subprocess.run([sys.executable, __file__, "--inner", "--repeat", str(args.repeat)],
                             env=env, capture_output=True, text=True, check=True).stdout
        results.append(json.loads(out))
    fast, slow = results
    print(f"{'kernel':32s} {fast['backend']:>10s} {slow['backend']:>10s} {'speedup':>8s}")
    for k, t in fast["seconds"].items():
        s = slow["seconds"][k]
        print(f"{k:32s} {t * 1e3:9.2f}ms {s * 1e3:9.2f}ms {s / t:7.1f}x")


if __name__ == "__main__":
    main()
