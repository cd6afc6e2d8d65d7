"""Compiled vs interpreted kernels: MCMC updates and vertex accumulation.

    python benchmarks/bench_kernels.py [--n 32] [--steps 200000]
"""
import argparse
import time

import numpy as np

from aztec_tangent import _accel, _kernels
from aztec_tangent import sampler as S
from aztec_tangent.exact import WeightPair
from aztec_tangent.lgv import StartConfig


def best_of(fn, repeat=3):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_mcmc(cfg, w, steps):
    out = {}
    for backend in ("numba", "python") if _accel.USE_NUMBA else ("python",):
        ch = S.Chain(cfg, w, seed=1, backend=backend)
        ch.steps(1000)  # compile / warm up
        count = steps if backend == "numba" else max(steps // 20, 1000)
        out[backend] = best_of(lambda: ch.steps(count)) / count
    return out


def bench_vertices(cfg, w, snaps):
    states = list(S.run_chain(cfg, w, snaps * 2, snaps, seed=2))
    starts = np.array(cfg.starts, dtype=np.int64)
    shape = (cfg.m + 1, cfg.n + 1)
    impls = {"numpy": _kernels.accumulate_vertices_np, "python": _kernels.accumulate_vertices_py}
    if _accel.USE_NUMBA:
        impls["numba"] = _kernels.accumulate_vertices
    out = {}
    for name, fn in impls.items():
        arrs = [np.zeros(shape, dtype=np.int64) for _ in range(3)]
        fn(states[0].H, states[0].D, starts, *arrs)

        def go():
            for ps in states:
                fn(ps.H, ps.D, starts, *arrs)
        out[name] = best_of(go) / len(states)
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--steps", type=int, default=200000)
    ap.add_argument("--snapshots", type=int, default=200)
    args = ap.parse_args()
    cfg, w = StartConfig.aztec(args.n), WeightPair(1, 1)
    print(f"Aztec diamond n={args.n}, numba enabled: {_accel.USE_NUMBA}")
    mc = bench_mcmc(cfg, w, args.steps)
    for k, v in mc.items():
        print(f"mcmc     {k:7s} {v * 1e9:10.1f} ns/update")
    if "numba" in mc:
        print(f"mcmc     speedup  {mc['python'] / mc['numba']:10.1f}x")
    vx = bench_vertices(cfg, w, args.snapshots)
    for k, v in vx.items():
        print(f"heatmap  {k:7s} {v * 1e6:10.1f} us/snapshot")
    if "numba" in vx:
        print(f"heatmap  numba vs numpy {vx['numpy'] / vx['numba']:6.1f}x")


if __name__ == "__main__":
    main()
