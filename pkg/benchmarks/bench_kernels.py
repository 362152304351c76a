"""Compare the numba and numpy kernels.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Numba compile time is excluded by a warm-up call per kernel.
"""
import argparse
import math
import time

import numpy as np

from coplan import kernels
from coplan._jit import HAVE_NUMBA
from coplan.agents import PipelineSpec, PipelineStage, place_pipeline
from coplan.netsim import LinkProfile
from coplan.planner import DeviceProfile, TaskSpec, plan


def fleet(rng, n):
    out = [DeviceProfile("d0", e=float(rng.uniform(0.1, 5)), f=float(rng.uniform(0.1, 5)), kind="initiator")]
    for i in range(1, n):
        out.append(DeviceProfile(f"d{i}", e=float(rng.uniform(0.1, 5)), f=float(rng.uniform(0.1, 5)),
                                 c=float(rng.uniform(0, 2)), b=float(rng.uniform(5, 40)),
                                 trusted=bool(rng.random() < 0.5), link="bt"))
    return out


def pipeline(rng, K, devices):
    stages = []
    for k in range(K):
        owners = devices[:1] if k == 0 else devices
        costs = {d.id: (float(rng.uniform(0.01, 0.2)), float(rng.uniform(0.01, 0.2))) for d in owners}
        stages.append(PipelineStage(f"s{k}", costs, float(rng.uniform(0.001, 0.05)), 1.0 if k < 2 else 0.8))
    return PipelineSpec(stages)


def best_of(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    backends = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
    links = [LinkProfile("bt", 2.1, 0.44, 0.44)]

    cases = []
    for n in (10, 30, 60):
        fl = fleet(rng, n)
        task = TaskSpec(4.0 * n, sensitive=float(n) / 2, gamma=1.0)
        cases.append((f"plan n={n}", lambda b, fl=fl, task=task: plan(task, fl, backend=b)))
    for K, n in ((5, 5), (7, 6)):
        fl = fleet(rng, n)
        pipe = pipeline(rng, K, fl)
        cases.append((f"pipeline K={K} n={n} ({n ** (K - 1)} assignments)",
                      lambda b, fl=fl, pipe=pipe: place_pipeline(pipe, fl, links, backend=b)))

    # the raw enumeration kernel, without table construction
    K, n = 8, 6
    args_ = [rng.uniform(size=(K, n)) for _ in range(3)] + [rng.uniform(size=(K, n, n)) for _ in range(3)]
    probs = np.cumprod(np.r_[1.0, np.full(K - 1, 0.9)])
    cases.append((f"enumerate kernel K={K} n={n} ({n ** (K - 1)} assignments)",
                  lambda b: kernels.enumerate_pipeline(*args_, probs, backend=b)))

    print(f"{'case':<48}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for name, fn in cases:
        row = []
        for b in backends:
            fn(b)  # warm-up / compile
            row.append(best_of(lambda: fn(b), args.repeat))
        line = f"{name:<48}" + "".join(f"{t * 1e3:>10.3f}ms" for t in row)
        if len(row) == 2:
            line += f"{row[1] / row[0]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
