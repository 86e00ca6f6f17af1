"""Compare the compiled and pure-Python kernel backends.

Times full and partial constructions, 2-opt and whole runs on random
Euclidean instances, checks that both backends produce the same tours, and
prints one line per case:

    python benchmarks/bench_kernels.py [--sizes 100 442] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from partialaco import RunConfig, random_instance, run
from partialaco._backend import available, load
from partialaco.colony import ColonyState
from partialaco.construction import make_workspace


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def seeded_workspace(inst, cfg, kernels, partial_mode):
    state = ColonyState.empty(inst.n, cfg.m, cfg.seed)
    ws = make_workspace(inst, state, cfg, partial_mode=partial_mode, backend=kernels)
    for k, ant in enumerate(state.ants):
        _, _, ant.rng.state, _, _ = ws.step(k, ant.rng.state, True)
    return state, ws


def kernel_cases(inst, cfg, kernels, steps):
    out = {}
    state, ws = seeded_workspace(inst, cfg, kernels, partial_mode=False)
    rng = state.ants[0].rng

    def full():
        for _ in range(steps):
            rng.state = ws.construct_full(0, rng.state)[1]
    out["full construction"] = (full, steps)

    pstate, pws = seeded_workspace(inst, cfg.replace(partial_prob=1.0), kernels, partial_mode=True)
    prng = pstate.ants[0].rng
    n_mod = max(2, inst.n // 10)

    def partial():
        for _ in range(steps):
            prng.state = pws.construct_partial(0, 0, n_mod, prng.state)[1]
    out["partial construction (10%)"] = (partial, steps)

    tour = pstate.orders[0].copy()

    def two_opt():
        pws.tour[:] = tour
        pws.two_opt(0)
    out["2-opt from l_best"] = (two_opt, 1)
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 442])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--steps", type=int, default=20)
    ap.add_argument("--iters", type=int, default=20)
    args = ap.parse_args()

    names = available()
    if "cython" not in names:
        print("compiled backend not built; only the Python fallback is available")
    backends = {name: load(name) for name in names}
    cfg = RunConfig(m=16, iterations=args.iters, workers=1, two_opt_prob=0.0)

    print(f"{'n':>5}  {'case':28s}" + "".join(f"{b:>14s}" for b in backends) + "   ratio")
    for n in args.sizes:
        inst = random_instance(n, np.random.default_rng(n))
        per_backend = {b: kernel_cases(inst, cfg, k, args.steps) for b, k in backends.items()}
        for case in per_backend["python"]:
            t = {}
            for b in backends:
                fn, count = per_backend[b][case]
                t[b] = best_of(fn, args.repeat) / count
            print(f"{n:5d}  {case:28s}" + "".join(f"{t[b] * 1e3:11.3f} ms" for b in backends)
                  + (f"  {t['python'] / t['cython']:6.1f}x" if "cython" in t else ""))

        reports = {}
        for mode in ("partial", "paco"):
            t = {}
            for b, k in backends.items():
                reports[b] = run(inst, cfg, mode, backend=k)
                t[b] = reports[b].wall_time
            same = len({(r.best_length, tuple(r.best_tour.order)) for r in reports.values()}) == 1
            case = f"run {mode} x{args.iters}" + ("" if same else " MISMATCH")
            print(f"{n:5d}  {case:28s}" + "".join(f"{t[b] * 1e3:11.1f} ms" for b in backends)
                  + (f"  {t['python'] / t['cython']:6.1f}x" if "cython" in t else ""))


if __name__ == "__main__":
    main()
