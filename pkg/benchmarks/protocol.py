"""Run the five pcb442 acceptance configurations on any TSPLIB instance.

The accuracy thresholds are calibrated for pcb442; on other instances the
output is evidence about trends (speedups, cap trade-off), not a verdict.

    python benchmarks/protocol.py tests/data/pr107.tsp --trials 10 --iters 100000
"""

from __future__ import annotations

import argparse
import json
import statistics
from pathlib import Path

from partialaco import RunConfig, load_instance, load_optima, run

CONFIGS = {
    "c2 paco": ("paco", {}),
    "c3 partial": ("partial", {"partial_prob": 1.0, "max_mod_frac": 1.0}),
    "c4 partial+2opt": ("partial", {"partial_prob": 1.0, "max_mod_frac": 1.0, "two_opt_prob": 0.001}),
    "c5 partial cap10": ("partial", {"partial_prob": 1.0, "max_mod_frac": 0.10}),
    "c6 partial cap20+2opt": ("partial", {"partial_prob": 1.0, "max_mod_frac": 0.20, "two_opt_prob": 0.001}),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("instance", type=Path)
    ap.add_argument("--optima", type=Path, default=Path(__file__).parents[1] / "tests" / "data" / "optima.txt")
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--iters", type=int, default=100_000)
    ap.add_argument("--json", type=Path)
    args = ap.parse_args()

    inst = load_instance(args.instance, load_optima(args.optima))
    base = RunConfig(m=16, iterations=args.iters, alpha=5, beta=5, two_opt_prob=0.0, workers=1)
    results = {}
    for name, (mode, kw) in CONFIGS.items():
        errs, times = [], []
        for t in range(args.trials):
            rep = run(inst, base.replace(seed=t, **kw), mode)
            errs.append(rep.pct_error)
            times.append(rep.wall_time)
            print(f"{name:24s} trial {t}: {rep.pct_error:6.2f}%  {rep.wall_time:7.2f}s", flush=True)
        results[name] = {"mean_err": statistics.fmean(errs), "sd_err": statistics.stdev(errs) if len(errs) > 1 else 0.0,
                         "mean_time": statistics.fmean(times)}
    base_time = results["c2 paco"]["mean_time"]
    print(f"\n{inst.name}: {args.trials} trials x {args.iters} iterations")
    for name, r in results.items():
        r["speedup"] = base_time / r["mean_time"]
        print(f"{name:24s} {r['mean_err']:6.2f} ± {r['sd_err']:.2f} %   {r['mean_time']:8.2f}s   {r['speedup']:6.2f}x")
    if args.json:
        args.json.write_text(json.dumps({"instance": inst.name, "trials": args.trials,
                                         "iterations": args.iters, "results": results}, indent=2))


if __name__ == "__main__":
    main()
