"""Command-line entry point: ``partialaco solve|bench|preset``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import _backend
from .bench import FULL_TRIALS, PRESETS, load_spec, preset_spec, render_table, run_experiment
from .colony import RunConfig
from .engine import Mode, run
from .instance import load_instance, load_optima


def _add_run_options(p: argparse.ArgumentParser, defaults: bool) -> None:
    """RunConfig flags. Without defaults, unset flags leave the config alone."""
    d = RunConfig() if defaults else None

    def dflt(name):
        return getattr(d, name) if d else None

    p.add_argument("--ants", dest="m", type=int, default=dflt("m"), help="number of ants (m)")
    p.add_argument("--iters", dest="iterations", type=int, default=dflt("iterations"))
    p.add_argument("--alpha", type=float, default=dflt("alpha"))
    p.add_argument("--beta", type=float, default=dflt("beta"))
    p.add_argument("--partial-prob", dest="partial_prob", type=float, default=dflt("partial_prob"))
    p.add_argument("--max-mod", dest="max_mod_frac", type=float, default=dflt("max_mod_frac"),
                   help="max fraction of the tour rebuilt by a partial construction")
    p.add_argument("--two-opt-prob", dest="two_opt_prob", type=float, default=dflt("two_opt_prob"))
    p.add_argument("--two-opt-window", dest="two_opt_window", type=int, default=dflt("two_opt_window"),
                   help="0 means unbounded")
    p.add_argument("--workers", type=int, default=dflt("workers"))
    p.add_argument("--seed", type=int, default=dflt("seed"))
    p.add_argument("--time-budget", dest="time_budget", type=float, default=None,
                   help="stop after this many seconds")
    p.add_argument("--sample-interval", dest="sample_interval", type=float, default=dflt("sample_interval"))
    p.add_argument("--synchronous", action="store_true", default=None,
                   help="barrier between iterations (deterministic with several workers)")


_RUN_FIELDS = ("m", "iterations", "alpha", "beta", "partial_prob", "max_mod_frac", "two_opt_prob",
               "two_opt_window", "workers", "seed", "time_budget", "sample_interval", "synchronous")


def _run_kwargs(args) -> dict:
    return {k: getattr(args, k) for k in _RUN_FIELDS if getattr(args, k, None) is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="partialaco", description="PartialACO TSP solver and benchmark harness")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--backend", choices=("auto", "cython", "python"), default=None,
                        help="kernel implementation (default: compiled if available)")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one TSPLIB instance")
    s.add_argument("instance", type=Path)
    s.add_argument("--mode", default="partial", choices=("partial", "paco", "classic"))
    _add_run_options(s, defaults=True)
    s.add_argument("--optima", type=Path, help="file of 'name optimum' lines")
    s.add_argument("--convergence-csv", type=Path)
    s.add_argument("--tour-out", type=Path, help="write the best tour, one city id per line")

    b = sub.add_parser("bench", help="run a sweep described by a TOML file")
    b.add_argument("config", type=Path)
    b.add_argument("--out", type=Path)
    b.add_argument("--trials", type=int)
    b.add_argument("--full-trials", action="store_true", help=f"use {FULL_TRIALS} trials per row")
    _add_run_options(b, defaults=False)

    p = sub.add_parser("preset", help="run a built-in table preset")
    p.add_argument("name", nargs="?", choices=sorted(PRESETS))
    p.add_argument("--list", action="store_true", help="list presets and exit")
    p.add_argument("--data-dir", type=Path, default=Path("."))
    p.add_argument("--instances", nargs="+", help="restrict to these instance names")
    p.add_argument("--out", type=Path)
    p.add_argument("--trials", type=int)
    p.add_argument("--full-trials", action="store_true", help=f"use {FULL_TRIALS} trials per row")
    _add_run_options(p, defaults=False)
    return parser


def _trials(args) -> int | None:
    return FULL_TRIALS if args.full_trials else args.trials


def cmd_solve(args, backend) -> int:
    optima = load_optima(args.optima) if args.optima else None
    inst = load_instance(args.instance, optima)
    cfg = RunConfig(**_run_kwargs(args))
    report = run(inst, cfg, Mode.parse(args.mode), convergence_csv=args.convergence_csv, backend=backend)
    print(f"instance      {report.instance} (n={report.n})")
    print(f"mode          {report.mode}")
    print(f"best length   {report.best_length}")
    if report.pct_error is not None:
        print(f"error         {report.pct_error:.3f}%")
    print(f"wall time     {report.wall_time:.3f}s")
    print(f"iterations    {report.iterations_done}")
    print(f"comparisons   {report.comparisons_total}")
    print(f"partial/2-opt {report.partial_builds}/{report.two_opt_runs}")
    if args.tour_out:
        args.tour_out.write_text("\n".join(str(int(c)) for c in report.best_tour.order) + "\n")
    return 0


def _sweep(spec, backend) -> int:
    rows = run_experiment(spec, backend=backend, progress=lambda m: print(m, file=sys.stderr, flush=True))
    print(render_table(rows), end="")
    if spec.out_dir is not None:
        print(f"results written to {spec.out_dir}")
    return 1 if any(r.error for r in rows) else 0


def cmd_bench(args, backend) -> int:
    spec = load_spec(args.config, trials=_trials(args), out_dir=args.out, **_run_kwargs(args))
    return _sweep(spec, backend)


def cmd_preset(args, backend) -> int:
    if args.list or not args.name:
        for name, p in PRESETS.items():
            tag = " [extended]" if p.extended else ""
            print(f"{name:10s} {p.description}{tag}")
        return 0
    spec = preset_spec(args.name, args.data_dir, trials=_trials(args), out_dir=args.out,
                       instances=args.instances, **_run_kwargs(args))
    return _sweep(spec, backend)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        backend = _backend.load(args.backend) if args.backend else None
        handler = {"solve": cmd_solve, "bench": cmd_bench, "preset": cmd_preset}[args.command]
        return handler(args, backend)
    except (OSError, ValueError, ImportError) as exc:
        print(f"partialaco: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
