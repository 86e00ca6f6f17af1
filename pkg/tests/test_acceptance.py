"""Acceptance criteria 1-9. Each test prints one PASS/FAIL line, repeated in
the terminal summary.

The pcb442 criteria (2-6) need ``pcb442.tsp`` in ``tests/data`` or in the
directory named by ``PARTIALACO_DATA``. Without it they report FAIL and are
marked xfail, so the rest of the suite stays usable.
"""

from __future__ import annotations

import os
import statistics
from pathlib import Path

import numpy as np
import pytest

from partialaco import (
    PRESETS,
    ColonyState,
    RunConfig,
    Tour,
    brute_force_optimum,
    check_permutation,
    check_state,
    construct_full,
    construct_partial,
    full_comparisons,
    load_instance,
    load_optima,
    partial_comparisons,
    random_instance,
    run,
    tour_length,
    two_opt,
)
from partialaco.construction import make_workspace

from oracles import pheromone_by_scan

LINES: list[str] = []
DATA = Path(__file__).parent / "data"
TRIALS = 10


def report(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} | {detail}"
    LINES.append(line)
    print(line)


def pcb442_path() -> Path | None:
    for d in (os.environ.get("PARTIALACO_DATA"), DATA):
        if d and (Path(d) / "pcb442.tsp").is_file():
            return Path(d) / "pcb442.tsp"
    return None


# -- 1 ------------------------------------------------------------------------

def test_criterion_1_oracle_optimality():
    import time
    t0 = time.perf_counter()
    r = np.random.default_rng(2024)
    hits = 0
    for i in range(50):
        n = int(r.integers(6, 10))
        inst = random_instance(n, np.random.default_rng(int(r.integers(2**32))))
        cfg = RunConfig(m=16, iterations=5000, alpha=5, beta=5, partial_prob=0.95, two_opt_prob=0.01,
                        workers=1, seed=i)
        rep = run(inst, cfg, "partial")
        hits += rep.best_length == brute_force_optimum(inst).length
    elapsed = time.perf_counter() - t0
    ok = hits >= 45 and elapsed < 60
    report(1, ok, f"{hits}/50 brute-force optima (need >= 45) in {elapsed:.1f}s (need < 60s)")
    assert ok


# -- 2..6: pcb442 -------------------------------------------------------------

BASE = dict(m=16, iterations=100_000, alpha=5, beta=5, two_opt_prob=0.0, workers=1)
PCB_CONFIGS = {
    2: ("paco", {}),
    3: ("partial", {"partial_prob": 1.0, "max_mod_frac": 1.0}),
    4: ("partial", {"partial_prob": 1.0, "max_mod_frac": 1.0, "two_opt_prob": 0.001}),
    5: ("partial", {"partial_prob": 1.0, "max_mod_frac": 0.10}),
    6: ("partial", {"partial_prob": 1.0, "max_mod_frac": 0.20, "two_opt_prob": 0.001}),
}
_cache: dict[tuple[int, int], dict] = {}


def pcb_trials(num: int, attempt: int = 0) -> dict:
    """Mean %-error and mean wall time of TRIALS runs of configuration ``num``."""
    key = (num, attempt)
    if key not in _cache:
        inst = load_instance(pcb442_path(), load_optima(DATA / "optima.txt"))
        mode, kw = PCB_CONFIGS[num]
        errs, times = [], []
        for t in range(TRIALS):
            rep = run(inst, RunConfig(**{**BASE, **kw}, seed=1000 * attempt + t), mode)
            errs.append(rep.pct_error)
            times.append(rep.wall_time)
        _cache[key] = {"err": statistics.fmean(errs), "sd": statistics.stdev(errs),
                       "time": statistics.fmean(times)}
    return _cache[key]


def need_pcb442(num: int) -> None:
    if pcb442_path() is None:
        report(num, False, "pcb442.tsp not available (set PARTIALACO_DATA); criterion not evaluated")
        pytest.xfail("pcb442.tsp not available")


def with_one_rerun(num: int, check) -> tuple[bool, str]:
    ok, detail = check(0)
    if not ok:
        ok, detail = check(1)
        detail += " (after one rerun)"
    return ok, detail


def test_criterion_2_baseline_accuracy():
    need_pcb442(2)

    def check(a):
        r = pcb_trials(2, a)
        return r["err"] <= 7.0, f"P-ACO mean error {r['err']:.2f} ± {r['sd']:.2f}% (need <= 7%)"
    ok, detail = with_one_rerun(2, check)
    report(2, ok, detail)
    assert ok


def test_criterion_3_partial_accuracy_and_speed():
    need_pcb442(3)

    def check(a):
        r, b = pcb_trials(3, a), pcb_trials(2)
        s = b["time"] / r["time"]
        return (r["err"] <= 5.0 and s >= 1.5,
                f"mean error {r['err']:.2f}% (need <= 5%), speedup {s:.2f}x (need >= 1.5x)")
    ok, detail = with_one_rerun(3, check)
    report(3, ok, detail)
    assert ok


def test_criterion_4_partial_with_two_opt():
    need_pcb442(4)

    def check(a):
        r = pcb_trials(4, a)
        return r["err"] <= 3.0, f"mean error {r['err']:.2f}% (need <= 3%)"
    ok, detail = with_one_rerun(4, check)
    report(4, ok, detail)
    assert ok


def test_criterion_5_cap_trade_off():
    need_pcb442(5)

    def check(a):
        r, b, full = pcb_trials(5, a), pcb_trials(2), pcb_trials(3)
        s = b["time"] / r["time"]
        return (s >= 6.0 and r["err"] > full["err"],
                f"10% cap speedup {s:.2f}x (need >= 6x), error {r['err']:.2f}% vs uncapped {full['err']:.2f}% "
                f"(need worse)")
    ok, detail = with_one_rerun(5, check)
    report(5, ok, detail)
    assert ok


def test_criterion_6_cap_with_two_opt():
    need_pcb442(6)

    def check(a):
        r, b = pcb_trials(6, a), pcb_trials(2)
        s = b["time"] / r["time"]
        return (r["err"] <= 3.0 and s >= 4.0,
                f"20% cap + 2-opt error {r['err']:.2f}% (need <= 3%), speedup {s:.2f}x (need >= 4x)")
    ok, detail = with_one_rerun(6, check)
    report(6, ok, detail)
    assert ok


# -- 7 ------------------------------------------------------------------------

def seeded_colony(inst, m, seed=0):
    r = np.random.default_rng(seed)
    s = ColonyState.empty(inst.n, m, seed=seed)
    for k in range(m):
        t = Tour.of(inst, r.permutation(inst.n))
        s.update_l_best(k, t)
        s.update_g_best(t)
    return s


def test_criterion_7_comparison_accounting():
    path = pcb442_path()
    inst = load_instance(path) if path else random_instance(442, np.random.default_rng(442))
    cfg = RunConfig(m=16)
    s = seeded_colony(inst, 16)
    full_counts = [construct_full(s.ants[k], s, inst, cfg)[1] for k in range(3)]
    partial_ok = True
    for k in (2, 3, 10, 44, 221, 441):
        _, c = construct_partial(s.ants[0], s, inst, cfg, n_mod=k)
        partial_ok &= c == k * (k - 1) // 2 + (k - 1)

    big = random_instance(100_000, np.random.default_rng(1))
    bs = ColonyState.empty(big.n, 1)
    order = np.random.default_rng(2).permutation(big.n)
    bs.update_l_best(0, Tour(order.astype(np.int32), tour_length(big, order)))
    bs.update_g_best(bs.l_best(0))
    _, c_big = construct_partial(bs.ants[0], bs, big, RunConfig(m=1), n_mod=1000)
    full_big = full_comparisons(100_000)
    ratio = full_big / c_big

    ok = (all(c == 97_461 for c in full_counts) and partial_ok
          and c_big == 500_499 == partial_comparisons(1000)
          and full_big == 4_999_950_000
          and abs(ratio / 10_000 - 1) < 0.005)
    src = "pcb442" if path else "random n=442"
    report(7, ok, f"full build on {src} counted {full_counts[0]} (need 97461); partial counts k(k-1)/2+(k-1) "
                  f"{'exact' if partial_ok else 'WRONG'}; n=100000 with 1% rebuilt: {c_big} vs {full_big} "
                  f"-> {ratio:.0f}-fold")
    assert ok


# -- 8 ------------------------------------------------------------------------

def test_criterion_8_invariant_suite(berlin52):
    checks: dict[str, bool] = {}

    # permutation validity after every construction and 2-opt (check=True asserts per build)
    reps = [run(berlin52, RunConfig(m=8, iterations=150, workers=w, two_opt_prob=0.05, seed=1,
                                    sample_interval=1e-4), mode, check=True)
            for mode, w in (("partial", 1), ("partial", 4), ("paco", 2), ("classic", 2))]
    checks["permutations"] = all(check_permutation(r.best_tour.order, 52) is not None for r in reps)

    checks["g_best monotone"] = all(
        all(a[1] >= b[1] for a, b in zip(r.convergence, r.convergence[1:])) for r in reps)

    # pheromone bounds and edge-index equivalence on a 40-city colony mid-run
    inst = random_instance(40, np.random.default_rng(8))
    cfg = RunConfig(m=6, partial_prob=0.9, two_opt_prob=0.05)
    s = ColonyState.empty(40, 6, seed=3)
    ws = make_workspace(inst, s, cfg)
    for it in range(30):
        for k, ant in enumerate(s.ants):
            _, _, ant.rng.state, improved, _ = ws.step(k, ant.rng.state, it == 0)
            check_permutation(ws.tour, 40)
            if improved:
                s.offer_l_best_as_g_best(k)
    check_state(s, inst)
    tours = [s.orders[k].tolist() for k in range(6)]
    lengths = [int(x) for x in s.lengths]
    bounds = index = True
    for i in range(40):
        row = s.pheromone_row(i, np.arange(40))
        for j in range(40):
            if i != j:
                bounds &= 1.0 <= row[j] <= 1.0 + 6
                index &= abs(row[j] - pheromone_by_scan(tours, lengths, s.g_best.length, 1.0, i, j)) < 1e-12
    checks["pheromone bounds"] = bounds
    checks["edge-index equivalence"] = index

    r = np.random.default_rng(5)
    non_worse = window_eq = True
    for _ in range(20):
        n = int(r.integers(5, 60))
        tinst = random_instance(n, r)
        t = Tour.of(tinst, r.permutation(n))
        full = two_opt(tinst, t)
        non_worse &= full.length <= t.length
        window_eq &= two_opt(tinst, t, n - 1).order.tolist() == full.order.tolist()
    checks["2-opt non-worsening"] = non_worse
    checks["windowed == unbounded (W >= n-1)"] = window_eq

    a = run(berlin52, RunConfig(m=8, iterations=200, workers=1, seed=9), "partial")
    b = run(berlin52, RunConfig(m=8, iterations=200, workers=1, seed=9), "partial")
    checks["seed determinism"] = (a.best_tour.order.tolist() == b.best_tour.order.tolist()
                                  and a.comparisons_total == b.comparisons_total
                                  and a.iterations_done == b.iterations_done)

    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    report(8, ok, f"{sum(checks.values())}/{len(checks)} invariant groups hold"
                  + (f"; failing: {', '.join(failed)}" if failed else ""))
    assert ok


# -- 9 ------------------------------------------------------------------------

def test_criterion_9_large_scale_stand_in():
    extended = {name for name, p in PRESETS.items() if p.extended}
    ratio = full_comparisons(100_000) / partial_comparisons(1000)
    ok = {"table7", "table8"} <= extended and round(ratio, -2) == 10_000
    report(9, ok, f"art-instance presets {sorted(extended)} available (optional, not run); "
                  f"stand-in comparison ratio {ratio:.1f} ~ 10,000-fold")
    assert ok
