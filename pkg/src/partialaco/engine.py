"""Run orchestration: seeding, the per-ant iteration loop, worker threads,
mode selection, convergence sampling and the time-limited baseline."""

from __future__ import annotations

import csv
import logging
import sys
import threading
import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO

import numpy as np

from . import _backend
from .colony import ColonyState, RunConfig, publish_tour
from .construction import PheromoneMatrix, make_workspace
from .instance import MATRIX_LIMIT, Instance, Tour, check_permutation, tour_length

log = logging.getLogger(__name__)

STEP_PARTIAL = 1
STEP_TWO_OPT = 2


class ConfigError(ValueError):
    pass


class Mode(str, Enum):
    PARTIAL = "partial_aco"
    PACO = "paco_full"
    CLASSIC = "classic_aco"

    @classmethod
    def parse(cls, value: "Mode | str") -> "Mode":
        if isinstance(value, Mode):
            return value
        aliases = {"partial": cls.PARTIAL, "paco": cls.PACO, "classic": cls.CLASSIC}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise ConfigError(f"unknown mode {value!r}") from None


@dataclass
class RunReport:
    instance: str
    mode: str
    n: int
    best_length: int
    best_tour: Tour
    pct_error: float | None
    wall_time: float
    iterations_done: int
    comparisons_total: int
    convergence: list[tuple[float, int, int]] = field(default_factory=list)
    partial_builds: int = 0
    two_opt_runs: int = 0
    config: RunConfig | None = None

    def summary(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k not in ("best_tour", "convergence", "config")}
        d["seed"] = self.config.seed if self.config else None
        return d


def pct_error(length: int, optimum: int | None) -> float | None:
    if optimum is None:
        return None
    return 100.0 * (length - optimum) / optimum


@dataclass
class _Tally:
    comparisons: int = 0
    partial: int = 0
    two_opt: int = 0
    iterations: int = 0


class _Sampler:
    """Convergence samples (elapsed seconds, g_best length, iterations done)."""

    def __init__(self, state: ColonyState, t0: float, interval: float, sink: IO[str] | None) -> None:
        self.state = state
        self.t0 = t0
        self.interval = interval
        self.samples: list[tuple[float, int, int]] = []
        self.last = -float("inf")
        self._writer = None
        self._sink = sink
        if sink is not None:
            self._writer = csv.writer(sink)
            self._writer.writerow(["elapsed_s", "g_best_length", "iterations_done"])

    def due(self, now: float) -> bool:
        return now - self.last >= self.interval

    def sample(self, now: float, iterations: int) -> None:
        g = self.state.g_best
        if g is None:
            return
        row = (now - self.t0, int(g.length), int(iterations))
        self.samples.append(row)
        self.last = now
        if self._writer is not None:
            self._writer.writerow([repr(row[0]), row[1], row[2]])
            self._sink.flush()


def run(
    inst: Instance,
    cfg: RunConfig,
    mode: Mode | str = Mode.PARTIAL,
    *,
    convergence_csv: str | Path | None = None,
    backend=None,
    check: bool = False,
) -> RunReport:
    """Solve ``inst`` with the given configuration and mode.

    Iteration 1 seeds every ant with a full tour; later iterations let each
    ant build (partially or fully), maybe 2-opt, and update its l_best and
    the colony's g_best. Stops after ``cfg.iterations`` iterations or once
    ``cfg.time_budget`` seconds have passed, finishing the iteration in
    flight. ``check=True`` validates every constructed tour.
    """
    mode = Mode.parse(mode)
    cfg.validate()
    if mode is Mode.CLASSIC and inst.n > MATRIX_LIMIT:
        raise ConfigError(f"classic mode needs a pheromone matrix; n={inst.n} exceeds {MATRIX_LIMIT}")
    kernels = backend or _backend.kernels

    state = ColonyState.empty(inst.n, cfg.m, cfg.seed, cfg.tau0)
    pm = taupow = None
    if mode is Mode.CLASSIC:
        pm = PheromoneMatrix(inst.n, cfg.rho, cfg.tau_max)
        taupow = pm.taupow(cfg.alpha)

    workers = min(cfg.workers, cfg.m)
    groups = [g.tolist() for g in np.array_split(np.arange(cfg.m), workers)]
    rng_states = [ant.rng.state for ant in state.ants]

    def workspace():
        return make_workspace(inst, state, cfg, partial_mode=mode is Mode.PARTIAL,
                              taupow_matrix=taupow, backend=kernels)

    sink = open(convergence_csv, "w", newline="", encoding="utf-8") if convergence_csv else None
    t0 = time.perf_counter()
    sampler = _Sampler(state, t0, cfg.sample_interval, sink)
    try:
        if mode is Mode.CLASSIC or cfg.synchronous:
            tallies = _run_synchronous(state, cfg, groups, rng_states, workspace, sampler, pm, taupow, check)
        elif workers == 1:
            tallies = [_run_serial(state, cfg, rng_states, workspace(), sampler, check)]
        else:
            tallies = _run_async(state, cfg, groups, rng_states, workspace, sampler, check)
        now = time.perf_counter()
        iterations_done = min(t.iterations for t in tallies)
        sampler.sample(now, iterations_done)
    finally:
        if sink is not None:
            sink.close()
    wall = now - t0

    for ant, s in zip(state.ants, rng_states):
        ant.rng.state = s
    best = state.g_best
    assert best is not None
    if check:
        assert tour_length(inst, best.order) == best.length
    return RunReport(
        instance=inst.name,
        mode=mode.value,
        n=inst.n,
        best_length=int(best.length),
        best_tour=best,
        pct_error=pct_error(best.length, inst.optimum),
        wall_time=wall,
        iterations_done=iterations_done,
        comparisons_total=sum(t.comparisons for t in tallies),
        convergence=sampler.samples,
        partial_builds=sum(t.partial for t in tallies),
        two_opt_runs=sum(t.two_opt for t in tallies),
        config=cfg,
    )


def _account(tally: _Tally, comps: int, flags: int) -> None:
    tally.comparisons += comps
    if flags & STEP_PARTIAL:
        tally.partial += 1
    if flags & STEP_TWO_OPT:
        tally.two_opt += 1


def _run_serial(state, cfg, rng_states, ws, sampler, check) -> _Tally:
    tally = _Tally()
    budget = cfg.time_budget
    n = state.n
    for it in range(cfg.iterations):
        seeding = it == 0
        for k in range(cfg.m):
            _, comps, rng_states[k], improved, flags = ws.step(k, rng_states[k], seeding)
            _account(tally, comps, flags)
            if check:
                check_permutation(ws.tour, n)
            if improved:
                state.offer_l_best_as_g_best(k)
        tally.iterations = it + 1
        now = time.perf_counter()
        if sampler.due(now):
            sampler.sample(now, tally.iterations)
        if budget is not None and now - sampler.t0 >= budget:
            break
    return tally


def _run_async(state, cfg, groups, rng_states, make_ws, sampler, check) -> list[_Tally]:
    """Workers loop over their own ants with no iteration barrier."""
    stop = threading.Event()
    tallies = [_Tally() for _ in groups]
    errors: list[BaseException] = []
    budget = cfg.time_budget
    n = state.n

    def worker(w: int) -> None:
        tally = tallies[w]
        try:
            ws = make_ws()
            for it in range(cfg.iterations):
                seeding = it == 0
                for k in groups[w]:
                    _, comps, rng_states[k], improved, flags = ws.step(k, rng_states[k], seeding)
                    _account(tally, comps, flags)
                    if check:
                        check_permutation(ws.tour, n)
                    if improved:
                        state.offer_l_best_as_g_best(k)
                tally.iterations = it + 1
                if budget is not None and time.perf_counter() - sampler.t0 >= budget:
                    stop.set()
                if stop.is_set():
                    break
        except BaseException as exc:  # noqa: BLE001 - re-raised in the caller
            errors.append(exc)
            stop.set()

    threads = [threading.Thread(target=worker, args=(w,), daemon=True) for w in range(len(groups))]
    for t in threads:
        t.start()
    for t in threads:
        while t.is_alive():
            t.join(timeout=cfg.sample_interval)
            now = time.perf_counter()
            if sampler.due(now):
                sampler.sample(now, min(x.iterations for x in tallies))
    if errors:
        raise errors[0]
    return tallies


def _run_synchronous(state, cfg, groups, rng_states, make_ws, sampler, pm, taupow, check) -> list[_Tally]:
    """Barriered iterations: every ant builds against the same colony snapshot,
    then l_best/g_best (and the classic matrix) are updated in ant order."""
    m = cfg.m
    pending: list[tuple[np.ndarray, int, bool] | None] = [None] * m
    tallies = [_Tally() for _ in groups]
    stop = threading.Event()
    errors: list[BaseException] = []
    done = [0]

    def apply() -> None:
        for k in range(m):
            order, length, improved = pending[k]
            if improved:
                publish_tour(state, k, order, length)
                state.offer_l_best_as_g_best(k)
        if pm is not None:
            pm.evaporate()
            pm.deposit([Tour(p[0], p[1]) for p in pending])
            pm.taupow(cfg.alpha, out=taupow)
        done[0] += 1
        now = time.perf_counter()
        if sampler.due(now):
            sampler.sample(now, done[0])
        if cfg.time_budget is not None and now - sampler.t0 >= cfg.time_budget:
            stop.set()

    barrier = threading.Barrier(len(groups), action=apply)

    def worker(w: int) -> None:
        tally = tallies[w]
        try:
            ws = make_ws()
            for it in range(cfg.iterations):
                for k in groups[w]:
                    length, comps, rng_states[k], improved, flags = ws.step(
                        k, rng_states[k], it == 0, False)
                    _account(tally, comps, flags)
                    if check:
                        check_permutation(ws.tour, state.n)
                    pending[k] = (ws.tour.copy(), int(length), bool(improved))
                barrier.wait()
                tally.iterations = it + 1
                if stop.is_set():
                    break
        except threading.BrokenBarrierError:
            pass
        except BaseException as exc:  # noqa: BLE001
            errors.append(exc)
            barrier.abort()

    if len(groups) == 1:
        worker(0)
    else:
        threads = [threading.Thread(target=worker, args=(w,), daemon=True) for w in range(len(groups))]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    if errors:
        raise errors[0]
    return tallies


def run_timed_baseline(inst: Instance, cfg: RunConfig, budget: float, **kwargs) -> RunReport:
    """Run plain P-ACO (full constructions) until ``budget`` seconds have passed.

    The in-flight iteration is always completed, so at least the seeding
    iteration is reported.
    """
    if budget <= 0:
        raise ConfigError("budget must be positive")
    timed = cfg.replace(iterations=sys.maxsize, time_budget=budget)
    return run(inst, timed, Mode.PACO, **kwargs)
