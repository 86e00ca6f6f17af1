"""Tour construction: Independent Roulette selection, full and partial builds,
and the classic pheromone matrix used by the reference ACO mode."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _backend
from ._pykernels import argmax_scores, eta_pow_row
from .colony import ColonyState, RunConfig, mod_cap
from .instance import MATRIX_LIMIT, Instance, Tour, ipow
from .rng import SplitMix64

PHEROMONE_FLOOR = 1e-6

PheromoneSource = Callable[[int, np.ndarray], np.ndarray]


def full_comparisons(n: int) -> int:
    """Edge comparisons for one full construction: (n-1) + ... + 1."""
    return n * (n - 1) // 2


def partial_comparisons(n_mod: int) -> int:
    """Edge comparisons when rebuilding ``n_mod`` cities: n_mod + ... + 2.

    The last rebuilt city is forced and appended without a comparison.
    """
    if n_mod < 2:
        return 0
    return n_mod * (n_mod - 1) // 2 + (n_mod - 1)


@dataclass
class ConstructionScratch:
    n: int
    visited: np.ndarray = field(init=False)
    partial: list[int] = field(default_factory=list)
    current: int = -1
    comparisons: int = 0

    def __post_init__(self) -> None:
        self.visited = np.zeros(self.n, dtype=bool)

    @classmethod
    def starting_at(cls, n: int, city: int) -> "ConstructionScratch":
        s = cls(n)
        s.visit(city)
        return s

    def visit(self, city: int) -> None:
        if self.visited[city]:
            raise ValueError(f"city {city} already visited")
        self.visited[city] = True
        self.partial.append(int(city))
        self.current = int(city)

    def unvisited(self) -> np.ndarray:
        return np.flatnonzero(~self.visited)


def select_next(
    current: int,
    scratch: ConstructionScratch,
    pheromone: PheromoneSource,
    inst: Instance,
    alpha: float,
    beta: float,
    rng: SplitMix64,
) -> int:
    """Independent Roulette: argmax over unvisited j of tau^alpha * eta^beta * u_j.

    One uniform u_j per candidate, drawn in ascending city order. eta is
    1/d with d clamped to at least 1. Ties go to the lowest city index.
    Visits the chosen city and adds the candidate count to
    ``scratch.comparisons``.
    """
    cand = scratch.unvisited()
    if cand.size == 0:
        raise ValueError("no unvisited city left")
    taupow = ipow(np.asarray(pheromone(current, cand), dtype=np.float64), float(alpha))
    etapow = inst.eta_pow(beta)
    eta = etapow[current, cand] if etapow is not None else eta_pow_row(inst.coords, current, cand, beta)
    u = rng.randoms(cand.size)
    nxt = int(cand[argmax_scores(taupow, eta, u)])
    scratch.comparisons += int(cand.size)
    scratch.visit(nxt)
    return nxt


class PheromoneMatrix:
    """Dense symmetric pheromone for classic ACO (n <= MATRIX_LIMIT)."""

    def __init__(self, n: int, rho: float, tau_max: float = 1.0, floor: float = PHEROMONE_FLOOR) -> None:
        if n > MATRIX_LIMIT:
            raise ValueError(f"pheromone matrix refused for n={n} > {MATRIX_LIMIT}")
        if not 0.0 <= rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        self.rho = float(rho)
        self.floor = float(floor)
        self.tau = np.full((n, n), float(tau_max))

    @property
    def n(self) -> int:
        return self.tau.shape[0]

    def __call__(self, i: int, cand: np.ndarray) -> np.ndarray:
        return self.tau[i, cand]

    def evaporate(self) -> None:
        self.tau *= 1.0 - self.rho
        np.maximum(self.tau, self.floor, out=self.tau)

    def deposit(self, tours: list[Tour]) -> None:
        for t in tours:
            a = np.asarray(t.order, dtype=np.intp)
            b = np.roll(a, -1)
            amount = 1.0 / t.length
            np.add.at(self.tau, (a, b), amount)
            np.add.at(self.tau, (b, a), amount)

    def taupow(self, alpha: float, out: np.ndarray | None = None) -> np.ndarray:
        res = ipow(self.tau, float(alpha))
        if out is None:
            return res
        out[...] = res
        return out


def classic_evaporate(pm: PheromoneMatrix) -> None:
    pm.evaporate()


def classic_deposit(pm: PheromoneMatrix, tours: list[Tour]) -> None:
    pm.deposit(tours)


def make_workspace(inst: Instance, state: ColonyState, cfg: RunConfig, *, partial_mode: bool = True,
                   taupow_matrix: np.ndarray | None = None, backend=None):
    k = backend or _backend.kernels
    return k.Workspace(
        inst.coords, inst.dist_matrix, inst.eta_pow(cfg.beta), cfg.alpha, cfg.beta, state.tau0,
        state.orders, state.lengths, state.nbr, state.active, state.pins, state.gbest_len,
        taupow_matrix=taupow_matrix, partial_mode=partial_mode, partial_prob=cfg.partial_prob,
        mod_cap=mod_cap(inst.n, cfg.max_mod_frac), two_opt_prob=cfg.two_opt_prob,
        two_opt_window=cfg.two_opt_window,
    )


def construct_full(ant, state: ColonyState, inst: Instance, cfg: RunConfig, *,
                   start: int | None = None, backend=None) -> tuple[Tour, int]:
    """Build a full tour for ``ant`` from a uniformly random city.

    Returns the tour and the number of edge comparisons made.
    """
    ws = make_workspace(inst, state, cfg, backend=backend)
    if start is None:
        start = ant.rng.randbelow(inst.n)
    comps, ant.rng.state = ws.construct_full(start, ant.rng.state)
    return Tour.of(inst, ws.tour), comps


def construct_partial(ant, state: ColonyState, inst: Instance, cfg: RunConfig, *,
                      start_pos: int | None = None, n_mod: int | None = None,
                      backend=None) -> tuple[Tour, int]:
    """Keep a cyclic segment of the ant's l_best and rebuild the other ``n_mod`` cities.

    ``start_pos`` is uniform over tour positions and ``n_mod`` uniform over
    {2, ..., cap} unless given. ``n_mod < 2`` returns the l_best itself.
    """
    if not state.has_l_best(ant.id):
        raise ValueError(f"ant {ant.id} has no l_best to preserve")
    n = inst.n
    if start_pos is None:
        start_pos = ant.rng.randbelow(n)
    if n_mod is None:
        n_mod = 2 + ant.rng.randbelow(mod_cap(n, cfg.max_mod_frac) - 1)
    if not 0 <= n_mod <= n - 1:
        raise ValueError(f"n_mod must lie in [0, {n - 1}]")
    ws = make_workspace(inst, state, cfg, backend=backend)
    comps, ant.rng.state = ws.construct_partial(ant.id, start_pos, n_mod, ant.rng.state)
    return Tour.of(inst, ws.tour), comps
