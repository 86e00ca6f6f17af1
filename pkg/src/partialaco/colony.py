"""Colony state: per-ant best tours, the global best, and matrix-free pheromone.

There is no pheromone matrix. The pheromone on edge {i, j} is ``tau0`` plus,
for every ant whose l_best uses that edge, g_best.length / l_best.length.
Each ant's l_best is stored as a neighbour table ``nbr[k, buf, city] =
(pred, succ)`` so the contribution at a city is read in O(m).

The neighbour table is double-buffered per ant. Readers pin the active
buffer for the duration of a construction; a writer fills the inactive
buffer (waiting for its pins to drain) and then flips ``active``, so a
reader always sees one whole tour.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from ._pykernels import LENGTH_SENTINEL
from .instance import Instance, Tour, check_permutation, tour_length
from .rng import SplitMix64, stream_seed


@dataclass
class RunConfig:
    """Every knob of a run. Defaults match the standard experimental setup."""

    m: int = 16
    iterations: int = 100_000
    alpha: float = 5.0
    beta: float = 5.0
    partial_prob: float = 0.95
    max_mod_frac: float = 0.10
    two_opt_prob: float = 0.001
    two_opt_window: int = 0
    workers: int = 8
    seed: int = 0
    rho: float = 0.5
    tau_max: float = 1.0
    tau0: float = 1.0
    time_budget: float | None = None
    sample_interval: float = 1.0
    synchronous: bool = False

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.m < 1:
            raise ValueError("m (ant count) must be at least 1")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if not 0.0 <= self.partial_prob <= 1.0:
            raise ValueError("partial_prob must lie in [0, 1]")
        if not 0.0 < self.max_mod_frac <= 1.0:
            raise ValueError("max_mod_frac must lie in (0, 1]")
        if not 0.0 <= self.two_opt_prob <= 1.0:
            raise ValueError("two_opt_prob must lie in [0, 1]")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if self.two_opt_window < 0:
            raise ValueError("two_opt_window must be >= 0")
        if self.tau0 <= 0 or self.tau_max <= 0:
            raise ValueError("pheromone levels must be positive")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValueError("time_budget must be positive")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")

    def replace(self, **changes) -> "RunConfig":
        values = {**self.__dict__, **changes}
        return RunConfig(**values)


@dataclass
class Ant:
    id: int
    rng: SplitMix64


@dataclass
class ColonyState:
    n: int
    m: int
    tau0: float
    orders: np.ndarray
    lengths: np.ndarray
    nbr: np.ndarray
    active: np.ndarray
    pins: np.ndarray
    gbest_len: np.ndarray
    ants: list[Ant]
    g_best: Tour | None = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @classmethod
    def empty(cls, n: int, m: int, seed: int = 0, tau0: float = 1.0) -> "ColonyState":
        return cls(
            n=n,
            m=m,
            tau0=float(tau0),
            orders=np.zeros((m, n), dtype=np.int32),
            lengths=np.full(m, LENGTH_SENTINEL, dtype=np.int64),
            nbr=np.zeros((m, 2, n, 2), dtype=np.int32),
            active=np.zeros(m, dtype=np.int32),
            pins=np.zeros((m, 2), dtype=np.int32),
            gbest_len=np.full(1, LENGTH_SENTINEL, dtype=np.int64),
            ants=[Ant(k, SplitMix64(stream_seed(seed, k))) for k in range(m)],
        )

    # -- reads ---------------------------------------------------------------
    def has_l_best(self, k: int) -> bool:
        return int(self.lengths[k]) != LENGTH_SENTINEL

    def l_best(self, k: int) -> Tour | None:
        if not self.has_l_best(k):
            return None
        order = self.orders[k].copy()
        order.setflags(write=False)
        return Tour(order, int(self.lengths[k]))

    def contribution(self, k: int) -> float:
        """g_best.length / l_best.length for ant k (0 if it has no tour yet)."""
        if not self.has_l_best(k):
            return 0.0
        return min(1.0, float(self.gbest_len[0]) / float(self.lengths[k]))

    def neighbours(self, k: int, city: int) -> tuple[int, int]:
        b = int(self.active[k])
        p, s = self.nbr[k, b, city]
        return int(p), int(s)

    def pheromone(self, i: int, j: int) -> float:
        """tau0 plus the contribution of every l_best containing edge {i, j}."""
        if i == j:
            raise ValueError("pheromone is defined on edges between distinct cities")
        tau = self.tau0
        for k in range(self.m):
            if self.has_l_best(k):
                p, s = self.neighbours(k, i)
                r = self.contribution(k)
                if p == j:
                    tau += r
                if s == j:
                    tau += r
        return tau

    def pheromone_row(self, i: int, cand: np.ndarray) -> np.ndarray:
        """Pheromone from city i to each city in ``cand``; same summation order as the kernels."""
        row = np.full(self.n, self.tau0)
        for k in range(self.m):
            if self.has_l_best(k):
                r = self.contribution(k)
                p, s = self.neighbours(k, i)
                row[p] += r
                row[s] += r
        return row[np.asarray(cand)]

    def edge_index(self) -> dict[int, list[tuple[int, int]]]:
        """city -> [(neighbour, owning ant), ...] over all current l_best tours."""
        index: dict[int, list[tuple[int, int]]] = {c: [] for c in range(self.n)}
        for k in range(self.m):
            if not self.has_l_best(k):
                continue
            b = int(self.active[k])
            for c in range(self.n):
                p, s = self.nbr[k, b, c]
                index[c].append((int(p), k))
                index[c].append((int(s), k))
        return index

    # -- writes --------------------------------------------------------------
    def publish(self, k: int, order: np.ndarray, length: int) -> None:
        """Install ``order`` as ant k's l_best without any comparison."""
        publish_tour(self, k, order, length)

    def update_l_best(self, k: int, candidate: Tour) -> bool:
        """Replace ant k's l_best iff ``candidate`` is strictly shorter."""
        check_permutation(candidate.order, self.n)
        if candidate.length >= self.lengths[k]:
            return False
        publish_tour(self, k, candidate.order, candidate.length)
        return True

    def update_g_best(self, candidate: Tour) -> bool:
        """Atomically replace g_best iff ``candidate`` is strictly shorter."""
        with self._lock:
            if self.g_best is not None and candidate.length >= self.g_best.length:
                return False
            self.g_best = candidate
            self.gbest_len[0] = candidate.length
            return True

    def offer_l_best_as_g_best(self, k: int) -> bool:
        """Promote ant k's l_best to g_best if shorter. Call from the ant's owner."""
        length = int(self.lengths[k])
        if length >= self.gbest_len[0]:
            return False
        order = self.orders[k].copy()
        order.setflags(write=False)
        return self.update_g_best(Tour(order, length))


def publish_tour(state: ColonyState, k: int, order: np.ndarray, length: int) -> None:
    order = np.asarray(order, dtype=np.int32)
    b = 1 - int(state.active[k])
    while state.pins[k, b] != 0:
        threading.Event().wait(0)
    state.orders[k, :] = order
    state.nbr[k, b, order, 0] = np.roll(order, 1)
    state.nbr[k, b, order, 1] = np.roll(order, -1)
    state.active[k] = b
    state.lengths[k] = length


def check_state(state: ColonyState, inst: Instance | None = None) -> None:
    """Assert the colony invariants (used by tests and debug runs)."""
    total = 0
    for k in range(state.m):
        if not state.has_l_best(k):
            continue
        order = check_permutation(state.orders[k], state.n)
        if inst is not None:
            assert tour_length(inst, order) == state.lengths[k]
        b = int(state.active[k])
        nb = state.nbr[k, b]
        assert np.array_equal(nb[order, 1], np.roll(order, -1))
        assert np.array_equal(nb[order, 0], np.roll(order, 1))
        total += 2 * state.n
    if state.g_best is not None:
        live = [int(state.lengths[k]) for k in range(state.m) if state.has_l_best(k)]
        assert state.g_best.length == min(live), "g_best is not the shortest l_best"
    assert total == sum(len(v) for v in state.edge_index().values())


def mod_cap(n: int, max_mod_frac: float) -> int:
    """Largest number of cities a partial construction may rebuild (2 <= cap <= n-1)."""
    return max(2, min(n - 1, math.floor(max_mod_frac * n + 1e-9)))
