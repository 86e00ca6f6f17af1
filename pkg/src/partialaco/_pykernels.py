"""Pure-Python/numpy kernels.

This is the fallback when the compiled ``_kernels`` extension is missing,
and the executable definition of the kernels' semantics: the Cython
version must reproduce it bit for bit (same draws, same floating-point
operation order, same tie-breaking).
"""

from __future__ import annotations

import time

import numpy as np

from .instance import euc2d, ipow
from .rng import below, uniform_at, uniforms_at

LENGTH_SENTINEL = np.iinfo(np.int64).max

STEP_PARTIAL = 1
STEP_TWO_OPT = 2

BACKEND = "python"


def argmax_scores(taupow: np.ndarray, etapow: np.ndarray, u: np.ndarray) -> int:
    """Index of the largest taupow*etapow*u; first (lowest) index on ties."""
    return int(np.argmax(taupow * etapow * u))


def eta_pow_row(coords: np.ndarray, cur: int, cand: np.ndarray, beta: float) -> np.ndarray:
    dx = coords[cand, 0] - coords[cur, 0]
    dy = coords[cand, 1] - coords[cur, 1]
    d = np.maximum(euc2d(dx, dy), 1.0)
    return ipow(1.0 / d, beta)


def _pair_dists(dist, coords, a, b):
    if dist is not None:
        return dist[a, b].astype(np.int64)
    ca, cb = coords[a], coords[b]
    return euc2d(ca[..., 0] - cb[..., 0], ca[..., 1] - cb[..., 1]).astype(np.int64)


def two_opt_inplace(order: np.ndarray, dist, coords, window: int) -> int:
    """First-improvement 2-opt on ``order`` in place. Returns accepted moves.

    Positions i < j with j - i >= 2 are scanned lexicographically; the pair
    (0, n-1) shares a city and is skipped. ``window > 0`` keeps j - i <= window.
    Passes repeat until one makes no move.
    """
    n = order.shape[0]
    if n < 4:
        return 0
    moves = 0
    improved = True
    while improved:
        improved = False
        for i in range(n - 2):
            jmax = n - 1 if window <= 0 else min(n - 1, i + window)
            if i == 0:
                jmax = min(jmax, n - 2)
            j = i + 2
            a = int(order[i])
            while j <= jmax:
                b = int(order[i + 1])
                js = np.arange(j, jmax + 1)
                c = order[js]
                d = order[(js + 1) % n]
                d_ab = _pair_dists(dist, coords, np.intp(a), np.intp(b))
                gain = (_pair_dists(dist, coords, np.full(js.shape, a), c)
                        + _pair_dists(dist, coords, np.full(js.shape, b), d)
                        - d_ab
                        - _pair_dists(dist, coords, c, d))
                hits = np.flatnonzero(gain < 0)
                if hits.size == 0:
                    break
                jj = int(js[hits[0]])
                order[i + 1:jj + 1] = order[i + 1:jj + 1][::-1].copy()
                moves += 1
                improved = True
                j = jj + 1
    return moves


def cycle_length(order: np.ndarray, dist, coords) -> int:
    o = order.astype(np.intp)
    return int(_pair_dists(dist, coords, o, np.roll(o, -1)).sum())


class Workspace:
    """Per-worker construction scratch bound to an instance and a colony.

    Colony arrays are shared between workspaces; everything else is private.
    ``taupow_matrix`` switches selection to classic matrix pheromone.
    """

    def __init__(self, coords, dist, etapow, alpha, beta, tau0,
                 orders, lengths, nbr, active, pins, gbest,
                 taupow_matrix=None, partial_mode=False, partial_prob=0.0,
                 mod_cap=2, two_opt_prob=0.0, two_opt_window=0):
        self.coords = coords
        self.dist = dist
        self.etapow = etapow
        self.n = coords.shape[0]
        self.m = orders.shape[0]
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.tau0 = float(tau0)
        self.tau0pow = float(ipow(np.float64(self.tau0), self.alpha))
        self.orders, self.lengths, self.nbr = orders, lengths, nbr
        self.active, self.pins, self.gbest = active, pins, gbest
        self.taupow_matrix = taupow_matrix
        self.partial_mode = bool(partial_mode)
        self.partial_prob = float(partial_prob)
        self.mod_cap = int(mod_cap)
        self.two_opt_prob = float(two_opt_prob)
        self.two_opt_window = int(two_opt_window)
        self.tour = np.zeros(self.n, dtype=np.int32)
        self._tau_row = np.full(self.n, self.tau0)
        self._taupow_row = np.full(self.n, self.tau0pow)
        self._snap = np.zeros(self.m, dtype=np.int32)
        self._ratios = np.zeros(self.m)

    # -- pheromone snapshot ------------------------------------------------
    def _pin(self) -> None:
        g = self.gbest[0]
        for k in range(self.m):
            L = self.lengths[k]
            if L == LENGTH_SENTINEL:
                self._ratios[k] = 0.0
                continue
            self._ratios[k] = min(1.0, float(g) / float(L))
            b = self.active[k]
            self._snap[k] = b
            self.pins[k, b] += 1

    def _unpin(self) -> None:
        for k in range(self.m):
            if self._ratios[k] > 0.0:
                self.pins[k, self._snap[k]] -= 1

    def _taupow_for(self, cur: int, cand: np.ndarray) -> np.ndarray:
        if self.taupow_matrix is not None:
            return self.taupow_matrix[cur, cand]
        live = np.flatnonzero(self._ratios > 0.0)
        if live.size == 0:
            return np.full(cand.shape, self.tau0pow)
        touched = self.nbr[live, self._snap[live], cur, :].reshape(-1)
        amounts = np.repeat(self._ratios[live], 2)
        np.add.at(self._tau_row, touched, amounts)
        self._taupow_row[touched] = ipow(self._tau_row[touched], self.alpha)
        out = self._taupow_row[cand]
        self._tau_row[touched] = self.tau0
        self._taupow_row[touched] = self.tau0pow
        return out

    def _etapow_for(self, cur: int, cand: np.ndarray) -> np.ndarray:
        if self.etapow is not None:
            return self.etapow[cur, cand]
        return eta_pow_row(self.coords, cur, cand, self.beta)

    # -- construction ------------------------------------------------------
    def _complete(self, prefix_len: int, count_forced: bool, state: int) -> tuple[int, int]:
        order = self.tour
        visited = np.zeros(self.n, dtype=bool)
        visited[order[:prefix_len]] = True
        cand = np.flatnonzero(~visited)
        cur = int(order[prefix_len - 1])
        pos = prefix_len
        comps = 0
        while cand.size:
            r = cand.size
            if r == 1 and not count_forced:
                order[pos] = cand[0]
                break
            taupow = self._taupow_for(cur, cand)
            etapow = self._etapow_for(cur, cand)
            u, state = uniforms_at(state, r)
            idx = argmax_scores(taupow, etapow, u)
            comps += r
            cur = int(cand[idx])
            order[pos] = cur
            pos += 1
            cand = np.delete(cand, idx)
        return comps, state

    def construct_full(self, start: int, state: int) -> tuple[int, int]:
        """Build a whole tour from city ``start`` into ``self.tour``."""
        self._pin()
        try:
            self.tour[0] = start
            return self._complete(1, True, state)
        finally:
            self._unpin()

    def construct_partial(self, k: int, start_pos: int, n_mod: int, state: int) -> tuple[int, int]:
        """Keep n - n_mod cities of ant k's l_best from ``start_pos``; rebuild the rest."""
        n = self.n
        keep = n - n_mod
        idx = (start_pos + np.arange(keep)) % n
        self.tour[:keep] = self.orders[k, idx]
        if keep >= n - 1:
            if keep == n - 1:
                self.tour[n - 1] = self.orders[k, (start_pos + n - 1) % n]
            return 0, state
        self._pin()
        try:
            return self._complete(keep, False, state)
        finally:
            self._unpin()

    def two_opt(self, window: int) -> int:
        return two_opt_inplace(self.tour, self.dist, self.coords, window)

    def tour_length(self) -> int:
        return cycle_length(self.tour, self.dist, self.coords)

    # -- l_best publication ------------------------------------------------
    def publish(self, k: int, length: int) -> None:
        """Make ``self.tour`` ant k's l_best (double-buffered)."""
        b = 1 - int(self.active[k])
        while self.pins[k, b] != 0:
            time.sleep(0)
        o = self.tour
        self.orders[k, :] = o
        self.nbr[k, b, o, 0] = np.roll(o, 1)
        self.nbr[k, b, o, 1] = np.roll(o, -1)
        self.active[k] = b
        self.lengths[k] = length

    # -- one ant, one iteration -------------------------------------------
    def step(self, k: int, state: int, seeding: bool, publish: bool = True):
        """Construct, maybe 2-opt, and update l_best for ant k.

        With ``publish=False`` the l_best is left alone and the caller
        installs ``self.tour`` later (synchronous mode).
        Returns (length, comparisons, state, improved, flags).
        """
        n = self.n
        flags = 0
        partial = False
        if self.partial_mode and not seeding and self.taupow_matrix is None:
            u, state = uniform_at(state)
            partial = u < self.partial_prob
        if partial:
            u, state = uniform_at(state)
            p = below(u, n)
            u, state = uniform_at(state)
            n_mod = 2 + below(u, self.mod_cap - 1)
            comps, state = self.construct_partial(k, p, n_mod, state)
            flags |= STEP_PARTIAL
        else:
            u, state = uniform_at(state)
            comps, state = self.construct_full(below(u, n), state)
        u, state = uniform_at(state)
        if u < self.two_opt_prob:
            self.two_opt(self.two_opt_window)
            flags |= STEP_TWO_OPT
        length = self.tour_length()
        improved = length < self.lengths[k]
        if improved and publish:
            self.publish(k, length)
        return length, comps, state, improved, flags
