"""Independent reference implementations used as test oracles.

Deliberately naive: plain Python loops, no numpy vectorisation, no shared
helpers from the package beyond the RNG stream definition.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from partialaco.rng import SplitMix64


def nint_dist(a, b) -> int:
    dx, dy = a[0] - b[0], a[1] - b[1]
    return int(math.floor(math.sqrt(dx * dx + dy * dy) + 0.5))


def dist_table(coords) -> list[list[int]]:
    pts = [tuple(map(float, c)) for c in coords]
    return [[nint_dist(p, q) for q in pts] for p in pts]


def cycle_length_reverse(d, order) -> int:
    """Sum the cycle walking it backwards."""
    o = list(order)[::-1]
    return sum(d[o[i]][o[(i + 1) % len(o)]] for i in range(len(o)))


def held_karp(d) -> int:
    """Exact TSP optimum by dynamic programming over subsets."""
    n = len(d)
    best = {(1 << 0 | 1 << j, j): d[0][j] for j in range(1, n)}
    for size in range(3, n + 1):
        for subset in itertools.combinations(range(1, n), size - 1):
            mask = 1
            for c in subset:
                mask |= 1 << c
            for j in subset:
                prev = mask ^ (1 << j)
                best[(mask, j)] = min(best[(prev, k)] + d[k][j] for k in subset if k != j)
    full = (1 << n) - 1
    return min(best[(full, j)] + d[j][0] for j in range(1, n))


def improving_two_opt_move(d, order) -> tuple[int, int] | None:
    """Any pair of non-adjacent cycle edges whose exchange shortens the tour."""
    n = len(order)
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            a, b = order[i], order[i + 1]
            c, e = order[j], order[(j + 1) % n]
            if d[a][c] + d[b][e] < d[a][b] + d[c][e]:
                return i, j
    return None


def pheromone_by_scan(tours, lengths, g_best, tau0, i, j) -> float:
    """tau0 plus g/L_k for each tour containing undirected edge {i, j}."""
    tau = tau0
    for order, length in zip(tours, lengths):
        n = len(order)
        edges = {frozenset((order[p], order[(p + 1) % n])) for p in range(n)}
        if frozenset((i, j)) in edges:
            tau += min(1.0, g_best / length)
    return tau


def prob_scaled_uniform_wins(a: Fraction, b: Fraction) -> Fraction:
    """P(a*U1 > b*U2) for independent U1, U2 ~ U(0,1), by exact integration.

    For fixed u1 the inner probability is min(1, a*u1/b); split the outer
    integral at the point t where a*t = b.
    """
    t = min(Fraction(1), b / a)
    linear_part = (a / b) * t * t / 2  # integral of a*u/b over [0, t]
    flat_part = 1 - t  # integral of 1 over [t, 1]
    return linear_part + flat_part


def _ipow(x: float, e: int) -> float:
    result, base = 1.0, x
    while e:
        if e & 1:
            result = result * base
        e >>= 1
        if e:
            base = base * base
    return result


def naive_full_construction(coords, tours, lengths, g_best, tau0, alpha: int, beta: int,
                            start: int, rng: SplitMix64) -> tuple[list[int], int]:
    """Full Independent Roulette build with per-candidate draws, city by city.

    Pheromone is accumulated ant by ant, predecessor then successor, in the
    same order the solver uses, so the scores are bit-identical.
    """
    n = len(coords)
    d = dist_table(coords)
    nbrs = []
    for order in tours:
        pos = {c: p for p, c in enumerate(order)}
        nbrs.append({c: (order[pos[c] - 1], order[(pos[c] + 1) % n]) for c in order})
    ratios = [min(1.0, g_best / L) for L in lengths]
    visited = [False] * n
    visited[start] = True
    order = [start]
    comps = 0
    cur = start
    while len(order) < n:
        best_j, best_s = -1, -1.0
        for j in range(n):
            if visited[j]:
                continue
            tau = tau0
            for nb, r in zip(nbrs, ratios):
                p, s = nb[cur]
                if p == j:
                    tau += r
                if s == j:
                    tau += r
            eta = 1.0 / max(d[cur][j], 1)
            score = _ipow(tau, alpha) * _ipow(eta, beta) * rng.random()
            comps += 1
            if score > best_s:
                best_j, best_s = j, score
        visited[best_j] = True
        order.append(best_j)
        cur = best_j
    return order, comps
