# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled construction and 2-opt kernels.

Mirrors ``_pykernels`` operation for operation; see that module for the
semantics. Construction and 2-opt run without the GIL so that worker
threads execute in parallel.
"""

import time

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt, pow
from libc.string cimport memmove, memset
from libc.stdint cimport uint64_t, int64_t, int32_t

cnp.import_array()

BACKEND = "cython"

LENGTH_SENTINEL = np.iinfo(np.int64).max
cdef int64_t SENTINEL = 0x7FFFFFFFFFFFFFFF

STEP_PARTIAL = 1
STEP_TWO_OPT = 2

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline double next_uniform(uint64_t* state) noexcept nogil:
    cdef uint64_t z
    state[0] += GOLDEN
    z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    z = z ^ (z >> 31)
    return <double>(<int64_t>(z >> 11)) * INV_2_53


cdef inline Py_ssize_t below(double u, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t r = <Py_ssize_t>(u * n)
    if r > n - 1:
        r = n - 1
    return r


cdef inline double ipow(double x, double e, int ie) noexcept nogil:
    cdef double result, base
    if ie < 0:
        return pow(x, e)
    result = 1.0
    base = x
    while ie:
        if ie & 1:
            result = result * base
        ie >>= 1
        if ie:
            base = base * base
    return result


cdef inline int64_t euc2d(const double* xy, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef double dx = xy[2 * j] - xy[2 * i]
    cdef double dy = xy[2 * j + 1] - xy[2 * i + 1]
    return <int64_t>floor(sqrt(dx * dx + dy * dy) + 0.5)


cdef inline int64_t pair_dist(const int32_t* dist, const double* xy, Py_ssize_t n, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    if dist != NULL:
        return dist[i * n + j]
    return euc2d(xy, i, j)


cdef int integral_exponent(double e):
    if e >= 0 and e == floor(e) and e < 1024:
        return <int>e
    return -1


cdef Py_ssize_t two_opt_raw(int32_t* order, Py_ssize_t n, const int32_t* dist, const double* xy,
                            Py_ssize_t window) noexcept nogil:
    cdef Py_ssize_t i, j, jmax, lo, hi, moves = 0
    cdef int32_t a, b, c, d, tmp
    cdef bint improved = True
    cdef int64_t d_ab
    if n < 4:
        return 0
    while improved:
        improved = False
        for i in range(n - 2):
            jmax = n - 1 if window <= 0 else min(n - 1, i + window)
            if i == 0 and jmax > n - 2:
                jmax = n - 2
            a = order[i]
            b = order[i + 1]
            d_ab = pair_dist(dist, xy, n, a, b)
            j = i + 2
            while j <= jmax:
                c = order[j]
                d = order[(j + 1) % n]
                if (pair_dist(dist, xy, n, a, c) + pair_dist(dist, xy, n, b, d)
                        - d_ab - pair_dist(dist, xy, n, c, d)) < 0:
                    lo = i + 1
                    hi = j
                    while lo < hi:
                        tmp = order[lo]
                        order[lo] = order[hi]
                        order[hi] = tmp
                        lo += 1
                        hi -= 1
                    moves += 1
                    improved = True
                    b = order[i + 1]
                    d_ab = pair_dist(dist, xy, n, a, b)
                j += 1
    return moves


def two_opt_inplace(cnp.ndarray order, dist, coords, Py_ssize_t window):
    """First-improvement 2-opt in place on an int32 order array."""
    cdef int32_t[::1] o = order
    cdef const double[:, ::1] xy = np.ascontiguousarray(coords, dtype=np.float64)
    cdef const int32_t[:, ::1] dm
    cdef const int32_t* dptr = NULL
    cdef Py_ssize_t moves
    if dist is not None:
        dm = dist
        dptr = &dm[0, 0]
    with nogil:
        moves = two_opt_raw(&o[0], o.shape[0], dptr, &xy[0, 0], window)
    return moves


cdef int64_t cycle_raw(const int32_t* order, Py_ssize_t n, const int32_t* dist, const double* xy) noexcept nogil:
    cdef int64_t total = 0
    cdef Py_ssize_t i
    for i in range(n - 1):
        total += pair_dist(dist, xy, n, order[i], order[i + 1])
    total += pair_dist(dist, xy, n, order[n - 1], order[0])
    return total


def cycle_length(cnp.ndarray order, dist, coords):
    cdef const int32_t[::1] o = np.ascontiguousarray(order, dtype=np.int32)
    cdef const double[:, ::1] xy = np.ascontiguousarray(coords, dtype=np.float64)
    cdef const int32_t[:, ::1] dm
    cdef const int32_t* dptr = NULL
    if dist is not None:
        dm = dist
        dptr = &dm[0, 0]
    return cycle_raw(&o[0], o.shape[0], dptr, &xy[0, 0])


cdef class Workspace:
    """Per-worker construction scratch bound to an instance and a colony."""

    cdef readonly Py_ssize_t n, m
    cdef readonly double alpha, beta, tau0, tau0pow
    cdef int ialpha, ibeta
    cdef readonly bint partial_mode
    cdef readonly double partial_prob, two_opt_prob
    cdef readonly Py_ssize_t mod_cap, two_opt_window

    cdef const double[:, ::1] coords_v
    cdef const int32_t[:, ::1] dist_v
    cdef const double[:, ::1] etapow_v
    cdef const double[:, ::1] taupow_v
    cdef const int32_t* dist_p
    cdef const double* etapow_p
    cdef const double* taupow_p
    cdef const double* xy

    cdef int32_t[:, ::1] orders
    cdef int64_t[::1] lengths
    cdef int32_t[:, :, :, ::1] nbr
    cdef int32_t[::1] active
    cdef int32_t[:, ::1] pins
    cdef int64_t[::1] gbest

    cdef readonly object tour
    cdef int32_t[::1] tour_v
    cdef int32_t[::1] cand
    cdef unsigned char[::1] visited
    cdef double[::1] tau_row
    cdef double[::1] taupow_row
    cdef int32_t[::1] touched
    cdef double[::1] ratios
    cdef int32_t[::1] snap
    cdef object _keep

    def __init__(self, coords, dist, etapow, alpha, beta, tau0,
                 orders, lengths, nbr, active, pins, gbest,
                 taupow_matrix=None, partial_mode=False, partial_prob=0.0,
                 mod_cap=2, two_opt_prob=0.0, two_opt_window=0):
        self.coords_v = np.ascontiguousarray(coords, dtype=np.float64)
        self.xy = &self.coords_v[0, 0]
        self.n = self.coords_v.shape[0]
        self.dist_p = NULL
        self.etapow_p = NULL
        self.taupow_p = NULL
        if dist is not None:
            self.dist_v = dist
            self.dist_p = &self.dist_v[0, 0]
        if etapow is not None:
            self.etapow_v = etapow
            self.etapow_p = &self.etapow_v[0, 0]
        if taupow_matrix is not None:
            self.taupow_v = taupow_matrix
            self.taupow_p = &self.taupow_v[0, 0]
        self._keep = (coords, dist, etapow, taupow_matrix)
        self.alpha = alpha
        self.beta = beta
        self.ialpha = integral_exponent(alpha)
        self.ibeta = integral_exponent(beta)
        self.tau0 = tau0
        self.tau0pow = ipow(self.tau0, self.alpha, self.ialpha)
        self.orders = orders
        self.lengths = lengths
        self.nbr = nbr
        self.active = active
        self.pins = pins
        self.gbest = gbest
        self.m = self.orders.shape[0]
        self.partial_mode = partial_mode
        self.partial_prob = partial_prob
        self.mod_cap = mod_cap
        self.two_opt_prob = two_opt_prob
        self.two_opt_window = two_opt_window
        self.tour = np.zeros(self.n, dtype=np.int32)
        self.tour_v = self.tour
        self.cand = np.zeros(self.n, dtype=np.int32)
        self.visited = np.zeros(self.n, dtype=np.uint8)
        self.tau_row = np.full(self.n, self.tau0)
        self.taupow_row = np.full(self.n, self.tau0pow)
        self.touched = np.zeros(2 * self.m, dtype=np.int32)
        self.ratios = np.zeros(self.m)
        self.snap = np.zeros(self.m, dtype=np.int32)

    cdef void _pin(self):
        cdef Py_ssize_t k
        cdef int64_t g = self.gbest[0]
        cdef int64_t L
        cdef int32_t b
        cdef double r
        for k in range(self.m):
            L = self.lengths[k]
            if L == SENTINEL:
                self.ratios[k] = 0.0
                continue
            r = <double>g / <double>L
            self.ratios[k] = 1.0 if r > 1.0 else r
            b = self.active[k]
            self.snap[k] = b
            self.pins[k, b] += 1

    cdef void _unpin(self):
        cdef Py_ssize_t k
        for k in range(self.m):
            if self.ratios[k] > 0.0:
                self.pins[k, self.snap[k]] -= 1

    cdef Py_ssize_t _complete(self, Py_ssize_t prefix_len, bint count_forced,
                              uint64_t* state) noexcept nogil:
        cdef Py_ssize_t n = self.n, m = self.m
        cdef int32_t* order = &self.tour_v[0]
        cdef int32_t* cand = &self.cand[0]
        cdef unsigned char* visited = &self.visited[0]
        cdef double* tau_row = &self.tau_row[0]
        cdef double* taupow_row = &self.taupow_row[0]
        cdef int32_t* touched = &self.touched[0]
        cdef double* ratios = &self.ratios[0]
        cdef int32_t* snap = &self.snap[0]
        cdef int32_t* nbr = &self.nbr[0, 0, 0, 0]
        cdef const double* erow
        cdef const double* trow
        cdef Py_ssize_t i, k, r, t, nt, best, pos = prefix_len
        cdef Py_ssize_t comps = 0
        cdef int32_t cur, j, a
        cdef double s, bests, u, tp, ep, d
        cdef double alpha = self.alpha, beta = self.beta, tau0 = self.tau0, tau0pow = self.tau0pow
        cdef uint64_t st, z
        cdef int ialpha = self.ialpha, ibeta = self.ibeta
        cdef bint classic = self.taupow_p != NULL

        memset(visited, 0, n)
        for i in range(prefix_len):
            visited[order[i]] = 1
        r = 0
        for i in range(n):
            if not visited[i]:
                cand[r] = <int32_t>i
                r += 1
        cur = order[prefix_len - 1]

        while r > 0:
            if r == 1 and not count_forced:
                order[pos] = cand[0]
                break
            nt = 0
            if classic:
                trow = self.taupow_p + cur * n
            else:
                trow = taupow_row
                for k in range(m):
                    if ratios[k] > 0.0:
                        t = ((k * 2 + snap[k]) * n + cur) * 2
                        a = nbr[t]
                        tau_row[a] += ratios[k]
                        touched[nt] = a
                        nt += 1
                        a = nbr[t + 1]
                        tau_row[a] += ratios[k]
                        touched[nt] = a
                        nt += 1
                for t in range(nt):
                    a = touched[t]
                    taupow_row[a] = ipow(tau_row[a], alpha, ialpha)
            best = 0
            bests = -1.0
            st = state[0]
            if self.etapow_p != NULL:
                erow = self.etapow_p + cur * n
                for i in range(r):
                    j = cand[i]
                    st = st + GOLDEN
                    z = st
                    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
                    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
                    z = z ^ (z >> 31)
                    u = <double>(<int64_t>(z >> 11)) * INV_2_53
                    s = trow[j] * erow[j] * u
                    if s > bests:
                        bests = s
                        best = i
            else:
                for i in range(r):
                    j = cand[i]
                    d = <double>euc2d(self.xy, cur, j)
                    if d < 1.0:
                        d = 1.0
                    ep = ipow(1.0 / d, beta, ibeta)
                    st = st + GOLDEN
                    z = st
                    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
                    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
                    z = z ^ (z >> 31)
                    u = <double>(<int64_t>(z >> 11)) * INV_2_53
                    s = trow[j] * ep * u
                    if s > bests:
                        bests = s
                        best = i
            state[0] = st
            for t in range(nt):
                a = touched[t]
                tau_row[a] = tau0
                taupow_row[a] = tau0pow
            comps += r
            cur = cand[best]
            order[pos] = cur
            pos += 1
            memmove(&cand[best], &cand[best + 1], (r - best - 1) * sizeof(int32_t))
            r -= 1
        return comps

    def construct_full(self, Py_ssize_t start, uint64_t state):
        """Build a whole tour from city ``start`` into ``self.tour``."""
        cdef Py_ssize_t comps
        self.tour_v[0] = <int32_t>start
        self._pin()
        with nogil:
            comps = self._complete(1, True, &state)
        self._unpin()
        return comps, state

    def construct_partial(self, Py_ssize_t k, Py_ssize_t start_pos, Py_ssize_t n_mod, uint64_t state):
        """Keep n - n_mod cities of ant k's l_best from ``start_pos``; rebuild the rest."""
        cdef Py_ssize_t n = self.n, keep = n - n_mod, i, comps
        for i in range(keep):
            self.tour_v[i] = self.orders[k, (start_pos + i) % n]
        if keep >= n - 1:
            if keep == n - 1:
                self.tour_v[n - 1] = self.orders[k, (start_pos + n - 1) % n]
            return 0, state
        self._pin()
        with nogil:
            comps = self._complete(keep, False, &state)
        self._unpin()
        return comps, state

    def two_opt(self, Py_ssize_t window):
        cdef Py_ssize_t moves
        with nogil:
            moves = two_opt_raw(&self.tour_v[0], self.n, self.dist_p, self.xy, window)
        return moves

    def tour_length(self):
        return cycle_raw(&self.tour_v[0], self.n, self.dist_p, self.xy)

    def publish(self, Py_ssize_t k, int64_t length):
        """Make ``self.tour`` ant k's l_best (double-buffered)."""
        cdef int32_t b = 1 - self.active[k]
        cdef Py_ssize_t i, n = self.n
        cdef int32_t c
        while self.pins[k, b] != 0:
            time.sleep(0)
        for i in range(n):
            c = self.tour_v[i]
            self.orders[k, i] = c
            self.nbr[k, b, c, 0] = self.tour_v[(i + n - 1) % n]
            self.nbr[k, b, c, 1] = self.tour_v[(i + 1) % n]
        self.active[k] = b
        self.lengths[k] = length

    def step(self, Py_ssize_t k, uint64_t state, bint seeding, bint publish=True):
        """Construct, maybe 2-opt, and update l_best for ant k.

        With ``publish=False`` the l_best is left alone and the caller
        installs ``self.tour`` later (synchronous mode).
        Returns (length, comparisons, state, improved, flags).
        """
        cdef Py_ssize_t n = self.n, comps, p, n_mod
        cdef int flags = 0
        cdef bint partial = False
        cdef double u
        cdef int64_t length
        if self.partial_mode and not seeding and self.taupow_p == NULL:
            u = next_uniform(&state)
            partial = u < self.partial_prob
        if partial:
            p = below(next_uniform(&state), n)
            n_mod = 2 + below(next_uniform(&state), self.mod_cap - 1)
            comps, state = self.construct_partial(k, p, n_mod, state)
            flags |= STEP_PARTIAL
        else:
            u = next_uniform(&state)
            comps, state = self.construct_full(below(u, n), state)
        u = next_uniform(&state)
        if u < self.two_opt_prob:
            self.two_opt(self.two_opt_window)
            flags |= STEP_TWO_OPT
        length = cycle_raw(&self.tour_v[0], n, self.dist_p, self.xy)
        improved = length < self.lengths[k]
        if improved and publish:
            self.publish(k, length)
        return length, comps, state, improved, flags
