# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled flip kernel; statement-level mirror of ``_pykernel``."""

import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport sqrt, exp, fabs, pow, isnan, NAN
from libc.stdint cimport int64_t, uint64_t, uint8_t
from numpy.random cimport bitgen_t

cnp.import_array()

PRERUN, PLAIN, METROPOLIS, ANNEAL = 0, 1, 2, 3
LINEAR, GEOMETRIC = 0, 1
BACKEND = "cython"

cdef int C_PRERUN = 0
cdef int C_METROPOLIS = 2
cdef int C_ANNEAL = 3
cdef int C_GEOMETRIC = 1
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline double next_double(bitgen_t *rng) noexcept nogil:
    return <double>(rng.next_uint64(rng.state) >> 11) * INV_2_53


cdef bitgen_t *get_bitgen(object bitgen) except NULL:
    capsule = bitgen.capsule
    return <bitgen_t *>PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline double c_anneal_beta(double beta_start, double beta_end, int shape,
                                 int64_t t, int64_t total) noexcept nogil:
    if total <= 1:
        return beta_end
    cdef double frac = <double>t / <double>(total - 1)
    if shape == C_GEOMETRIC:
        return beta_start * pow(beta_end / beta_start, frac)
    return beta_start + (beta_end - beta_start) * frac


def anneal_beta(double beta_start, double beta_end, int shape, int64_t t, int64_t total):
    return c_anneal_beta(beta_start, beta_end, shape, t, total)


cdef class FlipKernel:
    cdef public int64_t m, k, n_edges, total, n_cut, steps, accepted, stamp
    cdef public double gate_compact, gate_pop
    cdef public bint hole_test, latch_compact, latch_pop
    cdef int64_t[::1] nbr_ptr, nbr, nbr_edge, edge_a, edge_b, pop, outer
    cdef double[::1] nbr_shared, area, perim
    cdef int64_t[::1] assign, d_pop, d_count, d_outer, pair, cut_list, cut_pos
    cdef int64_t[::1] mark, want, stack, dec, qstack
    cdef uint8_t[::1] seen
    cdef double[::1] d_area, d_circ
    cdef object _keep

    def __init__(self, arrays, assignment, k):
        self.m = len(arrays.pop)
        self.k = int(k)
        self._keep = arrays
        self.nbr_ptr = np.ascontiguousarray(arrays.nbr_ptr, dtype=np.int64)
        self.nbr = np.ascontiguousarray(arrays.nbr, dtype=np.int64)
        self.nbr_edge = np.ascontiguousarray(arrays.nbr_edge, dtype=np.int64)
        self.nbr_shared = np.ascontiguousarray(arrays.nbr_shared, dtype=np.float64)
        self.edge_a = np.ascontiguousarray(arrays.edge_a, dtype=np.int64)
        self.edge_b = np.ascontiguousarray(arrays.edge_b, dtype=np.int64)
        self.pop = np.ascontiguousarray(arrays.pop, dtype=np.int64)
        self.area = np.ascontiguousarray(arrays.area, dtype=np.float64)
        self.perim = np.ascontiguousarray(arrays.perim, dtype=np.float64)
        self.outer = np.ascontiguousarray(arrays.outer, dtype=np.int64)
        self.n_edges = len(arrays.edge_a)
        self.assign = np.array(assignment, dtype=np.int64)
        self.total = int(np.asarray(arrays.pop, dtype=np.int64).sum())
        self.steps = 0
        self.accepted = 0
        self.gate_compact = NAN
        self.gate_pop = NAN
        self.hole_test = True
        self.latch_compact = False
        self.latch_pop = False
        self.mark = np.zeros(self.m, dtype=np.int64)
        self.want = np.zeros(self.m, dtype=np.int64)
        self.stack = np.zeros(self.m + 1, dtype=np.int64)
        self.stamp = 0
        self.dec = np.zeros(self.k, dtype=np.int64)
        self.qstack = np.zeros(self.k + 1, dtype=np.int64)
        self.seen = np.zeros(self.k + 1, dtype=np.uint8)
        self._rebuild()

    cdef void _rebuild(self):
        cdef int64_t k = self.k, u, d, e, x, y, i
        self.d_pop = np.zeros(k, dtype=np.int64)
        self.d_area = np.zeros(k, dtype=np.float64)
        self.d_circ = np.zeros(k, dtype=np.float64)
        self.d_count = np.zeros(k, dtype=np.int64)
        self.d_outer = np.zeros(k, dtype=np.int64)
        for u in range(self.m):
            d = self.assign[u]
            self.d_pop[d] += self.pop[u]
            self.d_area[d] += self.area[u]
            self.d_circ[d] += self.perim[u]
            self.d_count[d] += 1
            self.d_outer[d] += self.outer[u]
        self.pair = np.zeros(k * k, dtype=np.int64)
        self.cut_list = np.zeros(max(self.n_edges, 1), dtype=np.int64)
        self.cut_pos = np.full(max(self.n_edges, 1), -1, dtype=np.int64)
        self.n_cut = 0
        for e in range(self.n_edges):
            x = self.assign[self.edge_a[e]]
            y = self.assign[self.edge_b[e]]
            if x != y:
                self.cut_pos[e] = self.n_cut
                self.cut_list[self.n_cut] = e
                self.n_cut += 1
                self.pair[x * k + y] += 1
                self.pair[y * k + x] += 1
        for u in range(self.m):
            for i in range(self.nbr_ptr[u], self.nbr_ptr[u + 1]):
                if self.assign[self.nbr[i]] == self.assign[u]:
                    self.d_circ[self.assign[u]] -= self.nbr_shared[i]

    # ------------------------------------------------------------ state access

    def copy(self):
        cdef FlipKernel new = FlipKernel.__new__(FlipKernel)
        new.m = self.m
        new.k = self.k
        new.n_edges = self.n_edges
        new.total = self.total
        new.n_cut = self.n_cut
        new.steps = self.steps
        new.accepted = self.accepted
        new.stamp = 0
        new.gate_compact = self.gate_compact
        new.gate_pop = self.gate_pop
        new.hole_test = self.hole_test
        new.latch_compact = self.latch_compact
        new.latch_pop = self.latch_pop
        new._keep = self._keep
        new.nbr_ptr = self.nbr_ptr
        new.nbr = self.nbr
        new.nbr_edge = self.nbr_edge
        new.nbr_shared = self.nbr_shared
        new.edge_a = self.edge_a
        new.edge_b = self.edge_b
        new.pop = self.pop
        new.area = self.area
        new.perim = self.perim
        new.outer = self.outer
        new.assign = np.array(self.assign, dtype=np.int64)
        new.d_pop = np.array(self.d_pop, dtype=np.int64)
        new.d_area = np.array(self.d_area, dtype=np.float64)
        new.d_circ = np.array(self.d_circ, dtype=np.float64)
        new.d_count = np.array(self.d_count, dtype=np.int64)
        new.d_outer = np.array(self.d_outer, dtype=np.int64)
        new.pair = np.array(self.pair, dtype=np.int64)
        new.cut_list = np.array(self.cut_list, dtype=np.int64)
        new.cut_pos = np.array(self.cut_pos, dtype=np.int64)
        new.mark = np.zeros(self.m, dtype=np.int64)
        new.want = np.zeros(self.m, dtype=np.int64)
        new.stack = np.zeros(self.m + 1, dtype=np.int64)
        new.dec = np.zeros(self.k, dtype=np.int64)
        new.qstack = np.zeros(self.k + 1, dtype=np.int64)
        new.seen = np.zeros(self.k + 1, dtype=np.uint8)
        return new

    def get_assignment(self):
        return np.array(self.assign, dtype=np.int64)

    def get_district_arrays(self):
        return (
            np.array(self.d_pop, dtype=np.int64),
            np.array(self.d_area, dtype=np.float64),
            np.array(self.d_circ, dtype=np.float64),
            np.array(self.d_count, dtype=np.int64),
            np.array(self.d_outer, dtype=np.int64),
        )

    def get_pair_counts(self):
        return np.array(self.pair, dtype=np.int64).reshape(self.k, self.k)

    def get_cut_edges(self):
        return np.array(self.cut_list[:self.n_cut], dtype=np.int64)

    def get_counters(self):
        return self.steps, self.accepted

    def set_counters(self, steps, accepted):
        self.steps = steps
        self.accepted = accepted

    def set_gates(self, double compact_min, double pop_dev_max, bint hole_test):
        self.gate_compact = compact_min
        self.gate_pop = pop_dev_max
        self.hole_test = hole_test
        self.latch_compact = False
        self.latch_pop = False

    def get_latches(self):
        return bool(self.latch_compact), bool(self.latch_pop)

    # ------------------------------------------------------------ scores

    cdef double _compact(self, int64_t ua, int64_t ub, double area_a, double circ_a,
                         double area_b, double circ_b) noexcept nogil:
        cdef double c = 0.0
        cdef int64_t j
        for j in range(self.k):
            if j == ua:
                c += sqrt(area_a) / circ_a
            elif j == ub:
                c += sqrt(area_b) / circ_b
            else:
                c += sqrt(self.d_area[j]) / self.d_circ[j]
        return c

    cdef double _balanced(self, int64_t ua, int64_t ub, int64_t pop_a, int64_t pop_b) noexcept nogil:
        cdef int64_t k = self.k, j, p
        cdef double mean = <double>self.total / <double>k
        cdef double ss = 0.0, d
        for j in range(k):
            if j == ua:
                p = pop_a
            elif j == ub:
                p = pop_b
            else:
                p = self.d_pop[j]
            d = <double>p - mean
            ss += d * d
        return <double>k * sqrt(ss) / <double>((k - 1) * self.total)

    cdef double _energy_from(self, double bal, double comp, double wb, double wc) noexcept nogil:
        cdef double e = 0.0
        if wb != 0.0:
            e += wb * bal
        if wc != 0.0:
            e += wc * (<double>self.k / 4.0 - comp)
        return e

    cdef void _scores(self, double wb, double wc, double *bal, double *comp, double *energy) noexcept nogil:
        comp[0] = self._compact(-1, -1, 0.0, 1.0, 0.0, 1.0)
        if self.k >= 2:
            bal[0] = self._balanced(-1, -1, 0, 0)
        else:
            bal[0] = NAN
        energy[0] = self._energy_from(bal[0], comp[0], wb, wc)

    def scores(self, double wb, double wc):
        cdef double b, c, e
        if self.k < 2 and wb != 0.0:
            raise ValueError("balanced score needs K >= 2")
        self._scores(wb, wc, &b, &c, &e)
        return b, c, e

    def max_deviation(self):
        return self._max_dev()

    cdef double _max_dev(self) noexcept nogil:
        cdef double mean = <double>self.total / <double>self.k
        cdef double worst = 0.0, dev
        cdef int64_t j
        for j in range(self.k):
            dev = fabs(<double>self.d_pop[j] - mean) / mean
            if dev > worst:
                worst = dev
        return worst

    # ------------------------------------------------------------ moves

    cdef int64_t _propose(self, bitgen_t *rng, int64_t *u, int64_t *v) noexcept nogil:
        cdef int64_t n = self.n_cut, idx, e
        if n == 0:
            return -1
        idx = <int64_t>(next_double(rng) * (2.0 * <double>n))
        e = self.cut_list[idx >> 1]
        if idx & 1:
            u[0] = self.edge_b[e]
            v[0] = self.edge_a[e]
        else:
            u[0] = self.edge_a[e]
            v[0] = self.edge_b[e]
        return e

    def propose(self, bitgen):
        cdef bitgen_t *rng = get_bitgen(bitgen)
        cdef int64_t u = 0, v = 0, e
        with bitgen.lock:
            e = self._propose(rng, &u, &v)
        if e < 0:
            return None
        return u, v, e

    cdef bint _source_connected(self, int64_t u, int64_t src) noexcept nogil:
        cdef int64_t targets = 0, first = -1, i, x, y, found, top, stamp
        for i in range(self.nbr_ptr[u], self.nbr_ptr[u + 1]):
            if self.assign[self.nbr[i]] == src:
                targets += 1
                if first < 0:
                    first = self.nbr[i]
        if targets == 0:
            return False
        if targets == 1:
            return True
        self.stamp += 1
        stamp = self.stamp
        for i in range(self.nbr_ptr[u], self.nbr_ptr[u + 1]):
            if self.assign[self.nbr[i]] == src:
                self.want[self.nbr[i]] = stamp
        self.mark[u] = stamp
        self.mark[first] = stamp
        found = 1
        top = 0
        self.stack[top] = first
        top += 1
        while top > 0:
            top -= 1
            x = self.stack[top]
            for i in range(self.nbr_ptr[x], self.nbr_ptr[x + 1]):
                y = self.nbr[i]
                if self.mark[y] != stamp and self.assign[y] == src:
                    self.mark[y] = stamp
                    if self.want[y] == stamp:
                        found += 1
                        if found == targets:
                            return True
                    self.stack[top] = y
                    top += 1
        return False

    cdef int64_t _components(self, int64_t skip, int64_t ua, bint use_dec, int64_t outer_a) noexcept nogil:
        cdef int64_t k = self.k, comps = 0, start, x, j, top, cnt, ocnt, row
        for j in range(k + 1):
            self.seen[j] = 0
        self.seen[skip] = 1
        for start in range(k + 1):
            if self.seen[start]:
                continue
            comps += 1
            self.seen[start] = 1
            top = 0
            self.qstack[top] = start
            top += 1
            while top > 0:
                top -= 1
                x = self.qstack[top]
                if x == k:
                    for j in range(k):
                        if not self.seen[j]:
                            cnt = outer_a if j == ua else self.d_outer[j]
                            if cnt > 0:
                                self.seen[j] = 1
                                self.qstack[top] = j
                                top += 1
                    continue
                ocnt = outer_a if x == ua else self.d_outer[x]
                if not self.seen[k] and ocnt > 0:
                    self.seen[k] = 1
                    self.qstack[top] = k
                    top += 1
                row = x * k
                for j in range(k):
                    if self.seen[j]:
                        continue
                    cnt = self.pair[row + j]
                    if use_dec:
                        if x == ua:
                            cnt -= self.dec[j]
                        elif j == ua:
                            cnt -= self.dec[x]
                    if cnt > 0:
                        self.seen[j] = 1
                        self.qstack[top] = j
                        top += 1
        return comps

    cdef bint _check(self, int64_t u, int64_t dst, bint use_compact, bint use_pop) noexcept nogil:
        cdef int64_t src = self.assign[u], k = self.k
        cdef int64_t n_dst = 0, i, c, outer_a, before, after
        cdef bint vanish, ok
        cdef double s_src, s_dst, mean, thr, comp
        if src == dst or dst < 0 or dst >= k:
            return False
        if self.d_count[src] < 2:
            return False
        for i in range(self.nbr_ptr[u], self.nbr_ptr[u + 1]):
            c = self.assign[self.nbr[i]]
            if c == dst:
                n_dst += 1
            elif c != src:
                self.dec[c] += 1
        ok = True
        if n_dst == 0:
            ok = False
        elif not self._source_connected(u, src):
            ok = False
        elif self.hole_test:
            outer_a = self.d_outer[src] - self.outer[u]
            vanish = self.outer[u] != 0 and outer_a == 0
            if not vanish:
                for i in range(self.nbr_ptr[u], self.nbr_ptr[u + 1]):
                    c = self.assign[self.nbr[i]]
                    if c != dst and c != src and self.pair[src * k + c] == self.dec[c]:
                        vanish = True
                        break
            if vanish:
                before = self._components(dst, src, False, self.d_outer[src])
                after = self._components(dst, src, True, outer_a)
                if after > before:
                    ok = False
        for i in range(self.nbr_ptr[u], self.nbr_ptr[u + 1]):
            self.dec[self.assign[self.nbr[i]]] = 0
        if not ok:
            return False
        if use_compact or use_pop:
            s_src = 0.0
            s_dst = 0.0
            for i in range(self.nbr_ptr[u], self.nbr_ptr[u + 1]):
                c = self.assign[self.nbr[i]]
                if c == src:
                    s_src += self.nbr_shared[i]
                elif c == dst:
                    s_dst += self.nbr_shared[i]
            if use_pop:
                mean = <double>self.total / <double>k
                thr = self.gate_pop
                if fabs(<double>(self.d_pop[src] - self.pop[u]) - mean) / mean > thr:
                    return False
                if fabs(<double>(self.d_pop[dst] + self.pop[u]) - mean) / mean > thr:
                    return False
            if use_compact:
                comp = self._compact(
                    src, dst,
                    self.d_area[src] - self.area[u],
                    self.d_circ[src] - self.perim[u] + 2.0 * s_src,
                    self.d_area[dst] + self.area[u],
                    self.d_circ[dst] + self.perim[u] - 2.0 * s_dst,
                )
                if comp < self.gate_compact:
                    return False
        return True

    def check(self, int64_t u, int64_t dst, bint use_compact, bint use_pop):
        return bool(self._check(u, dst, use_compact, use_pop))

    cdef void _apply(self, int64_t u, int64_t dst) noexcept nogil:
        cdef int64_t src = self.assign[u], k = self.k, i, w, e, c, pos, last, p
        cdef double s_src = 0.0, s_dst = 0.0
        for i in range(self.nbr_ptr[u], self.nbr_ptr[u + 1]):
            w = self.nbr[i]
            e = self.nbr_edge[i]
            c = self.assign[w]
            if c == src:
                s_src += self.nbr_shared[i]
                self.cut_pos[e] = self.n_cut
                self.cut_list[self.n_cut] = e
                self.n_cut += 1
            elif c == dst:
                s_dst += self.nbr_shared[i]
                pos = self.cut_pos[e]
                self.n_cut -= 1
                last = self.cut_list[self.n_cut]
                if last != e:
                    self.cut_list[pos] = last
                    self.cut_pos[last] = pos
                self.cut_pos[e] = -1
            if c != src:
                self.pair[src * k + c] -= 1
                self.pair[c * k + src] -= 1
            if c != dst:
                self.pair[dst * k + c] += 1
                self.pair[c * k + dst] += 1
        self.assign[u] = dst
        p = self.pop[u]
        self.d_pop[src] -= p
        self.d_pop[dst] += p
        self.d_area[src] -= self.area[u]
        self.d_area[dst] += self.area[u]
        self.d_circ[src] = self.d_circ[src] - self.perim[u] + 2.0 * s_src
        self.d_circ[dst] = self.d_circ[dst] + self.perim[u] - 2.0 * s_dst
        self.d_count[src] -= 1
        self.d_count[dst] += 1
        self.d_outer[src] -= self.outer[u]
        self.d_outer[dst] += self.outer[u]

    def apply(self, int64_t u, int64_t dst):
        self._apply(u, dst)

    cdef double _mh_ratio(self, int64_t u, int64_t dst, double beta, double wb, double wc) noexcept nogil:
        cdef int64_t src = self.assign[u], n_src = 0, n_dst = 0, i, c, x_cut, y_cut, p
        cdef double s_src = 0.0, s_dst = 0.0, w = 1.0, bal_x, comp_x, bal_y, comp_y, ex, ey, arg, ratio
        for i in range(self.nbr_ptr[u], self.nbr_ptr[u + 1]):
            c = self.assign[self.nbr[i]]
            if c == src:
                n_src += 1
                s_src += self.nbr_shared[i]
            elif c == dst:
                n_dst += 1
                s_dst += self.nbr_shared[i]
        x_cut = self.n_cut
        y_cut = x_cut - n_dst + n_src
        if beta != 0.0:
            bal_x = self._balanced(-1, -1, 0, 0) if wb != 0.0 else 0.0
            comp_x = self._compact(-1, -1, 0.0, 1.0, 0.0, 1.0) if wc != 0.0 else 0.0
            p = self.pop[u]
            bal_y = self._balanced(src, dst, self.d_pop[src] - p, self.d_pop[dst] + p) if wb != 0.0 else 0.0
            if wc != 0.0:
                comp_y = self._compact(
                    src, dst,
                    self.d_area[src] - self.area[u],
                    self.d_circ[src] - self.perim[u] + 2.0 * s_src,
                    self.d_area[dst] + self.area[u],
                    self.d_circ[dst] + self.perim[u] - 2.0 * s_dst,
                )
            else:
                comp_y = 0.0
            ex = self._energy_from(bal_x, comp_x, wb, wc)
            ey = self._energy_from(bal_y, comp_y, wb, wc)
            arg = -beta * (ey - ex)
            if arg > 700.0:
                return 1.0
            w = exp(arg)
        ratio = w * <double>(n_src * x_cut) / <double>(n_dst * y_cut)
        return 1.0 if ratio >= 1.0 else ratio

    def mh_ratio(self, int64_t u, int64_t dst, double beta, double wb, double wc):
        return self._mh_ratio(u, dst, beta, wb, wc)

    # ------------------------------------------------------------ chain steps

    cdef void _update_latches(self) noexcept nogil:
        if not self.latch_compact and not isnan(self.gate_compact):
            if self._compact(-1, -1, 0.0, 1.0, 0.0, 1.0) >= self.gate_compact:
                self.latch_compact = True
        if not self.latch_pop and not isnan(self.gate_pop):
            if self._max_dev() <= self.gate_pop:
                self.latch_pop = True

    cdef bint _step(self, bitgen_t *rng, int mode, double beta, double wb, double wc) noexcept nogil:
        cdef int64_t u = 0, v = 0, e, dst
        cdef double acc, r
        self.steps += 1
        self._update_latches()
        e = self._propose(rng, &u, &v)
        if e < 0:
            return False
        dst = self.assign[v]
        if mode == C_PRERUN and self.d_count[self.assign[u]] <= self.d_count[dst]:
            return False
        if not self._check(u, dst, self.latch_compact, self.latch_pop):
            return False
        if mode == C_METROPOLIS or mode == C_ANNEAL:
            acc = self._mh_ratio(u, dst, beta, wb, wc)
            if acc < 1.0:
                r = next_double(rng)
                if not r < acc:
                    return False
        self._apply(u, dst)
        self.accepted += 1
        return True

    def step(self, bitgen, int mode, double beta, double wb, double wc):
        cdef bitgen_t *rng = get_bitgen(bitgen)
        cdef bint ok
        with bitgen.lock:
            ok = self._step(rng, mode, beta, wb, wc)
        return bool(ok)

    def advance(self, bitgen, int mode, int64_t n, double beta_start, double beta_end,
                int shape, int64_t t0, int64_t t_total, double wb, double wc,
                int64_t trace_every, int64_t final_step, int64_t n_rows):
        cdef bitgen_t *rng = get_bitgen(bitgen)
        steps_a = np.zeros(n_rows, dtype=np.int64)
        acc_a = np.zeros(n_rows, dtype=np.uint8)
        bal_a = np.zeros(n_rows, dtype=np.float64)
        comp_a = np.zeros(n_rows, dtype=np.float64)
        energy_a = np.zeros(n_rows, dtype=np.float64)
        cut_a = np.zeros(n_rows, dtype=np.int64)
        dev_a = np.zeros(n_rows, dtype=np.float64)
        cdef int64_t[::1] steps_v = steps_a
        cdef uint8_t[::1] acc_v = acc_a
        cdef double[::1] bal_v = bal_a
        cdef double[::1] comp_v = comp_a
        cdef double[::1] energy_v = energy_a
        cdef int64_t[::1] cut_v = cut_a
        cdef double[::1] dev_v = dev_a
        cdef int64_t i, s, row = 0
        cdef double beta, b, c, en
        cdef bint ok
        if self.k < 2 and wb != 0.0 and n_rows > 0:
            raise ValueError("balanced score needs K >= 2")
        with bitgen.lock, nogil:
            for i in range(n):
                if mode == C_ANNEAL:
                    beta = c_anneal_beta(beta_start, beta_end, shape, t0 + i, t_total)
                else:
                    beta = beta_start
                ok = self._step(rng, mode, beta, wb, wc)
                s = self.steps
                if row < n_rows and (s % trace_every == 0 or s == final_step):
                    self._scores(wb, wc, &b, &c, &en)
                    steps_v[row] = s
                    acc_v[row] = ok
                    bal_v[row] = b
                    comp_v[row] = c
                    energy_v[row] = en
                    cut_v[row] = self.n_cut
                    dev_v[row] = self._max_dev()
                    row += 1
        return (steps_a[:row], acc_a[:row], bal_a[:row], comp_a[:row], energy_a[:row], cut_a[:row],
                dev_a[:row])

    def sample(self, bitgen, int mode, double beta, double wb, double wc, int64_t n, int64_t thin):
        cdef bitgen_t *rng = get_bitgen(bitgen)
        out_a = np.zeros((n, self.m), dtype=np.int64)
        cdef int64_t[:, ::1] out = out_a
        cdef int64_t i, t, j
        with bitgen.lock, nogil:
            for i in range(n):
                for t in range(thin):
                    self._step(rng, mode, beta, wb, wc)
                for j in range(self.m):
                    out[i, j] = self.assign[j]
        return out_a
