"""Pure-Python flip kernel.

Reference implementation of the chain's hot loop. The compiled kernel in
``_ckernel.pyx`` mirrors this file statement for statement; both consume the
same uint64 stream from a numpy BitGenerator and must produce identical
trajectories.

Hole test. Every district is kept connected, so the complement of district
D (plus the OUTSIDE node) is connected iff the quotient graph on the other
districts plus OUTSIDE is connected. Flipping u from A to B only adds
quotient edges around B in A's complement graph, so A never gains a hole;
only B's complement graph can lose edges (A-C contacts or A's contact with
OUTSIDE running through u). The test rejects a flip iff B's hole count
increases, and runs the quotient BFS only when one of those contacts would
actually vanish.
"""

from __future__ import annotations

import math

import numpy as np

PRERUN, PLAIN, METROPOLIS, ANNEAL = 0, 1, 2, 3
LINEAR, GEOMETRIC = 0, 1

_INV_2_53 = 1.0 / 9007199254740992.0

BACKEND = "python"


def anneal_beta(beta_start, beta_end, shape, t, total):
    if total <= 1:
        return beta_end
    frac = t / (total - 1)
    if shape == GEOMETRIC:
        return beta_start * (beta_end / beta_start) ** frac
    return beta_start + (beta_end - beta_start) * frac


class FlipKernel:
    def __init__(self, arrays, assignment, k):
        self.m = len(arrays.pop)
        self.k = int(k)
        self.nbr_ptr = arrays.nbr_ptr.tolist()
        self.nbr = arrays.nbr.tolist()
        self.nbr_edge = arrays.nbr_edge.tolist()
        self.nbr_shared = arrays.nbr_shared.tolist()
        self.edge_a = arrays.edge_a.tolist()
        self.edge_b = arrays.edge_b.tolist()
        self.pop = arrays.pop.tolist()
        self.area = arrays.area.tolist()
        self.perim = arrays.perim.tolist()
        self.outer = arrays.outer.tolist()
        self.n_edges = len(self.edge_a)
        self.assign = [int(x) for x in assignment]
        self.total = sum(self.pop)
        self.steps = 0
        self.accepted = 0
        self.gate_compact = math.nan
        self.gate_pop = math.nan
        self.hole_test = True
        self.latch_compact = False
        self.latch_pop = False
        self.mark = [0] * self.m
        self.want = [0] * self.m
        self.stamp = 0
        self._rebuild()

    def _rebuild(self):
        k, a = self.k, self.assign
        self.d_pop = [0] * k
        self.d_area = [0.0] * k
        self.d_circ = [0.0] * k
        self.d_count = [0] * k
        self.d_outer = [0] * k
        for u in range(self.m):
            d = a[u]
            self.d_pop[d] += self.pop[u]
            self.d_area[d] += self.area[u]
            self.d_circ[d] += self.perim[u]
            self.d_count[d] += 1
            self.d_outer[d] += self.outer[u]
        self.pair = [0] * (k * k)
        self.cut_list = []
        self.cut_pos = [-1] * self.n_edges
        for e in range(self.n_edges):
            x, y = a[self.edge_a[e]], a[self.edge_b[e]]
            if x != y:
                self.cut_pos[e] = len(self.cut_list)
                self.cut_list.append(e)
                self.pair[x * k + y] += 1
                self.pair[y * k + x] += 1
        for u in range(self.m):
            for i in range(self.nbr_ptr[u], self.nbr_ptr[u + 1]):
                if a[self.nbr[i]] == a[u]:
                    # each internal edge is seen from both ends
                    self.d_circ[a[u]] -= self.nbr_shared[i]
        self.n_cut = len(self.cut_list)

    # ------------------------------------------------------------ state access

    def copy(self):
        new = object.__new__(FlipKernel)
        new.__dict__.update(self.__dict__)
        for name in ("assign", "d_pop", "d_area", "d_circ", "d_count", "d_outer",
                     "pair", "cut_list", "cut_pos", "mark", "want"):
            setattr(new, name, list(getattr(self, name)))
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
        return np.array(self.cut_list, dtype=np.int64)

    def get_counters(self):
        return self.steps, self.accepted

    def set_counters(self, steps, accepted):
        self.steps, self.accepted = int(steps), int(accepted)

    def set_gates(self, compact_min, pop_dev_max, hole_test):
        """Configure gates (NaN disables) and reset their latches."""
        self.gate_compact = float(compact_min)
        self.gate_pop = float(pop_dev_max)
        self.hole_test = bool(hole_test)
        self.latch_compact = False
        self.latch_pop = False

    def get_latches(self):
        return self.latch_compact, self.latch_pop

    # ------------------------------------------------------------ scores

    def _compact(self, ua, ub, area_a, circ_a, area_b, circ_b):
        c = 0.0
        for j in range(self.k):
            if j == ua:
                c += math.sqrt(area_a) / circ_a
            elif j == ub:
                c += math.sqrt(area_b) / circ_b
            else:
                c += math.sqrt(self.d_area[j]) / self.d_circ[j]
        return c

    def _balanced(self, ua, ub, pop_a, pop_b):
        k = self.k
        mean = self.total / k
        ss = 0.0
        for j in range(k):
            if j == ua:
                p = pop_a
            elif j == ub:
                p = pop_b
            else:
                p = self.d_pop[j]
            d = p - mean
            ss += d * d
        return k * math.sqrt(ss) / ((k - 1) * self.total)

    def _energy_from(self, bal, comp, wb, wc):
        e = 0.0
        if wb != 0.0:
            e += wb * bal
        if wc != 0.0:
            e += wc * (self.k / 4.0 - comp)
        return e

    def scores(self, wb, wc):
        """Return (balanced, compact, energy) for the current state.

        The balanced score is only evaluated when K >= 2 and reported as NaN
        otherwise.
        """
        comp = self._compact(-1, -1, 0.0, 1.0, 0.0, 1.0)
        bal = self._balanced(-1, -1, 0, 0) if self.k >= 2 else math.nan
        if self.k < 2 and wb != 0.0:
            raise ValueError("balanced score needs K >= 2")
        return bal, comp, self._energy_from(bal, comp, wb, wc)

    def max_deviation(self):
        return self._max_dev()

    def _max_dev(self):
        mean = self.total / self.k
        worst = 0.0
        for j in range(self.k):
            dev = abs(self.d_pop[j] - mean) / mean
            if dev > worst:
                worst = dev
        return worst

    # ------------------------------------------------------------ moves

    def propose(self, bitgen):
        """Uniform cut edge, then a fair coin for the endpoint.

        Returns ``(unit, other_endpoint, edge_id)`` or ``None`` without
        consuming randomness when there is no cut edge.
        """
        n = self.n_cut
        if n == 0:
            return None
        r = (bitgen.random_raw() >> 11) * _INV_2_53
        idx = int(r * (2.0 * n))
        e = self.cut_list[idx >> 1]
        if idx & 1:
            return self.edge_b[e], self.edge_a[e], e
        return self.edge_a[e], self.edge_b[e], e

    def _source_connected(self, u, src):
        """True iff district ``src`` minus ``u`` stays connected."""
        nbr, ptr, a = self.nbr, self.nbr_ptr, self.assign
        targets = 0
        first = -1
        for i in range(ptr[u], ptr[u + 1]):
            if a[nbr[i]] == src:
                targets += 1
                if first < 0:
                    first = nbr[i]
        if targets == 0:
            return False
        if targets == 1:
            return True
        self.stamp += 1
        stamp, mark, want = self.stamp, self.mark, self.want
        for i in range(ptr[u], ptr[u + 1]):
            if a[nbr[i]] == src:
                want[nbr[i]] = stamp
        mark[u] = stamp
        mark[first] = stamp
        found = 1
        stack = [first]
        while stack:
            x = stack.pop()
            for i in range(ptr[x], ptr[x + 1]):
                y = nbr[i]
                if mark[y] != stamp and a[y] == src:
                    mark[y] = stamp
                    if want[y] == stamp:
                        found += 1
                        if found == targets:
                            return True
                    stack.append(y)
        return False

    def _components(self, skip, ua, dec, outer_a):
        """Components of the district quotient graph without ``skip``.

        Node ``k`` is OUTSIDE. ``dec[c]`` is subtracted from the A-c contact
        count and ``outer_a`` replaces A's outer-unit count, where A = ``ua``.
        """
        k = self.k
        pair = self.pair
        seen = [False] * (k + 1)
        seen[skip] = True
        comps = 0
        for start in range(k + 1):
            if seen[start]:
                continue
            comps += 1
            seen[start] = True
            stack = [start]
            while stack:
                x = stack.pop()
                if x == k:
                    for j in range(k):
                        if not seen[j]:
                            cnt = outer_a if j == ua else self.d_outer[j]
                            if cnt > 0:
                                seen[j] = True
                                stack.append(j)
                    continue
                ocnt = outer_a if x == ua else self.d_outer[x]
                if not seen[k] and ocnt > 0:
                    seen[k] = True
                    stack.append(k)
                row = x * k
                for j in range(k):
                    if seen[j]:
                        continue
                    cnt = pair[row + j]
                    if x == ua:
                        cnt -= dec.get(j, 0)
                    elif j == ua:
                        cnt -= dec.get(x, 0)
                    if cnt > 0:
                        seen[j] = True
                        stack.append(j)
        return comps

    def check(self, u, dst, use_compact, use_pop):
        """Validity of flipping ``u`` into ``dst`` under the active gates."""
        a = self.assign
        src = a[u]
        if src == dst or not 0 <= dst < self.k:
            return False
        if self.d_count[src] < 2:
            return False
        nbr, ptr = self.nbr, self.nbr_ptr
        n_dst = 0
        dec = {}
        for i in range(ptr[u], ptr[u + 1]):
            c = a[nbr[i]]
            if c == dst:
                n_dst += 1
            elif c != src:
                dec[c] = dec.get(c, 0) + 1
        if n_dst == 0:
            return False
        if not self._source_connected(u, src):
            return False
        if self.hole_test:
            k = self.k
            outer_a = self.d_outer[src] - self.outer[u]
            vanish = self.outer[u] and outer_a == 0
            if not vanish:
                for c, cnt in dec.items():
                    if self.pair[src * k + c] == cnt:
                        vanish = True
                        break
            if vanish:
                before = self._components(dst, src, {}, self.d_outer[src])
                after = self._components(dst, src, dec, outer_a)
                if after > before:
                    return False
        if use_compact or use_pop:
            s_src = 0.0
            s_dst = 0.0
            for i in range(ptr[u], ptr[u + 1]):
                c = a[nbr[i]]
                if c == src:
                    s_src += self.nbr_shared[i]
                elif c == dst:
                    s_dst += self.nbr_shared[i]
            if use_pop:
                mean = self.total / self.k
                thr = self.gate_pop
                if abs(self.d_pop[src] - self.pop[u] - mean) / mean > thr:
                    return False
                if abs(self.d_pop[dst] + self.pop[u] - mean) / mean > thr:
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

    def apply(self, u, dst):
        a = self.assign
        src = a[u]
        k = self.k
        pair = self.pair
        s_src = 0.0
        s_dst = 0.0
        for i in range(self.nbr_ptr[u], self.nbr_ptr[u + 1]):
            w = self.nbr[i]
            e = self.nbr_edge[i]
            c = a[w]
            if c == src:
                s_src += self.nbr_shared[i]
                self.cut_pos[e] = self.n_cut
                self.cut_list.append(e)
                self.n_cut += 1
            elif c == dst:
                s_dst += self.nbr_shared[i]
                pos = self.cut_pos[e]
                last = self.cut_list.pop()
                self.n_cut -= 1
                if last != e:
                    self.cut_list[pos] = last
                    self.cut_pos[last] = pos
                self.cut_pos[e] = -1
            if c != src:
                pair[src * k + c] -= 1
                pair[c * k + src] -= 1
            if c != dst:
                pair[dst * k + c] += 1
                pair[c * k + dst] += 1
        a[u] = dst
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

    def mh_ratio(self, u, dst, beta, wb, wc):
        """Metropolis-Hastings acceptance for a valid flip of ``u`` into ``dst``."""
        a = self.assign
        src = a[u]
        n_src = 0
        n_dst = 0
        s_src = 0.0
        s_dst = 0.0
        for i in range(self.nbr_ptr[u], self.nbr_ptr[u + 1]):
            c = a[self.nbr[i]]
            if c == src:
                n_src += 1
                s_src += self.nbr_shared[i]
            elif c == dst:
                n_dst += 1
                s_dst += self.nbr_shared[i]
        x_cut = self.n_cut
        y_cut = x_cut - n_dst + n_src
        w = 1.0
        if beta != 0.0:
            bal_x = self._balanced(-1, -1, 0, 0) if wb != 0.0 else 0.0
            comp_x = self._compact(-1, -1, 0.0, 1.0, 0.0, 1.0) if wc != 0.0 else 0.0
            p = self.pop[u]
            bal_y = self._balanced(src, dst, self.d_pop[src] - p, self.d_pop[dst] + p) if wb != 0.0 else 0.0
            comp_y = self._compact(
                src, dst,
                self.d_area[src] - self.area[u],
                self.d_circ[src] - self.perim[u] + 2.0 * s_src,
                self.d_area[dst] + self.area[u],
                self.d_circ[dst] + self.perim[u] - 2.0 * s_dst,
            ) if wc != 0.0 else 0.0
            ex = self._energy_from(bal_x, comp_x, wb, wc)
            ey = self._energy_from(bal_y, comp_y, wb, wc)
            arg = -beta * (ey - ex)
            if arg > 700.0:
                return 1.0
            w = math.exp(arg)
        ratio = w * float(n_src * x_cut) / float(n_dst * y_cut)
        return 1.0 if ratio >= 1.0 else ratio

    # ------------------------------------------------------------ chain steps

    def _update_latches(self):
        if not self.latch_compact and self.gate_compact == self.gate_compact:
            if self._compact(-1, -1, 0.0, 1.0, 0.0, 1.0) >= self.gate_compact:
                self.latch_compact = True
        if not self.latch_pop and self.gate_pop == self.gate_pop:
            if self._max_dev() <= self.gate_pop:
                self.latch_pop = True

    def step(self, bitgen, mode, beta, wb, wc):
        """One chain step; returns True iff the proposal was applied."""
        self.steps += 1
        self._update_latches()
        prop = self.propose(bitgen)
        if prop is None:
            return False
        u, v, _ = prop
        dst = self.assign[v]
        if mode == PRERUN and self.d_count[self.assign[u]] <= self.d_count[dst]:
            return False
        if not self.check(u, dst, self.latch_compact, self.latch_pop):
            return False
        if mode == METROPOLIS or mode == ANNEAL:
            acc = self.mh_ratio(u, dst, beta, wb, wc)
            if acc < 1.0:
                r = (bitgen.random_raw() >> 11) * _INV_2_53
                if not r < acc:
                    return False
        self.apply(u, dst)
        self.accepted += 1
        return True

    def advance(self, bitgen, mode, n, beta_start, beta_end, shape, t0, t_total,
                wb, wc, trace_every, final_step, n_rows):
        """Run ``n`` steps, tracing global steps divisible by ``trace_every``
        and ``final_step``. Returns the six trace columns plus max deviation."""
        steps = np.zeros(n_rows, dtype=np.int64)
        acc = np.zeros(n_rows, dtype=np.uint8)
        bal = np.zeros(n_rows, dtype=np.float64)
        comp = np.zeros(n_rows, dtype=np.float64)
        energy = np.zeros(n_rows, dtype=np.float64)
        cut = np.zeros(n_rows, dtype=np.int64)
        dev = np.zeros(n_rows, dtype=np.float64)
        row = 0
        for i in range(n):
            if mode == ANNEAL:
                beta = anneal_beta(beta_start, beta_end, shape, t0 + i, t_total)
            else:
                beta = beta_start
            ok = self.step(bitgen, mode, beta, wb, wc)
            s = self.steps
            if row < n_rows and (s % trace_every == 0 or s == final_step):
                b, c, e = self.scores(wb, wc)
                steps[row] = s
                acc[row] = ok
                bal[row] = b
                comp[row] = c
                energy[row] = e
                cut[row] = self.n_cut
                dev[row] = self._max_dev()
                row += 1
        return steps[:row], acc[:row], bal[:row], comp[:row], energy[:row], cut[:row], dev[:row]

    def sample(self, bitgen, mode, beta, wb, wc, n, thin):
        out = np.zeros((n, self.m), dtype=np.int64)
        for i in range(n):
            for _ in range(thin):
                self.step(bitgen, mode, beta, wb, wc)
            out[i] = self.assign
        return out
