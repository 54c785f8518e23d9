"""Independent reference checks used by the test suite.

Nothing here calls the zone algebra being tested except to read matrix
entries; membership, closure and sampling are re-derived from scratch.
"""
from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

HALF = Fraction(1, 2)


def decode(b: int):
    """Raw bound -> (value, strict) or None for infinity."""
    if b >= (1 << 62):
        return None
    return b >> 1, not (b & 1)


def sat(d, bound) -> bool:
    if bound is None:
        return True
    m, strict = bound
    return d < m if strict else d <= m


def in_zone(z, v) -> bool:
    """Direct evaluation of every matrix entry at valuation ``v``."""
    full = (0, *v)
    rows = z.rows()
    n = len(rows)
    return all(sat(full[i] - full[j], decode(rows[i][j])) for i in range(n) for j in range(n) if i != j)


def grid(nclocks: int, top: int, step: Fraction = HALF):
    ticks = [step * k for k in range(int(top / step) + 1)]
    return itertools.product(ticks, repeat=nclocks)


def grid_set(z, nclocks: int, top: int, step: Fraction = HALF) -> frozenset:
    if z is None:
        return frozenset()
    return frozenset(p for p in grid(nclocks, top, step) if in_zone(z, p))


def bounded_pair(rng: random.Random, nclocks: int, top: int):
    """Two random zones clipped to ``[0, top]`` per clock.

    Clipping keeps every point of both zones and of their envelope inside a
    grid window of side ``top + 1``, so the grid decides convexity questions.
    """
    from tamin import dbm
    from tamin.generate import random_dbm

    box = dbm.from_constraints(nclocks, [(i, 0, dbm.raw(top)) for i in range(1, nclocks + 1)])
    out = []
    while len(out) < 2:
        z = dbm.intersect(random_dbm(rng, nclocks, top), box)
        if z is not None:
            out.append(z)
    return out


def region_step(nclocks: int) -> Fraction:
    """Grid step that meets every region: multiples of ``1/(n+1)`` do, and
    the step also keeps the half-integer points."""
    return Fraction(1, math.lcm(2, nclocks + 1))


def scaled_points(z, nclocks: int, top: int, den: int):
    """Points of ``z`` on the grid of step ``1/den`` in ``[0, top]^n``, as integer tuples.

    Each clock ranges over its own interval bounds first; every matrix entry
    is checked at the leaves.
    """
    if z is None:
        return set()
    rows = z.rows()
    n = nclocks
    cons = []
    for i in range(n + 1):
        for j in range(n + 1):
            b = decode(rows[i][j]) if i != j else None
            if b is not None:
                cons.append((i, j, b[0] * den, b[1]))
    lo = [0] * (n + 1)
    hi = [top * den] * (n + 1)
    for i in range(1, n + 1):
        up, down = decode(rows[i][0]), decode(rows[0][i])
        if up is not None:
            hi[i] = min(hi[i], up[0] * den)
        if down is not None:
            lo[i] = max(lo[i], -down[0] * den)
    out = set()
    for p in itertools.product(*(range(lo[i], hi[i] + 1) for i in range(1, n + 1))):
        v = (0, *p)
        if all(v[i] - v[j] < m if strict else v[i] - v[j] <= m for i, j, m, strict in cons):
            out.add(p)
    return out


def shortest_paths(matrix):
    """Floyd-Warshall over (value, strict) pairs; ``None`` when a negative cycle exists."""
    n = len(matrix)
    d = [[decode(b) for b in row] for row in matrix]

    def plus(a, b):
        if a is None or b is None:
            return None
        return a[0] + b[0], a[1] or b[1]

    def less(a, b):
        if b is None:
            return a is not None
        if a is None:
            return False
        return a[0] < b[0] or (a[0] == b[0] and a[1] and not b[1])

    for k in range(n):
        for i in range(n):
            for j in range(n):
                s = plus(d[i][k], d[k][j])
                if less(s, d[i][j]):
                    d[i][j] = s
    if any(less(d[i][i], (0, False)) for i in range(n)):
        return None
    return d


def sample_zone(z, rng: random.Random, count: int = 8):
    """Exact rational points of ``z`` chosen clock by clock.

    A canonical matrix lets every partial assignment that respects the
    constraints among assigned clocks extend to a full point.
    """
    rows = z.rows()
    n = len(rows) - 1
    out = []
    for _ in range(count):
        v = [Fraction(0)]
        for i in range(1, n + 1):
            lo, lo_strict, hi, hi_strict = Fraction(0), False, None, False
            for j in range(i):
                up = decode(rows[i][j])
                if up is not None:
                    cand = v[j] + up[0]
                    if hi is None or cand < hi or (cand == hi and up[1]):
                        hi, hi_strict = cand, up[1]
                down = decode(rows[j][i])
                if down is not None:
                    cand = v[j] - down[0]
                    if cand > lo or (cand == lo and down[1]):
                        lo, lo_strict = cand, down[1]
            if hi is None:
                hi, hi_strict = lo + 3, False
            options = []
            if not lo_strict:
                options.append(lo)
            if not hi_strict:
                options.append(hi)
            options += [lo + (hi - lo) * Fraction(k, 8) for k in range(1, 8)]
            options = [x for x in options if (x > lo or not lo_strict) and (x < hi or not hi_strict)]
            v.append(rng.choice(options) if options else lo)
        point = tuple(v[1:])
        assert in_zone(z, point), (rows, point)
        out.append(point)
    return out


def delay_reaches(z, v) -> bool:
    """Some ``d >= 0`` puts ``v + d`` in ``z``.

    Delays only move single-clock bounds, so the candidate delays are the
    points where some clock meets a bound, the midpoints between them, and
    one point past the last of them.
    """
    rows = z.rows()
    ends = {Fraction(0)}
    for i in range(1, len(rows)):
        for b in (decode(rows[i][0]), decode(rows[0][i])):
            if b is not None:
                for k in (b[0], -b[0]):
                    if k - v[i - 1] >= 0:
                        ends.add(k - v[i - 1])
    ends = sorted(ends)
    cands = set(ends) | {(a + b) / 2 for a, b in zip(ends, ends[1:])} | {ends[-1] + 1}
    return any(in_zone(z, tuple(x + d for x in v)) for d in cands)


def exit_clocks(z, v):
    """Clocks sitting at their upper bound when ``v`` leaves ``z`` by delay."""
    rows = z.rows()
    n = len(rows) - 1
    cap = None
    for i in range(1, n + 1):
        b = decode(rows[i][0])
        if b is not None:
            c = b[0] - v[i - 1]
            cap = c if cap is None else min(cap, c)
    if cap is None:
        return None
    return {i for i in range(1, n + 1) if decode(rows[i][0]) is not None
            and decode(rows[i][0])[0] - v[i - 1] == cap}


def check_zone_graph(ta, g, rng: random.Random, samples: int = 6) -> list[str]:
    """Sampling check of guard uniformity, action and delay pre-stability."""
    problems = []
    idx = {c: k for k, c in enumerate(ta.clocks)}
    succ = dict(g.delay_edges)
    for node in g.nodes:
        pts = sample_zone(node.zone, rng, samples)
        chain = set()
        cur = node.id
        while cur in succ and succ[cur] not in chain:
            cur = succ[cur]
            chain.add(cur)
        for k, e in enumerate(ta.edges):
            if e.source != node.location:
                continue
            flags = {all(_holds(c, p[idx[c.clock]]) for c in e.guard) for p in pts}
            if len(flags) > 1:
                problems.append(f"node {node.id}: guard of edge {k} not uniform")
                continue
            targets = [a.dst for a in g.action_edges if a.src == node.id and a.edge == k]
            if flags == {False}:
                if targets:
                    problems.append(f"node {node.id}: edge {k} disabled but has a zone edge")
                continue
            if len(targets) != 1:
                problems.append(f"node {node.id}: edge {k} has {len(targets)} targets")
                continue
            tz = g.nodes[targets[0]].zone
            for p in pts:
                q = tuple(Fraction(0) if ta.clocks[i] in e.resets else p[i] for i in range(len(p)))
                if not in_zone(tz, q):
                    problems.append(f"node {node.id}: edge {k} image {q} outside node {targets[0]}")
        for other in g.nodes_at(node.location):
            if other.id == node.id:
                continue
            hits = {delay_reaches(other.zone, p) for p in pts}
            if len(hits) > 1:
                problems.append(f"node {node.id}: not delay-stable w.r.t. node {other.id}")
            elif hits == {True} and other.id not in chain:
                problems.append(f"node {node.id}: reaches {other.id} outside its delay chain")
            elif hits == {False} and other.id in chain:
                problems.append(f"node {node.id}: chain member {other.id} unreachable")
    return problems


def exit_facet_violations(g, rng: random.Random, samples: int = 6) -> list[str]:
    """Every sampled exit point of a bounded zone shares one exit clock."""
    out = []
    for node in g.nodes:
        sets = [exit_clocks(node.zone, p) for p in sample_zone(node.zone, rng, samples)]
        sets = [s for s in sets if s is not None]
        if sets and not set.intersection(*sets):
            out.append(f"node {node.id}: exit facets {sets}")
    return out


def _holds(c, value) -> bool:
    return {"<": value < c.k, "<=": value <= c.k, ">": value > c.k, ">=": value >= c.k, "=": value == c.k}[c.rel]


def chromatic_number(nvert: int, edges) -> int:
    """Smallest k admitting a proper colouring, by exhaustive search."""
    if nvert == 0:
        return 0
    for k in range(1, nvert + 1):
        for col in itertools.product(range(k), repeat=nvert):
            if all(col[a] != col[b] for a, b in edges):
                return k
    return nvert


def reachable_regions(ta, top: int) -> set:
    """Every reachable ``(location, region)`` with regions cut at ``top``."""
    from tamin import region

    n = ta.nclocks
    edges = [(e, [(ta.clock_index(c.clock) - 1, c.rel, c.k) for c in e.guard],
              [ta.clock_index(x) - 1 for x in e.resets]) for e in ta.edges]
    start = (ta.initial, ((0,) * n, (0,) * n))
    seen = {start}
    work = [start]
    while work:
        loc, reg = work.pop()
        nxt = [(loc, region.time_successor(reg, top))]
        for e, g, r in edges:
            if e.source == loc and all(region.holds(reg, i, rel, k) for i, rel, k in g):
                nxt.append((e.target, region.reset(reg, r, top)))
        for s in nxt:
            if s not in seen:
                seen.add(s)
                work.append(s)
    return seen
